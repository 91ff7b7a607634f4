#include "nsnpp/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace nsnpp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string config_message(const std::string& key, int line, const std::string& message) {
  std::ostringstream os;
  os << "config error";
  if (line > 0) os << " (line " << line << ")";
  if (!key.empty()) os << " [" << key << "]";
  os << ": " << message;
  return os.str();
}

struct Entry {
  std::string value;
  int line;
};

double to_double(const std::string& key, const Entry& e) {
  char* end = nullptr;
  const double v = std::strtod(e.value.c_str(), &end);
  if (e.value.empty() || *end != '\0' || !std::isfinite(v)) {
    throw ConfigError(key, e.line, "expected a finite number, got '" + e.value + "'");
  }
  return v;
}

long to_long(const std::string& key, const Entry& e) {
  char* end = nullptr;
  const long v = std::strtol(e.value.c_str(), &end, 10);
  if (e.value.empty() || *end != '\0') throw ConfigError(key, e.line, "expected an integer, got '" + e.value + "'");
  return v;
}

bool to_bool(const std::string& key, const Entry& e) {
  if (e.value == "true" || e.value == "on" || e.value == "1") return true;
  if (e.value == "false" || e.value == "off" || e.value == "0") return false;
  throw ConfigError(key, e.line, "expected true or false, got '" + e.value + "'");
}

}  // namespace

ConfigError::ConfigError(std::string k, int l, const std::string& message)
    : std::runtime_error(config_message(k, l, message)), key(std::move(k)), line(l) {}

CaseId RunConfig::case_id() const {
  switch (initial) {
    case InitialKind::example1: return CaseId::example1;
    case InitialKind::example2: return CaseId::example2;
    case InitialKind::example3: return CaseId::example3;
    case InitialKind::snapshot: break;
  }
  throw std::logic_error("case_id: snapshot initial condition has no case");
}

bool RunConfig::energy_asserted() const {
  return assert_energy.value_or(scheme.projection != Projection::rotational);
}

long RunConfig::steps() const { return std::max(1L, std::lround(t_end / dt)); }

SchemeOptions RunConfig::scheme_options() const {
  SchemeOptions o;
  o.assert_energy = energy_asserted();
  o.sigma_resync = sigma_resync;
  o.transport = transport;
  o.potential_laplacian = potential_laplacian;
  return o;
}

void RunConfig::validate() const {
  if (degree < 4) throw ConfigError("N", 0, "N must be >= 4");
  if (!(dt > 0.0)) throw ConfigError("dt", 0, "dt must be > 0");
  if (!(t_end >= dt)) throw ConfigError("t_end", 0, "t_end must be >= dt");
  if (!(model.physics.eps > 0.0)) throw ConfigError("eps", 0, "eps must be > 0");
  if (!(model.physics.nu > 0.0)) throw ConfigError("nu", 0, "nu must be > 0");
  if (!(model.physics.c0 > 0.0)) throw ConfigError("c0", 0, "c0 must be > 0");
  if (initial == InitialKind::snapshot && snapshot_dir.empty()) {
    throw ConfigError("snapshot_dir", 0, "required with initial_condition = snapshot");
  }
  if (model.species.empty()) throw ConfigError("species", 0, "at least one species is required");
  for (std::size_t i = 0; i < model.species.size(); ++i) {
    if (!(model.species[i].diffusivity > 0.0)) {
      throw ConfigError("species." + std::to_string(i + 1) + ".D", 0, "diffusivity must be > 0");
    }
  }
  if (diag_every < 1) throw ConfigError("diag_every", 0, "diag_every must be >= 1");
  if (snapshot_every < 0) throw ConfigError("snapshot_every", 0, "snapshot_every must be >= 0");
  if (manufactured() && static_cast<int>(model.species.size()) != make_case(case_id()).model.species_count()) {
    throw ConfigError("species", 0, "species count does not match the manufactured case");
  }
}

RunConfig default_config(CaseId id) {
  RunConfig cfg;
  switch (id) {
    case CaseId::example1: cfg.initial = InitialKind::example1; break;
    case CaseId::example2: cfg.initial = InitialKind::example2; break;
    case CaseId::example3: cfg.initial = InitialKind::example3; break;
  }
  const ManufacturedCase mc = make_case(id);
  cfg.model = mc.model;
  cfg.forcing = mc.has_forcing;
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", line_no, "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", line_no, "empty key");
    if (entries.count(key)) throw ConfigError(key, line_no, "duplicate key");
    entries[key] = {value, line_no};
  }

  RunConfig cfg;
  if (auto it = entries.find("initial_condition"); it != entries.end()) {
    const std::string& v = it->second.value;
    if (v == "snapshot") {
      cfg.initial = InitialKind::snapshot;
      cfg.forcing = false;
      cfg.model = Model{};
    } else {
      try {
        cfg = default_config(parse_case(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError("initial_condition", it->second.line, e.what());
      }
    }
  } else {
    cfg = default_config(CaseId::example1);
  }

  std::map<int, Species> species;
  std::map<int, int> species_keys;
  bool explicit_species = false;
  for (const auto& [key, e] : entries) {
    if (key == "initial_condition") continue;
    if (key == "scheme") {
      try {
        cfg.scheme = SchemeVariant::parse(e.value);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(key, e.line, ex.what());
      }
    } else if (key == "N") {
      cfg.degree = static_cast<int>(to_long(key, e));
      if (cfg.degree < 4) throw ConfigError(key, e.line, "N must be >= 4");
    } else if (key == "dt") {
      cfg.dt = to_double(key, e);
      if (!(cfg.dt > 0.0)) throw ConfigError(key, e.line, "dt must be > 0");
    } else if (key == "t_end") {
      cfg.t_end = to_double(key, e);
    } else if (key == "eps") {
      cfg.model.physics.eps = to_double(key, e);
    } else if (key == "nu") {
      cfg.model.physics.nu = to_double(key, e);
    } else if (key == "c0") {
      cfg.model.physics.c0 = to_double(key, e);
    } else if (key == "snapshot_dir") {
      cfg.snapshot_dir = e.value;
    } else if (key == "forcing") {
      if (e.value == "none") {
        cfg.forcing = false;
      } else if (e.value != "auto") {
        throw ConfigError(key, e.line, "expected auto or none");
      }
    } else if (key == "output_dir") {
      cfg.output_dir = e.value;
    } else if (key == "diag_every") {
      cfg.diag_every = to_long(key, e);
    } else if (key == "snapshot_every") {
      cfg.snapshot_every = to_long(key, e);
    } else if (key == "assert_energy") {
      cfg.assert_energy = to_bool(key, e);
    } else if (key == "sigma_resync") {
      cfg.sigma_resync = to_bool(key, e);
    } else if (key == "transport_form") {
      if (e.value == "div-sigma-u") {
        cfg.transport = TransportForm::div_sigma_u;
      } else if (e.value == "u-grad-sigma") {
        cfg.transport = TransportForm::u_grad_sigma;
      } else {
        throw ConfigError(key, e.line, "expected div-sigma-u or u-grad-sigma");
      }
    } else if (key == "potential_laplacian") {
      if (e.value == "spectral") {
        cfg.potential_laplacian = PotentialLaplacian::spectral;
      } else if (e.value == "poisson-identity") {
        cfg.potential_laplacian = PotentialLaplacian::poisson_identity;
      } else {
        throw ConfigError(key, e.line, "expected spectral or poisson-identity");
      }
    } else if (key.rfind("species.", 0) == 0) {
      const auto dot = key.find('.', 8);
      if (dot == std::string::npos) throw ConfigError(key, e.line, "expected species.<i>.z or species.<i>.D");
      const std::string idx_s = key.substr(8, dot - 8);
      const std::string field = key.substr(dot + 1);
      char* end = nullptr;
      const long idx = std::strtol(idx_s.c_str(), &end, 10);
      if (idx_s.empty() || *end != '\0' || idx < 1) throw ConfigError(key, e.line, "species index must be >= 1");
      if (field == "z") {
        species[static_cast<int>(idx)].valence = to_double(key, e);
      } else if (field == "D") {
        species[static_cast<int>(idx)].diffusivity = to_double(key, e);
      } else {
        throw ConfigError(key, e.line, "unknown species field '" + field + "'");
      }
      ++species_keys[static_cast<int>(idx)];
      explicit_species = true;
    } else {
      throw ConfigError(key, e.line, "unknown key");
    }
  }

  if (explicit_species) {
    cfg.model.species.clear();
    int expected = 1;
    for (const auto& [idx, sp] : species) {
      if (idx != expected) {
        throw ConfigError("species." + std::to_string(expected), 0, "species indices must be contiguous from 1");
      }
      if (species_keys[idx] != 2) {
        throw ConfigError("species." + std::to_string(idx), 0, "both z and D are required");
      }
      cfg.model.species.push_back(sp);
      ++expected;
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", 0, "cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace nsnpp
