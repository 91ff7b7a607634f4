#include "nsnpp/driver.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace nsnpp {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> FieldErrors::flat() const {
  std::vector<double> v = {u, p};
  v.insert(v.end(), c.begin(), c.end());
  v.push_back(phi);
  return v;
}

std::vector<std::string> FieldErrors::names(int species) {
  std::vector<std::string> n = {"u", "p"};
  for (int i = 1; i <= species; ++i) n.push_back("c_" + std::to_string(i));
  n.push_back("phi");
  return n;
}

FieldErrors field_errors(const NsnppState& s, const ExactFields& exact, const QuadratureRule& rule) {
  const auto centered = [&](const Field2D& f) {
    Field2D g = f;
    g.values().array() -= discrete_mean(f, rule);
    return g;
  };
  FieldErrors e;
  e.u = l2_error(s.u, exact.u, rule);
  e.p = l2_error(centered(s.p), centered(exact.p), rule);
  for (std::size_t i = 0; i < s.c.size(); ++i) e.c.push_back(l2_error(s.c[i], exact.c[i], rule));
  e.phi = l2_error(centered(s.phi), centered(exact.phi), rule);
  return e;
}

NsnppState initial_state(const RunConfig& cfg, const Discretization& disc) {
  const QuadratureRule& rule = *disc.rule;
  if (cfg.manufactured()) {
    const ManufacturedCase mc = make_case(cfg.case_id());
    const InitialCondition ic = initial_condition(mc, rule);
    if (cfg.forcing && mc.has_forcing) {
      const ForcingTerms f0 = forcing(mc, ic.t0, rule);
      return init_state(ic, cfg.model, disc, &f0.f_u);
    }
    return init_state(ic, cfg.model, disc);
  }
  InitialCondition ic;
  ic.strong_boundary = false;
  const auto load = [&](const std::string& name) {
    SnapshotMeta meta;
    Field2D f = read_snapshot(cfg.snapshot_dir / (name + ".txt"), &meta);
    if (meta.degree != rule.degree) {
      throw ConfigError("snapshot_dir", 0,
                        name + " snapshot has N=" + std::to_string(meta.degree) + ", config N=" +
                            std::to_string(rule.degree));
    }
    ic.t0 = meta.t;
    return f;
  };
  ic.u = VectorField2D(load("u_x"), load("u_y"));
  for (int i = 1; i <= cfg.model.species_count(); ++i) ic.c.push_back(load("c_" + std::to_string(i)));
  return init_state(ic, cfg.model, disc);
}

namespace {

TimeSeriesRow diagnostic_row(const NsnppState& s, const RunConfig& cfg, const QuadratureRule& rule,
                             const EllipticOperator& pressure, const std::optional<ManufacturedCase>& exact) {
  TimeSeriesRow row;
  row.step = s.step;
  row.t = s.t;
  row.e_ns = kinetic_energy(s.u, rule);
  row.e_npp = energy_npp(s.c, s.phi_bar, cfg.model.species, rule);
  row.e_total = row.e_ns + row.e_npp;
  row.scheme_energy = discrete_energy(s, energy_form(cfg.scheme.order, cfg.scheme.projection), cfg.dt,
                                      cfg.model.physics.nu, rule);
  row.r = s.r;
  row.xi = s.xi;
  for (const auto& ci : s.c) {
    row.mass.push_back(discrete_integral(ci, rule));
    row.min_c.push_back(ci.min());
  }
  row.divergence = discrete_divergence(s.u, pressure);
  if (exact) row.errors = field_errors(s, exact_fields(*exact, s.t, rule), rule).flat();
  return row;
}

void write_state_snapshots(const NsnppState& s, const fs::path& dir) {
  const auto put = [&](const Field2D& f, const std::string& name) {
    write_snapshot(f, {f.degree(), s.t, name}, dir / (name + ".txt"));
  };
  put(s.u.x, "u_x");
  put(s.u.y, "u_y");
  put(s.p, "p");
  put(s.phi, "phi");
  for (std::size_t i = 0; i < s.c.size(); ++i) put(s.c[i], "c_" + std::to_string(i + 1));
}

std::string step_dir_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06ld", step);
  return buf;
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

json summary_json(const RunConfig& cfg, const RunResult& r, const QuadratureRule& rule) {
  json j;
  j["scheme"] = cfg.scheme.name();
  j["N"] = cfg.degree;
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["steps"] = r.final_state.step;
  j["t_final"] = r.final_state.t;
  j["exit_code"] = r.exit_code;
  j["wall_seconds"] = r.wall_seconds;
  j["timing"] = {{"elliptic_seconds", r.timers.elliptic},
                 {"assembly_seconds", r.timers.assembly},
                 {"step_seconds", r.timers.total},
                 {"steps", r.timers.steps}};
  const NsnppState& s = r.final_state;
  if (!s.c.empty()) {
    j["final"]["E_ns"] = kinetic_energy(s.u, rule);
    j["final"]["E_npp"] = energy_npp(s.c, s.phi_bar, cfg.model.species, rule);
    j["final"]["E_total"] = j["final"]["E_ns"].get<double>() + j["final"]["E_npp"].get<double>();
    j["final"]["r"] = s.r;
    j["final"]["xi"] = s.xi;
    std::vector<double> mass, minc;
    for (const auto& ci : s.c) {
      mass.push_back(discrete_integral(ci, rule));
      minc.push_back(ci.min());
    }
    j["final"]["mass"] = mass;
    j["final"]["min_c"] = minc;
  }
  j["energy_monotone"] = r.energy_monotone;
  j["max_mass_drift"] = r.max_mass_drift;
  j["min_concentration"] = r.min_concentration;
  if (r.errors) {
    const auto names = FieldErrors::names(cfg.model.species_count());
    const auto vals = r.errors->flat();
    for (std::size_t k = 0; k < names.size(); ++k) j["errors"][names[k]] = vals[k];
  }
  if (r.failure) {
    j["failure"] = {{"step", r.failure->step},
                    {"invariant", r.failure->invariant},
                    {"magnitude", r.failure->magnitude},
                    {"message", r.failure->message}};
  }
  return j;
}

}  // namespace

RunResult run(const RunConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const auto wall0 = std::chrono::steady_clock::now();
  const Discretization disc =
      (opts.disc && opts.disc->degree() == cfg.degree) ? *opts.disc : Discretization::make(cfg.degree);
  const QuadratureRule& rule = *disc.rule;
  const int m = cfg.model.species_count();

  std::optional<ManufacturedCase> exact;
  ForcingFn forcing;
  if (cfg.manufactured()) {
    const ManufacturedCase mc = make_case(cfg.case_id());
    if (cfg.forcing && mc.has_forcing) forcing = forcing_fn(mc, disc.rule);
    if (mc.has_exact && cfg.forcing) exact = mc;
  }

  const SchemeContext ctx(disc, cfg.model, cfg.dt, cfg.scheme, cfg.scheme_options());
  RunResult result;
  NsnppState state = initial_state(cfg, disc);

  std::optional<TimeSeriesWriter> writer;
  if (opts.write_files) {
    fs::create_directories(cfg.output_dir);
    writer.emplace(cfg.output_dir / "timeseries.csv", m,
                   exact ? FieldErrors::names(m) : std::vector<std::string>{});
  }
  const auto record = [&](const NsnppState& s) {
    TimeSeriesRow row = diagnostic_row(s, cfg, rule, *disc.pressure, exact);
    if (writer) writer->write(row);
    result.rows.push_back(std::move(row));
  };
  record(state);

  result.min_concentration = state.c.front().min();
  for (const auto& ci : state.c) result.min_concentration = std::min(result.min_concentration, ci.min());

  const long n_steps = cfg.steps();
  const ForcingFn* fptr = forcing ? &forcing : nullptr;
  try {
    for (long k = 1; k <= n_steps; ++k) {
      StepReport rep;
      state = advance(state, ctx, fptr, &rep);
      if (rep.energy_after > rep.energy_before + 1e-10 * std::abs(rep.energy_before) && rep.energy_checked) {
        result.energy_monotone = false;
      }
      result.min_concentration = std::min(result.min_concentration, rep.min_c);
      if (!fptr) {
        for (int i = 0; i < m; ++i) {
          const double drift =
              std::abs(discrete_integral(state.c[i], rule) - state.initial_mass[i]) / state.initial_mass[i];
          result.max_mass_drift = std::max(result.max_mass_drift, drift);
        }
      }
      if (k % cfg.diag_every == 0 || k == n_steps) record(state);
      if (opts.write_files && cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) {
        write_state_snapshots(state, cfg.output_dir / "snapshots" / step_dir_name(k));
      }
      if (!opts.quiet && n_steps >= 10 && k % (n_steps / 10) == 0) {
        std::cerr << "step " << k << "/" << n_steps << " t=" << state.t << " r=" << state.r << " xi=" << state.xi
                  << '\n';
      }
    }
  } catch (const StepFailure& f) {
    result.exit_code = 1;
    result.failure = FailureInfo{f.step, f.invariant, f.magnitude, f.what()};
  } catch (const PositivityError& e) {
    result.exit_code = 1;
    result.failure = FailureInfo{state.step + 1, "positivity", e.value, e.what()};
  }

  result.final_state = std::move(state);
  if (exact && !result.failure) {
    result.errors = field_errors(result.final_state, exact_fields(*exact, result.final_state.t, rule), rule);
  }
  result.timers = ctx.timers();
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

  if (opts.write_files) {
    write_state_snapshots(result.final_state, cfg.output_dir / "snapshots" / step_dir_name(result.final_state.step));
    const json summary = summary_json(cfg, result, rule);
    write_json(summary, cfg.output_dir / "summary.json");
    if (result.failure) write_json(summary["failure"], cfg.output_dir / "failure.json");
  }
  return result;
}

Sweep parse_sweep(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep", 0, "expected dt=<list> or N=<list>");
  Sweep s;
  s.parameter = spec.substr(0, eq);
  if (s.parameter != "dt" && s.parameter != "N") throw ConfigError("sweep", 0, "sweep parameter must be dt or N");
  std::stringstream ss(spec.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (item.empty() || *end != '\0' || !(v > 0.0)) throw ConfigError("sweep", 0, "bad sweep value '" + item + "'");
    if (s.parameter == "N" && (v != std::floor(v) || v < 4)) {
      throw ConfigError("sweep", 0, "N values must be integers >= 4");
    }
    s.values.push_back(v);
  }
  if (s.values.size() < 2) throw ConfigError("sweep", 0, "need at least two sweep values");
  return s;
}

ConvergenceResult convergence(const RunConfig& cfg, const Sweep& sweep, const RunOptions& opts) {
  if (!cfg.manufactured() || cfg.case_id() == CaseId::example2 || !cfg.forcing) {
    throw ConfigError("initial_condition", 0, "convergence needs a forced manufactured case (example1 or example3)");
  }
  ConvergenceResult out;
  out.table.parameter = sweep.parameter;
  out.table.columns = FieldErrors::names(cfg.model.species_count());
  std::optional<Discretization> shared;
  if (sweep.parameter == "dt") shared = Discretization::make(cfg.degree);

  for (double v : sweep.values) {
    RunConfig point = cfg;
    if (sweep.parameter == "dt") {
      point.dt = v;
    } else {
      point.degree = static_cast<int>(v);
    }
    point.validate();
    RunOptions ro = opts;
    ro.write_files = false;
    ro.disc = shared ? &*shared : nullptr;
    RunResult r = run(point, ro);
    if (r.exit_code != 0) {
      out.exit_code = r.exit_code;
      out.runs.push_back(std::move(r));
      break;
    }
    out.table.rows.push_back({v, r.errors->flat()});
    if (!opts.quiet) {
      std::cerr << sweep.parameter << "=" << v << " err_u=" << r.errors->u << " err_p=" << r.errors->p << " ("
                << r.wall_seconds << " s)\n";
    }
    out.runs.push_back(std::move(r));
  }

  if (opts.write_files) {
    fs::create_directories(cfg.output_dir);
    write_table(out.table, cfg.output_dir / "convergence.csv");
    json j;
    j["parameter"] = sweep.parameter;
    j["scheme"] = cfg.scheme.name();
    j["exit_code"] = out.exit_code;
    for (std::size_t c = 0; c < out.table.columns.size(); ++c) {
      std::vector<double> h, e;
      for (const auto& row : out.table.rows) {
        h.push_back(row.h);
        e.push_back(row.errors[c]);
      }
      if (h.size() >= 2) {
        j["rates"][out.table.columns[c]]["consecutive"] = consecutive_rates(h, e);
        j["rates"][out.table.columns[c]]["least_squares"] = least_squares_rate(h, e);
      }
    }
    std::vector<double> walls;
    for (const auto& r : out.runs) walls.push_back(r.wall_seconds);
    j["wall_seconds"] = walls;
    if (!out.runs.empty() && out.runs.back().failure) {
      const auto& f = *out.runs.back().failure;
      j["failure"] = {{"step", f.step}, {"invariant", f.invariant}, {"magnitude", f.magnitude}, {"message", f.message}};
    }
    write_json(j, cfg.output_dir / "summary.json");
  }
  return out;
}

}  // namespace nsnpp
