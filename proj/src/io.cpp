#include "nsnpp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace nsnpp {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void check_stream(const std::ostream& out, const std::filesystem::path& path) {
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> timeseries_columns(int species, const std::vector<std::string>& error_names) {
  std::vector<std::string> cols = {"step", "t", "E_ns", "E_npp", "E_total", "scheme_energy", "r", "xi"};
  for (int i = 1; i <= species; ++i) cols.push_back("mass_" + std::to_string(i));
  for (int i = 1; i <= species; ++i) cols.push_back("min_c_" + std::to_string(i));
  cols.push_back("divergence");
  for (const auto& e : error_names) cols.push_back("err_" + e);
  return cols;
}

TimeSeriesWriter::TimeSeriesWriter(const std::filesystem::path& path, int species,
                                   std::vector<std::string> error_names)
    : path_(path), out_(open_out(path)), species_(species), errors_(error_names.size()),
      columns_(timeseries_columns(species, error_names)) {
  out_ << kTimeseriesSchema << '\n';
  for (std::size_t k = 0; k < columns_.size(); ++k) out_ << (k ? "," : "") << columns_[k];
  out_ << '\n';
  check_stream(out_, path_);
}

void TimeSeriesWriter::write(const TimeSeriesRow& row) {
  if (static_cast<int>(row.mass.size()) != species_ || static_cast<int>(row.min_c.size()) != species_ ||
      (row.errors.size() != errors_ && !row.errors.empty())) {
    throw std::invalid_argument("TimeSeriesWriter: row does not match the declared columns");
  }
  out_ << row.step;
  for (double v : {row.t, row.e_ns, row.e_npp, row.e_total, row.scheme_energy, row.r, row.xi}) {
    out_ << ',' << format_double(v);
  }
  for (double v : row.mass) out_ << ',' << format_double(v);
  for (double v : row.min_c) out_ << ',' << format_double(v);
  out_ << ',' << format_double(row.divergence);
  for (std::size_t k = 0; k < errors_; ++k) {
    out_ << ',';
    if (!row.errors.empty()) out_ << format_double(row.errors[k]);
  }
  out_ << '\n';
  out_.flush();
  check_stream(out_, path_);
}

void write_timeseries(const std::vector<TimeSeriesRow>& rows, int species, const std::vector<std::string>& error_names,
                      const std::filesystem::path& path) {
  TimeSeriesWriter w(path, species, error_names);
  for (const auto& r : rows) w.write(r);
}

void write_snapshot(const Field2D& f, const SnapshotMeta& meta, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kSnapshotMagic << '\n';
  out << "N=" << f.degree() << " t=" << format_double(meta.t) << " var=" << meta.var << '\n';
  const Matrix& v = f.values();
  // column-major storage: x-index fastest
  for (Eigen::Index k = 0; k < v.size(); ++k) out << format_double(v.data()[k]) << '\n';
  check_stream(out, path);
}

Field2D read_snapshot(const std::filesystem::path& path, SnapshotMeta* meta) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotMagic) {
    throw IoError(path.string() + ": line 1 is not '" + kSnapshotMagic + "'");
  }
  if (!std::getline(in, line)) throw IoError(path.string() + ": missing header line 2");
  SnapshotMeta m;
  bool have_n = false;
  {
    std::istringstream hs(line);
    std::string tok;
    while (hs >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) throw IoError(path.string() + ": malformed header token '" + tok + "'");
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      try {
        if (key == "N") {
          m.degree = std::stoi(val);
          have_n = true;
        } else if (key == "t") {
          m.t = std::strtod(val.c_str(), nullptr);
        } else if (key == "var") {
          m.var = val;
        }
      } catch (const std::exception&) {
        throw IoError(path.string() + ": bad value for " + key);
      }
    }
  }
  if (!have_n || m.degree < 1) throw IoError(path.string() + ": header lacks a valid N");
  Field2D f(m.degree);
  Matrix& v = f.values();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!std::getline(in, line)) {
      throw IoError(path.string() + ": expected " + std::to_string(v.size()) + " values, got " + std::to_string(k));
    }
    char* end = nullptr;
    v.data()[k] = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) throw IoError(path.string() + ": bad value on line " + std::to_string(k + 3));
  }
  if (meta) *meta = m;
  return f;
}

void write_table(const ConvergenceTable& table, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << table.parameter;
  for (const auto& c : table.columns) out << ",err_" << c;
  for (const auto& c : table.columns) out << ",rate_" << c;
  out << '\n';
  std::vector<std::vector<double>> rates;
  for (std::size_t c = 0; c < table.columns.size(); ++c) rates.push_back(table.consecutive_rates(c));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << format_double(table.rows[r].h);
    for (double e : table.rows[r].errors) out << ',' << format_double(e);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      out << ',';
      if (r > 0) out << format_double(rates[c][r - 1]);
    }
    out << '\n';
  }
  check_stream(out, path);
}

}  // namespace nsnpp
