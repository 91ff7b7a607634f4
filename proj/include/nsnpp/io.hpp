#pragma once

// On-disk formats.
//
// timeseries.csv   line 1: "# nsnpp-timeseries 1", line 2: header, then one
//                  row per diagnostic interval, floats with 17 significant digits.
// snapshot         line 1: "nsnpp-field 1"
//                  line 2: "N=<int> t=<float> var=<name>"
//                  then (N+1)^2 values, one per line, x-index fastest:
//                  f(x_0,y_0), f(x_1,y_0), ..., f(x_N,y_0), f(x_0,y_1), ...
// table            CSV: sweep value, error columns, then consecutive rate
//                  columns (empty on the first row).

#include "nsnpp/diagnostics.hpp"
#include "nsnpp/spectral.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsnpp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTimeseriesSchema = "# nsnpp-timeseries 1";
inline constexpr const char* kSnapshotMagic = "nsnpp-field 1";

std::string format_double(double v);

struct TimeSeriesRow {
  long step = 0;
  double t = 0.0;
  double e_ns = 0.0;
  double e_npp = 0.0;
  double e_total = 0.0;
  double scheme_energy = 0.0;
  double r = 0.0;
  double xi = 1.0;
  std::vector<double> mass;
  std::vector<double> min_c;
  double divergence = 0.0;
  std::vector<double> errors;  // optional, same order as the writer's error names
};

std::vector<std::string> timeseries_columns(int species, const std::vector<std::string>& error_names);

class TimeSeriesWriter {
 public:
  TimeSeriesWriter(const std::filesystem::path& path, int species, std::vector<std::string> error_names = {});
  void write(const TimeSeriesRow& row);
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  int species_;
  std::size_t errors_;
  std::vector<std::string> columns_;
};

void write_timeseries(const std::vector<TimeSeriesRow>& rows, int species, const std::vector<std::string>& error_names,
                      const std::filesystem::path& path);

struct SnapshotMeta {
  int degree = 0;
  double t = 0.0;
  std::string var;
};

void write_snapshot(const Field2D& f, const SnapshotMeta& meta, const std::filesystem::path& path);
/// Throws IoError with the path on malformed input.
Field2D read_snapshot(const std::filesystem::path& path, SnapshotMeta* meta = nullptr);

void write_table(const ConvergenceTable& table, const std::filesystem::path& path);

}  // namespace nsnpp
