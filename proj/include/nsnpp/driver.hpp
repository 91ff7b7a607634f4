#pragma once

#include "nsnpp/config.hpp"
#include "nsnpp/diagnostics.hpp"
#include "nsnpp/io.hpp"
#include "nsnpp/mms.hpp"
#include "nsnpp/schemes.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nsnpp {

struct FailureInfo {
  long step = 0;
  std::string invariant;
  double magnitude = 0.0;
  std::string message;
};

struct FieldErrors {
  double u = 0.0;
  double p = 0.0;
  std::vector<double> c;
  double phi = 0.0;

  std::vector<double> flat() const;  // u, p, c_1..c_m, phi
  static std::vector<std::string> names(int species);
};

/// Discrete L2 errors against nodal exact values; p and phi are compared
/// after removing their discrete means.
FieldErrors field_errors(const NsnppState& s, const ExactFields& exact, const QuadratureRule& rule);

struct RunOptions {
  bool write_files = true;
  bool quiet = true;
  /// Reuse prebuilt operators when the degree matches (sweeps).
  const Discretization* disc = nullptr;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 invariant failure
  std::optional<FailureInfo> failure;
  NsnppState final_state;
  std::vector<TimeSeriesRow> rows;
  std::optional<FieldErrors> errors;  // at the final time, manufactured cases only
  PhaseTimers timers;
  double wall_seconds = 0.0;
  /// Every step's energy was <= the previous one (rel. 1e-10), scheme functional.
  bool energy_monotone = true;
  double max_mass_drift = 0.0;  // relative, forcing-free runs
  double min_concentration = 0.0;
};

/// Builds the initial state for a config (manufactured case or snapshot dir).
NsnppState initial_state(const RunConfig& cfg, const Discretization& disc);

RunResult run(const RunConfig& cfg, const RunOptions& opts = {});

struct Sweep {
  std::string parameter;  // "dt" or "N"
  std::vector<double> values;
};

/// Parses "dt=1e-1,1e-2" or "N=8,16".
Sweep parse_sweep(const std::string& spec);

struct ConvergenceResult {
  ConvergenceTable table;
  std::vector<RunResult> runs;
  int exit_code = 0;
};

ConvergenceResult convergence(const RunConfig& cfg, const Sweep& sweep, const RunOptions& opts = {});

}  // namespace nsnpp
