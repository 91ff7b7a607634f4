#pragma once

// Run configuration: flat text, one `key = value` per line, `#` comments.
//
//   scheme = bdf2-mrpc          # bdf1 | bdf2-rpc | bdf2-mrpc
//   N = 64
//   dt = 1e-3
//   t_end = 1
//   initial_condition = example1   # example1 | example2 | example3 | snapshot
//   snapshot_dir = path            # with initial_condition = snapshot
//   forcing = auto                 # auto | none
//   eps = 1  nu = 0.1  c0 = 100    # default to the case's values
//   species.1.z = 1
//   species.1.D = 1
//   output_dir = out
//   diag_every = 1
//   snapshot_every = 0             # 0 = final state only
//   assert_energy = true           # default: on for bdf1/bdf2-mrpc, off for bdf2-rpc
//   sigma_resync = true
//   transport_form = div-sigma-u   # div-sigma-u | u-grad-sigma
//   potential_laplacian = spectral # spectral | poisson-identity

#include "nsnpp/mms.hpp"
#include "nsnpp/schemes.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace nsnpp {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);
  std::string key;
  int line;  // 0 when not tied to a line
};

enum class InitialKind { example1, example2, example3, snapshot };

struct RunConfig {
  SchemeVariant scheme = SchemeVariant::bdf2_mrpc();
  int degree = 32;
  double dt = 1e-3;
  double t_end = 1.0;
  InitialKind initial = InitialKind::example1;
  std::filesystem::path snapshot_dir;
  bool forcing = true;  // "auto": on for manufactured cases with forcing
  Model model;
  std::filesystem::path output_dir = "nsnpp-out";
  long diag_every = 1;
  long snapshot_every = 0;
  std::optional<bool> assert_energy;
  bool sigma_resync = true;
  TransportForm transport = TransportForm::div_sigma_u;
  PotentialLaplacian potential_laplacian = PotentialLaplacian::spectral;

  bool manufactured() const { return initial != InitialKind::snapshot; }
  CaseId case_id() const;
  bool energy_asserted() const;
  long steps() const;
  SchemeOptions scheme_options() const;
  /// Throws ConfigError naming the key.
  void validate() const;
};

/// Parses config text; case defaults are applied before explicit keys.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Defaults for a manufactured case (physics and species from the case).
RunConfig default_config(CaseId id);

}  // namespace nsnpp
