// nsnpp: run simulations, convergence sweeps and manufactured-solution checks.
//
//   nsnpp run <config> [--output-dir DIR] [--quiet]
//   nsnpp convergence <config> --sweep dt=1e-1,1e-2 [--output-dir DIR] [--quiet]
//   nsnpp verify-mms <case> [--N 128] [--quiet]
//
// Exit codes: 0 success, 1 invariant failure, 2 configuration error.

#include "nsnpp/driver.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kInvariant = 1;
constexpr int kConfig = 2;

void print_failure(const nsnpp::FailureInfo& f) {
  std::cerr << "invariant failure at step " << f.step << " [" << f.invariant << "]: " << f.message << '\n';
}

int cmd_run(const std::string& path, const std::string& out_dir, bool quiet) {
  nsnpp::RunConfig cfg = nsnpp::load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  nsnpp::RunOptions opts;
  opts.quiet = quiet;
  const nsnpp::RunResult r = nsnpp::run(cfg, opts);
  if (r.failure) {
    print_failure(*r.failure);
    return kInvariant;
  }
  if (!quiet) {
    std::printf("%s N=%d dt=%g steps=%ld t=%g wall=%.3fs\n", cfg.scheme.name().c_str(), cfg.degree, cfg.dt,
                r.final_state.step, r.final_state.t, r.wall_seconds);
    if (r.errors) std::printf("err_u=%.6e err_p=%.6e err_phi=%.6e\n", r.errors->u, r.errors->p, r.errors->phi);
    std::printf("output: %s\n", cfg.output_dir.string().c_str());
  }
  return kOk;
}

int cmd_convergence(const std::string& path, const std::string& sweep_spec, const std::string& out_dir, bool quiet) {
  nsnpp::RunConfig cfg = nsnpp::load_config(path);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  const nsnpp::Sweep sweep = nsnpp::parse_sweep(sweep_spec);
  nsnpp::RunOptions opts;
  opts.quiet = quiet;
  const nsnpp::ConvergenceResult res = nsnpp::convergence(cfg, sweep, opts);
  if (res.exit_code != 0) {
    if (!res.runs.empty() && res.runs.back().failure) print_failure(*res.runs.back().failure);
    return kInvariant;
  }
  if (!quiet) {
    const auto& t = res.table;
    std::printf("%-10s", t.parameter.c_str());
    for (const auto& c : t.columns) std::printf(" %13s", ("err_" + c).c_str());
    std::printf("\n");
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      std::printf("%-10g", t.rows[r].h);
      for (double e : t.rows[r].errors) std::printf(" %13.5e", e);
      std::printf("\n");
    }
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::printf("rate_%s:", t.columns[c].c_str());
      for (double v : t.consecutive_rates(c)) std::printf(" %.3f", v);
      std::printf("\n");
    }
    std::printf("table: %s\n", (cfg.output_dir / "convergence.csv").string().c_str());
  }
  return kOk;
}

int cmd_verify(const std::string& name, int degree, bool quiet) {
  const nsnpp::ManufacturedCase mc = nsnpp::make_case(nsnpp::parse_case(name));
  if (!mc.has_exact) {
    std::cerr << name << " has no exact solution to verify\n";
    return kConfig;
  }
  const nsnpp::QuadratureRule rule = nsnpp::lgl_rule(degree);
  bool ok = true;
  for (double t : {0.0, 0.37, 1.0}) {
    const nsnpp::ResidualReport r = nsnpp::residual_oracle(mc, t, rule);
    const bool pass = r.momentum <= 1e-6 && r.sigma <= 1e-6 && r.concentration <= 1e-6 && r.poisson <= 1e-8 &&
                      r.continuity <= 1e-8;
    ok = ok && pass;
    if (!quiet || !pass) {
      std::printf("%s t=%.2f momentum=%.3e continuity=%.3e sigma=%.3e concentration=%.3e poisson=%.3e "
                  "boundary=%.3e %s\n",
                  name.c_str(), t, r.momentum, r.continuity, r.sigma, r.concentration, r.poisson, r.boundary,
                  pass ? "ok" : "FAIL");
    }
  }
  return ok ? kOk : kInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navier-Stokes-Nernst-Planck-Poisson spectral SAV solver"};
  app.require_subcommand(1);
  std::string out_dir;
  bool quiet = false;
  app.add_option("--output-dir", out_dir, "Override output_dir from the config");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("config", config_path, "Config file")->required();
  run->add_option("--output-dir", out_dir, "Override output_dir from the config");
  run->add_flag("--quiet", quiet, "Suppress progress output");

  std::string sweep;
  auto* conv = app.add_subcommand("convergence", "Sweep dt or N and tabulate errors");
  conv->add_option("config", config_path, "Config file")->required();
  conv->add_option("--sweep", sweep, "dt=<list> or N=<list>")->required();
  conv->add_option("--output-dir", out_dir, "Override output_dir from the config");
  conv->add_flag("--quiet", quiet, "Suppress progress output");

  std::string case_name;
  int verify_n = 128;
  auto* verify = app.add_subcommand("verify-mms", "Check manufactured forcings with the residual oracle");
  verify->add_option("case", case_name, "example1 or example3")->required();
  verify->add_option("--N", verify_n, "Polynomial degree of the check grid")->check(CLI::Range(8, 512));
  verify->add_flag("--quiet", quiet, "Only report failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir, quiet);
    if (*conv) return cmd_convergence(config_path, sweep, out_dir, quiet);
    if (*verify) return cmd_verify(case_name, verify_n, quiet);
  } catch (const nsnpp::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  } catch (const nsnpp::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
  return kConfig;
}
