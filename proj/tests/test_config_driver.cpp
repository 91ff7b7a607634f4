#include "nsnpp/driver.hpp"

#include "doctest.h"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace nsnpp;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nsnpp-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(NSNPP_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config: defaults come from the case, explicit keys override") {
  const RunConfig c = parse_config(
      "# comment\n"
      "scheme = bdf1\n"
      "initial_condition = example3   # three ions\n"
      "N = 16\n"
      "dt = 0.01\n"
      "t_end = 0.1\n"
      "nu = 0.2\n");
  CHECK(c.scheme.name() == "bdf1");
  CHECK(c.degree == 16);
  CHECK(c.model.species_count() == 3);
  CHECK(c.model.physics.eps == 0.5);
  CHECK(c.model.physics.nu == 0.2);
  CHECK(c.model.physics.c0 == 100.0);
  CHECK(c.forcing);
  CHECK(c.steps() == 10);
  CHECK(c.energy_asserted());

  const RunConfig r = parse_config("scheme = bdf2-rpc\ninitial_condition = example2\n");
  CHECK_FALSE(r.forcing);
  CHECK_FALSE(r.energy_asserted());
  CHECK(parse_config("scheme = bdf2-rpc\nassert_energy = true\n").energy_asserted());
}

TEST_CASE("config: explicit species list") {
  const RunConfig c = parse_config(
      "initial_condition = snapshot\nsnapshot_dir = /tmp/x\n"
      "species.1.z = 2\nspecies.1.D = 0.5\nspecies.2.z = -1\nspecies.2.D = 1\n");
  REQUIRE(c.model.species_count() == 2);
  CHECK(c.model.species[0].valence == 2.0);
  CHECK(c.model.species[0].diffusivity == 0.5);
  CHECK_FALSE(c.forcing);
}

TEST_CASE("config errors name the key and line") {
  const auto expect = [](const std::string& text, const std::string& key, int line) {
    try {
      parse_config(text);
      FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(e.key == key);
      CHECK(e.line == line);
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };
  expect("N = 32\ndt = 0\n", "dt", 2);
  expect("dt = -1e-3\n", "dt", 1);
  expect("N = 2\n", "N", 1);
  expect("N = abc\n", "N", 1);
  expect("scheme = bdf3\n", "scheme", 1);
  expect("dt = 0.1\nbogus = 1\n", "bogus", 2);
  expect("dt = 0.1\ndt = 0.2\n", "dt", 2);
  expect("t_end = 1e-4\n", "t_end", 0);
  expect("initial_condition = example9\n", "initial_condition", 1);
  expect("species.1.z = 1\nspecies.1.D = 1\nspecies.3.z = 1\nspecies.3.D = 1\n", "species.2", 0);
  expect("species.1.z = 1\n", "species.1", 0);
  expect("initial_condition = snapshot\n", "snapshot_dir", 0);
  expect("initial_condition = example3\nspecies.1.z = 1\nspecies.1.D = 1\n", "species", 0);
  CHECK_THROWS_AS(parse_config("just words\n"), ConfigError);
}

TEST_CASE("run writes artifacts, and identical configs give identical output") {
  RunConfig cfg = parse_config("scheme = bdf2-mrpc\nN = 10\ndt = 0.01\nt_end = 0.05\nsnapshot_every = 2\n");
  const fs::path a = scratch("run-a"), b = scratch("run-b");
  cfg.output_dir = a;
  const RunResult ra = run(cfg);
  cfg.output_dir = b;
  const RunResult rb = run(cfg);
  REQUIRE(ra.exit_code == 0);
  REQUIRE(ra.errors.has_value());
  CHECK(ra.final_state.step == 5);
  CHECK(ra.rows.size() == 6);
  CHECK(fs::exists(a / "snapshots" / "step_000002" / "u_x.txt"));
  CHECK(fs::exists(a / "snapshots" / "step_000005" / "c_2.txt"));
  CHECK(slurp(a / "timeseries.csv") == slurp(b / "timeseries.csv"));
  CHECK(slurp(a / "snapshots" / "step_000005" / "u_x.txt") == slurp(b / "snapshots" / "step_000005" / "u_x.txt"));

  const auto j = nlohmann::json::parse(slurp(a / "summary.json"));
  CHECK(j["scheme"] == "bdf2-mrpc");
  CHECK(j["steps"] == 5);
  CHECK(j["exit_code"] == 0);
  CHECK(j["final"]["mass"].size() == 2);
  CHECK(j["errors"].contains("u"));
  CHECK(j["timing"]["elliptic_seconds"].get<double>() >= 0.0);
  CHECK_FALSE(fs::exists(a / "failure.json"));
}

TEST_CASE("snapshot restart reproduces the state it was written from") {
  RunConfig cfg = parse_config("scheme = bdf1\ninitial_condition = example2\nN = 12\ndt = 0.05\nt_end = 0.1\n");
  const fs::path a = scratch("restart-a");
  cfg.output_dir = a;
  const RunResult ra = run(cfg);
  REQUIRE(ra.exit_code == 0);

  RunConfig rc = parse_config(
      "scheme = bdf1\ninitial_condition = snapshot\nN = 12\ndt = 0.05\nt_end = 0.05\nnu = 0.01\n"
      "snapshot_dir = " + (a / "snapshots" / "step_000002").string() + "\n"
      "species.1.z = 1\nspecies.1.D = 1\nspecies.2.z = -1\nspecies.2.D = 1\n");
  const Discretization d = Discretization::make(12);
  const NsnppState s = initial_state(rc, d);
  CHECK((s.u.x - ra.final_state.u.x).max_abs() == 0.0);
  CHECK((s.c[1] - ra.final_state.c[1]).max_abs() == 0.0);
  rc.snapshot_dir = a / "nope";
  CHECK_THROWS(initial_state(rc, d));
}

TEST_CASE("invariant failure produces exit code 1 and a failure report") {
  // c0 just above the floor E_npp(0) + c0 = 1: the first dissipative step crosses it.
  RunConfig cfg = parse_config("initial_condition = example2\nN = 8\ndt = 0.1\nt_end = 0.2\n");
  const Discretization d = Discretization::make(8);
  const NsnppState s0 = initial_state(cfg, d);
  cfg.model.physics.c0 = 1.0 - energy_npp(s0.c, s0.phi_bar, cfg.model.species, *d.rule) + 1e-9;
  cfg.output_dir = scratch("fail");
  const RunResult r = run(cfg);
  CHECK(r.exit_code == 1);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->invariant == "sav_shift");
  CHECK(r.failure->step == 1);
  const auto j = nlohmann::json::parse(slurp(cfg.output_dir / "failure.json"));
  CHECK(j["invariant"] == "sav_shift");
  CHECK(j["step"] == 1);
}

TEST_CASE("convergence driver tabulates a dt sweep") {
  RunConfig cfg = parse_config("scheme = bdf1\nN = 12\nt_end = 0.1\n");
  cfg.output_dir = scratch("conv");
  const ConvergenceResult res = convergence(cfg, parse_sweep("dt=0.02,0.01"));
  REQUIRE(res.exit_code == 0);
  CHECK(res.table.rows.size() == 2);
  CHECK(res.table.columns.front() == "u");
  CHECK(fs::exists(cfg.output_dir / "convergence.csv"));
  CHECK_THROWS_AS(parse_sweep("dt"), ConfigError);
  CHECK_THROWS_AS(parse_sweep("T=1,2"), ConfigError);
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  std::ofstream(dir / "bad.cfg") << "N = 16\ndt = 0\n";
  std::ofstream(dir / "ok.cfg") << "scheme = bdf1\nN = 8\ndt = 0.05\nt_end = 0.1\n";
  CHECK(cli("run " + (dir / "bad.cfg").string()) == 2);
  CHECK(cli("run " + (dir / "missing.cfg").string()) == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run " + (dir / "ok.cfg").string() + " --quiet --output-dir " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "summary.json"));
  CHECK(cli("verify-mms example2") == 2);
  CHECK(cli("verify-mms example1 --quiet") == 0);
  CHECK(cli("convergence " + (dir / "ok.cfg").string() + " --quiet --sweep N=6,8 --output-dir " +
            (dir / "conv").string()) == 0);
}
