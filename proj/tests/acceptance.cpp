#include "nsnpp/driver.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace nsnpp;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Tally {
  int failed = 0;
  double min_c = 1e300;

  void report(int id, bool ok, const std::string& what, const std::string& detail) {
    if (!ok) ++failed;
    std::printf("[%s] criterion %d: %s | %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
    std::fflush(stdout);
  }

  void note(const RunResult& r) { min_c = std::min(min_c, r.min_concentration); }
};

Tally tally;

void detail(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void detail(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::fputs("    ", stdout);
  std::vprintf(fmt, ap);
  std::fputc('\n', stdout);
  va_end(ap);
  std::fflush(stdout);
}

RunResult run_case(CaseId id, const std::string& scheme, int n, double dt, double t_end) {
  RunConfig cfg = default_config(id);
  cfg.scheme = SchemeVariant::parse(scheme);
  cfg.degree = n;
  cfg.dt = dt;
  cfg.t_end = t_end;
  RunOptions o;
  o.write_files = false;
  RunResult r = run(cfg, o);
  tally.note(r);
  if (r.failure) detail("%s %s N=%d dt=%g: %s", to_string(id), scheme.c_str(), n, dt, r.failure->message.c_str());
  return r;
}

bool within(double value, double ref, double rel) { return std::abs(value - ref) <= rel * std::abs(ref); }

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.4e", v);
  return b;
}

// Table runs: example1, N = 64, T = 1
const std::vector<double> kTableDt = {1e-1, 1e-2, 1e-3, 1e-4};

std::map<std::string, std::vector<FieldErrors>> table_runs() {
  std::map<std::string, std::vector<FieldErrors>> out;
  for (const std::string scheme : {"bdf2-mrpc", "bdf2-rpc"}) {
    for (double dt : kTableDt) {
      const auto t0 = Clock::now();
      const RunResult r = run_case(CaseId::example1, scheme, 64, dt, 1.0);
      FieldErrors e;
      if (r.exit_code == 0 && r.errors) {
        e = *r.errors;
      } else {
        e.u = e.p = INFINITY;
      }
      detail("%s dt=%g  u %s  p %s  (%.0fs)", scheme.c_str(), dt, fmt(e.u).c_str(), fmt(e.p).c_str(), seconds_since(t0));
      out[scheme].push_back(e);
    }
  }
  return out;
}

void criterion1(const std::vector<FieldErrors>& mrpc) {
  const double ref_u[] = {1.26935e-2, 9.90649e-5, 9.92952e-7};
  const double ref_p[] = {5.33894e-2, 2.57952e-4, 2.34164e-6};
  bool ok = true;
  std::ostringstream d;
  for (int k = 0; k < 3; ++k) {
    const double ru = mrpc[k].u / ref_u[k], rp = mrpc[k].p / ref_p[k];
    ok = ok && within(mrpc[k].u, ref_u[k], 0.10) && within(mrpc[k].p, ref_p[k], 0.10);
    d << "dt=" << kTableDt[k] << " u/ref=" << ru << " p/ref=" << rp << "; ";
  }
  const double r4 = mrpc[3].u / 9.93e-9;
  ok = ok && std::abs(std::log10(r4)) <= 0.5;
  d << "dt=1e-4 u/ref=" << r4 << " (order of magnitude)";
  tally.report(1, ok, "bdf2-mrpc errors, example1 N=64 T=1, within 10% of reference", d.str());
}

void criterion2(const std::vector<FieldErrors>& rpc, const std::vector<FieldErrors>& mrpc) {
  const double ref_u[] = {1.26768e-2, 9.92445e-5, 9.92721e-7};
  bool ok = true;
  std::ostringstream d;
  for (int k = 0; k < 3; ++k) {
    ok = ok && within(rpc[k].u, ref_u[k], 0.10);
    d << "dt=" << kTableDt[k] << " u/ref=" << rpc[k].u / ref_u[k] << "; ";
  }
  for (std::size_t k = 0; k < kTableDt.size(); ++k) {
    const double gap = std::abs(rpc[k].u - mrpc[k].u) / mrpc[k].u;
    ok = ok && gap <= 0.02;
    d << "dt=" << kTableDt[k] << " |rpc-mrpc|/mrpc=" << gap << "; ";
  }
  tally.report(2, ok, "bdf2-rpc velocity within 10% of reference, variants agree within 2%", d.str());
}

void criterion3() {
  const std::vector<double> dts = {6.25e-4, 3.125e-4, 1.5625e-4, 7.8125e-5};
  bool ok = true;
  double worst = 0.0;
  std::string worst_at;
  for (CaseId id : {CaseId::example1, CaseId::example3}) {
    for (const std::string scheme : {"bdf1", "bdf2-rpc", "bdf2-mrpc"}) {
      const double target = scheme == "bdf1" ? 1.0 : 2.0;
      std::vector<std::vector<double>> errs;
      bool complete = true;
      for (double dt : dts) {
        const RunResult r = run_case(id, scheme, 48, dt, 0.5);
        if (r.exit_code != 0 || !r.errors) {
          complete = false;
          break;
        }
        errs.push_back(r.errors->flat());
      }
      if (!complete) {
        ok = false;
        continue;
      }
      const auto names = FieldErrors::names(static_cast<int>(errs[0].size()) - 3);
      std::ostringstream line;
      line << to_string(id) << " " << scheme << ":";
      for (std::size_t v = 0; v < names.size(); ++v) {
        std::vector<double> e;
        for (const auto& row : errs) e.push_back(row[v]);
        line << " " << names[v];
        for (double rate : consecutive_rates(dts, e)) {
          char b[16];
          std::snprintf(b, sizeof b, " %.3f", rate);
          line << b;
          const double dev = std::abs(rate - target);
          if (dev > 0.1) ok = false;
          if (dev > worst) {
            worst = dev;
            worst_at = std::string(to_string(id)) + " " + scheme + " " + names[v];
          }
        }
      }
      detail("%s", line.str().c_str());
    }
  }
  tally.report(3, ok, "consecutive time rates 1.0+-0.1 (bdf1), 2.0+-0.1 (bdf2), N=48 T=0.5, dt 6.25e-4/2^k",
               "worst deviation " + std::to_string(worst) + " at " + worst_at);
}

void criterion4() {
  const std::vector<int> ns = {8, 12, 16, 20};
  std::vector<std::vector<double>> errs;
  bool ok = true;
  for (int n : ns) {
    const RunResult r = run_case(CaseId::example1, "bdf2-rpc", n, 1e-4, 0.1);
    if (r.exit_code != 0 || !r.errors) {
      ok = false;
      break;
    }
    errs.push_back(r.errors->flat());
  }
  std::ostringstream d;
  if (ok) {
    const auto names = FieldErrors::names(static_cast<int>(errs[0].size()) - 3);
    for (std::size_t v = 0; v < names.size(); ++v) {
      std::ostringstream line;
      line << names[v] << ":";
      for (std::size_t k = 0; k < ns.size(); ++k) {
        line << " " << fmt(errs[k][v]);
        if (k > 0 && !(errs[k][v] <= errs[k - 1][v] * (1 + 1e-6))) ok = false;
      }
      const double drop = errs.front()[v] / errs.back()[v];
      if (!(drop >= 1e3)) ok = false;
      detail("%s  drop %.2e", line.str().c_str(), drop);
      d << names[v] << " drop " << fmt(drop) << "; ";
    }
  }
  tally.report(4, ok, "bdf2-rpc errors at N=8,12,16,20 decrease and drop >= 1e3 (example1, dt=1e-4, T=0.1)", d.str());
}

std::vector<RunResult> example2_runs;

void criterion5() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::ostringstream d;
  for (const std::string scheme : {"bdf1", "bdf2-mrpc"}) {
    for (double dt : {1e-3, 1e-2, 1e-1, 5e-1}) {
      const long steps = std::max(100L, std::lround(1.0 / dt));
      const RunResult r = run_case(CaseId::example2, scheme, 64, dt, steps * dt);
      const bool good = r.exit_code == 0 && r.final_state.step == steps && r.energy_monotone;
      ok = ok && good;
      detail("%s dt=%g: %ld/%ld steps, energy monotone %s", scheme.c_str(), dt, r.final_state.step, steps,
             r.energy_monotone ? "yes" : "no");
      if (!good) d << scheme << " dt=" << dt << " failed; ";
      example2_runs.push_back(r);
    }
  }
  const double wall = seconds_since(t0);
  ok = ok && wall <= 180.0;
  d << "wall " << std::lround(wall) << "s";
  tally.report(5, ok, "example2 N=64: scheme energy non-increasing every step, max(100,1/dt) steps, <= 3 min",
               d.str());
}

void criterion6() {
  example2_runs.push_back(run_case(CaseId::example2, "bdf2-rpc", 64, 1e-3, 1.0));
  bool ok = true;
  double worst = 0.0;
  for (const RunResult& r : example2_runs) worst = std::max(worst, r.max_mass_drift);
  ok = worst <= 1e-12;
  // full-length runs of every scheme at dt = 1e-3
  for (std::size_t k : {std::size_t{0}, std::size_t{4}, example2_runs.size() - 1}) {
    ok = ok && example2_runs[k].exit_code == 0;
  }
  tally.report(6, ok, "example2 per-species mass constant to 1e-12 relative, every scheme",
               "max relative drift " + fmt(worst));
}

void criterion7() {
  tally.report(7, tally.min_c > 0.0, "minimum nodal concentration positive at every step of every run",
               "min c = " + fmt(tally.min_c));
}

void criterion8() {
  const auto t0 = Clock::now();
  bool ok = true;
  for (const char* suite : {"spectral", "elliptic", "schemes", "mms"}) {
    const std::string cmd =
        std::string(NSNPP_TESTS) + " --source-file=*test_" + suite + ".cpp --minimal >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const bool pass = WIFEXITED(status) && WEXITSTATUS(status) == 0;
    detail("oracle suite %s: %s", suite, pass ? "ok" : "failed");
    ok = ok && pass;
  }
  const double wall = seconds_since(t0);
  ok = ok && wall <= 30.0;
  tally.report(8, ok, "oracle suites (dense elliptic, xi solve, manufactured residuals, quadrature) pass in <= 30 s",
               "wall " + std::to_string(wall) + "s");
}

void criterion9() {
  Model m;
  m.physics = {1.0, 0.1, 100.0};
  m.species = {{1.0, 1.0}, {-1.0, 1.0}};
  const int n = 16;
  const Discretization d = Discretization::make(n);
  InitialCondition ic;
  ic.u = VectorField2D(n);
  ic.c = {Field2D::constant(n, 1.0), Field2D::constant(n, 1.0)};
  double worst = 0.0;
  for (const std::string scheme : {"bdf1", "bdf2-rpc", "bdf2-mrpc"}) {
    const SchemeContext ctx(d, m, 1.0, SchemeVariant::parse(scheme));
    NsnppState s = init_state(ic, m, d);
    for (int k = 0; k < 100; ++k) s = advance(s, ctx);
    worst = std::max({worst, s.u.max_abs(), s.p.max_abs(), s.phi.max_abs()});
    for (const auto& c : s.c) worst = std::max(worst, (c - Field2D::constant(n, 1.0)).max_abs());
  }
  tally.report(9, worst <= 1e-12, "uniform neutral rest state invariant over 100 steps at dt=1, every scheme",
               "max deviation " + fmt(worst));
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  try {
    const auto table = table_runs();
    criterion1(table.at("bdf2-mrpc"));
    criterion2(table.at("bdf2-rpc"), table.at("bdf2-mrpc"));
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 9 criteria failed (%.0fs)\n", tally.failed, seconds_since(t0));
  return tally.failed == 0 ? 0 : 1;
}
