#include "dense_oracle.hpp"
#include "nsnpp/mms.hpp"
#include "nsnpp/schemes.hpp"

#include "doctest.h"

#include <cmath>

using namespace nsnpp;

namespace {

double scaled(const Field2D& a, const Field2D& b) { return (a - b).max_abs() / std::max(1.0, b.max_abs()); }

struct Setup {
  ManufacturedCase mc;
  Discretization disc;
  NsnppState s;
};

Setup example3_state(int n) {
  Setup st{make_case(CaseId::example3), Discretization::make(n), {}};
  const ForcingTerms f0 = forcing(st.mc, 0.0, *st.disc.rule);
  st.s = init_state(initial_condition(st.mc, *st.disc.rule), st.mc.model, st.disc, &f0.f_u);
  return st;
}

SchemeOptions loose() {
  SchemeOptions o;
  o.check_invariants = false;
  return o;
}

Field2D sigma_rhs(const NsnppState& s, const Model& m, const QuadratureRule& r, double dt, int i,
                  const Field2D& f_sigma) {
  const VectorField2D gs = gradient(s.sigma[i], r);
  const VectorField2D gp = gradient(s.phi, r);
  const Species& sp = m.species[i];
  Field2D out = (1.0 / dt) * s.sigma[i] + f_sigma;
  out += sp.diffusivity * (gs.x.times(gs.x) + gs.y.times(gs.y) +
                           sp.valence * (gs.x.times(gp.x) + gs.y.times(gp.y) + laplacian(s.phi, r)));
  out -= d_dx(s.sigma[i].times(s.u.x), r) + d_dy(s.sigma[i].times(s.u.y), r);
  return out;
}

}  // namespace

TEST_CASE("scheme variants parse and validate") {
  CHECK(SchemeVariant::parse("bdf2-mrpc").projection == Projection::modified_rotational);
  CHECK(SchemeVariant::parse("bdf1").name() == "bdf1");
  CHECK_THROWS_AS(SchemeVariant::parse("bdf3"), std::invalid_argument);
  CHECK_THROWS(SchemeVariant({1, Projection::rotational}).validate());
  CHECK_THROWS(SchemeVariant({2, Projection::standard}).validate());
}

TEST_CASE("BDF1 sigma step matches a dense Neumann Helmholtz solve") {
  for (int n : {6, 8}) {
    Setup st = example3_state(n);
    const double dt = 0.05;
    const SchemeContext ctx(st.disc, st.mc.model, dt, SchemeVariant::bdf1(), loose());
    const ForcingTerms f = forcing(st.mc, dt, *st.disc.rule);
    const auto sigma = sigma_step(st.s, &f.f_sigma, ctx, 1);
    for (int i = 0; i < 3; ++i) {
      const Field2D rhs = sigma_rhs(st.s, st.mc.model, *st.disc.rule, dt, i, f.f_sigma[i]);
      const Field2D dense = oracle::dense_solve(1.0 / dt, st.mc.model.species[i].diffusivity,
                                                BoundaryKind::neumann, *st.disc.rule, &rhs, nullptr);
      INFO("N=" << n << " species " << i + 1);
      CHECK(scaled(sigma[i], dense) <= 1e-11);
    }
  }
}

TEST_CASE("velocity substeps and projection match dense solves") {
  const int n = 8;
  Setup st = example3_state(n);
  const double dt = 0.02;
  const double nu = st.mc.model.physics.nu;
  const SchemeContext ctx(st.disc, st.mc.model, dt, SchemeVariant::bdf1(), loose());
  const QuadratureRule& r = *st.disc.rule;
  const ForcingTerms f = forcing(st.mc, dt, r);
  const Field2D phi_bar = potential_step(st.s.c, st.mc.model, *st.disc.poisson);
  const VelocitySubsteps sub = velocity_substeps(st.s, st.s.c, phi_bar, &f.f_u, ctx, 1, Projection::standard);

  const VectorField2D f1 = (1.0 / dt) * st.s.u - gradient(st.s.p, r) + f.f_u;
  CHECK(scaled(sub.u1.x, oracle::dense_solve(1.0 / dt, nu, BoundaryKind::dirichlet, r, &f1.x, nullptr)) <= 1e-11);
  CHECK(scaled(sub.u1.y, oracle::dense_solve(1.0 / dt, nu, BoundaryKind::dirichlet, r, &f1.y, nullptr)) <= 1e-11);

  const Field2D rho = charge_density(st.s.c, st.mc.model.species);
  VectorField2D w = convect(st.s.u, r);
  const VectorField2D gphi = gradient(phi_bar, r);
  w.x += rho.times(gphi.x);
  w.y += rho.times(gphi.y);
  CHECK((sub.w - w).max_abs() < 1e-12);
  const Field2D mwx = -w.x, mwy = -w.y;
  CHECK(scaled(sub.u2.x, oracle::dense_solve(1.0 / dt, nu, BoundaryKind::dirichlet, r, &mwx, nullptr)) <= 1e-11);
  CHECK(scaled(sub.u2.y, oracle::dense_solve(1.0 / dt, nu, BoundaryKind::dirichlet, r, &mwy, nullptr)) <= 1e-11);

  const VectorField2D u_tilde = sub.u1 + 0.97 * sub.u2;
  for (Projection proj : {Projection::standard, Projection::rotational, Projection::modified_rotational}) {
    const ProjectionResult pr = pressure_projection(u_tilde, st.s, ctx, 1, proj);
    const Field2D psi = (1.0 / dt) * oracle::dense_solve(0.0, 1.0, BoundaryKind::pressure, r, nullptr, &u_tilde);
    CHECK(scaled(pr.psi, psi) <= 1e-11);
    CHECK(discrete_divergence(pr.u, *st.disc.pressure) < 1e-12);
    // u_tilde - u is a gradient, so the projected field is (.,.)_N-orthogonal to it
    CHECK(std::abs(discrete_inner(pr.u, u_tilde - pr.u, r)) < 1e-10 * discrete_inner(u_tilde, u_tilde, r));
  }
}

TEST_CASE("xi closed form equals an independent 2x2 linear solve") {
  XiInputs in;
  for (int order : {1, 2}) {
    for (double src : {0.0, 3.7}) {
      in.order = order;
      in.dt = 0.013;
      in.r_n = 10.3;
      in.r_nm1 = 10.1;
      in.e_bar = 4.2;
      in.c0 = 100.0;
      in.dissipation = 17.5;
      in.w_u1 = -2.25;
      in.w_u2 = -0.8;
      in.source = src;
      const XiResult x = compute_xi(in);
      // unknowns (r, xi): gamma r + k(xi D - xi (w,u2)) = hist + k((w,u1) + F);  r - xi S = 0
      const double sq = std::sqrt(in.e_bar + in.c0);
      const double k = in.dt / (2 * sq);
      const double gamma = order == 1 ? 1.0 : 1.5;
      const double hist = order == 1 ? in.r_n : 2 * in.r_n - 0.5 * in.r_nm1;
      const oracle::Dense a = {{gamma, k * (in.dissipation - in.w_u2)}, {1.0, -sq}};
      const auto sol = oracle::gauss_solve(a, {hist + k * (in.w_u1 + in.source), 0.0});
      CHECK(std::abs(x.r - sol[0]) <= 1e-12 * std::abs(sol[0]));
      CHECK(std::abs(x.xi - sol[1]) <= 1e-12 * std::abs(sol[1]));
      CHECK(xi_residual(in, x, in.w_u1 + x.xi * in.w_u2) <= 1e-14);
    }
  }
}

TEST_CASE("concentration rescale: exact mass, trivial cases, overflow guard") {
  const QuadratureRule r = lgl_rule(6);
  const std::vector<Field2D> zero = {Field2D(6), Field2D::constant(6, std::log(2.0))};
  const RescaleResult res = concentration_rescale(zero, {4.0, 4.0}, r);
  CHECK(res.lambda[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(res.lambda[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK((res.c[1] - Field2D::constant(6, 1.0)).max_abs() < 1e-15);

  Field2D wavy = Field2D::sample(r, [](double x, double y) { return std::sin(3 * x) * y; });
  const RescaleResult w = concentration_rescale({wavy}, {1.7}, r);
  CHECK(discrete_integral(w.c[0], r) == doctest::Approx(1.7).epsilon(1e-15));
  CHECK(w.c[0].min() > 0.0);

  Field2D hot = Field2D::constant(6, 1.0);
  hot(3, 3) = 750.0;
  try {
    concentration_rescale({hot}, {1.0}, r, 700.0, 42);
    FAIL("expected StepFailure");
  } catch (const StepFailure& e) {
    CHECK(e.invariant == "sigma_overflow");
    CHECK(e.step == 42);
    CHECK(e.magnitude == 750.0);
  }
  CHECK_THROWS_AS(concentration_rescale({wavy}, {0.0}, r), std::invalid_argument);
}

TEST_CASE("uniform neutral rest state is a fixed point of every scheme") {
  Model m;
  m.physics = {1.0, 0.1, 100.0};
  m.species = {{1.0, 1.0}, {-1.0, 1.0}};
  const Discretization d = Discretization::make(8);
  InitialCondition ic;
  ic.u = VectorField2D(8);
  ic.c = {Field2D::constant(8, 1.0), Field2D::constant(8, 1.0)};
  for (SchemeVariant v : {SchemeVariant::bdf1(), SchemeVariant::bdf2_rpc(), SchemeVariant::bdf2_mrpc()}) {
    const SchemeContext ctx(d, m, 1.0, v);
    NsnppState s = init_state(ic, m, d);
    const double r0 = s.r;
    for (int k = 0; k < 100; ++k) s = advance(s, ctx);
    INFO(v.name());
    CHECK(s.u.max_abs() <= 1e-12);
    CHECK(s.p.max_abs() <= 1e-12);
    CHECK(s.phi.max_abs() <= 1e-12);
    for (const auto& c : s.c) CHECK((c - Field2D::constant(8, 1.0)).max_abs() <= 1e-12);
    CHECK(std::abs(s.r - r0) <= 1e-12 * r0);
    CHECK(std::abs(s.xi - 1.0) <= 1e-12);
  }
}

TEST_CASE("forcing-free steps dissipate the scheme energy and keep mass") {
  const ManufacturedCase mc = make_case(CaseId::example2);
  const Discretization d = Discretization::make(16);
  for (SchemeVariant v : {SchemeVariant::bdf1(), SchemeVariant::bdf2_mrpc(), SchemeVariant::bdf2_rpc()}) {
    SchemeOptions o;
    o.assert_energy = v.projection != Projection::rotational;
    const SchemeContext ctx(d, mc.model, 0.01, v, o);
    NsnppState s = init_state(initial_condition(mc, *d.rule), mc.model, d);
    const std::vector<double> m0 = s.mass;
    for (int k = 0; k < 10; ++k) {
      StepReport rep;
      s = advance(s, ctx, nullptr, &rep);
      INFO(v.name() << " step " << k + 1);
      if (o.assert_energy) CHECK(rep.energy_after <= rep.energy_before * (1 + 1e-10));
      CHECK(rep.min_c > 0.0);
      CHECK(rep.divergence < 1e-10);
      for (int i = 0; i < 2; ++i) CHECK(std::abs(discrete_integral(s.c[i], *d.rule) - m0[i]) <= 1e-12 * m0[i]);
    }
    CHECK(s.has_previous);
  }
}

TEST_CASE("second step of a BDF2 scheme runs at second order") {
  const ManufacturedCase mc = make_case(CaseId::example2);
  const Discretization d = Discretization::make(8);
  const SchemeContext ctx(d, mc.model, 0.1, SchemeVariant::bdf2_mrpc());
  NsnppState s = init_state(initial_condition(mc, *d.rule), mc.model, d);
  StepReport rep;
  s = advance(s, ctx, nullptr, &rep);
  CHECK(rep.order == 1);
  CHECK(rep.form == EnergyForm::bdf1);
  s = advance(s, ctx, nullptr, &rep);
  CHECK(rep.order == 2);
  CHECK(rep.form == EnergyForm::mrpc);
  CHECK(rep.projection == Projection::modified_rotational);
}
