#include "nsnpp/mms.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsnpp {

namespace {

constexpr double kPi = std::numbers::pi;

using TimeFn = std::function<double(double)>;

// c = a(t) + b(t) G
struct SpeciesProfile {
  TimeFn a, da, b, db;
};

struct Profile {
  TimeFn vel, dvel;  // factor of U and P
  TimeFn pot;        // phi = pot(t) G / pi^2
  std::vector<SpeciesProfile> species;
};

double shape_g(double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); }

std::array<double, 2> shape_grad_g(double x, double y) {
  return {-kPi * std::sin(kPi * x) * std::cos(kPi * y), -kPi * std::cos(kPi * x) * std::sin(kPi * y)};
}

std::array<double, 2> shape_u(double x, double y) {
  const double sx = std::sin(kPi * x);
  const double sy = std::sin(kPi * y);
  return {kPi * std::sin(2 * kPi * y) * sx * sx, -kPi * std::sin(2 * kPi * x) * sy * sy};
}

// rows: component, cols: d/dx, d/dy
std::array<std::array<double, 2>, 2> shape_grad_u(double x, double y) {
  const double sx = std::sin(kPi * x);
  const double sy = std::sin(kPi * y);
  const double s2x = std::sin(2 * kPi * x);
  const double s2y = std::sin(2 * kPi * y);
  const double pi2 = kPi * kPi;
  return {{{pi2 * s2y * s2x, 2 * pi2 * std::cos(2 * kPi * y) * sx * sx},
           {-2 * pi2 * std::cos(2 * kPi * x) * sy * sy, -pi2 * s2x * s2y}}};
}

std::array<double, 2> shape_lap_u(double x, double y) {
  const double pi3 = kPi * kPi * kPi;
  return {2 * pi3 * std::sin(2 * kPi * y) * (2 * std::cos(2 * kPi * x) - 1),
          -2 * pi3 * std::sin(2 * kPi * x) * (2 * std::cos(2 * kPi * y) - 1)};
}

double shape_p(double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); }

std::array<double, 2> shape_grad_p(double x, double y) {
  return {kPi * std::cos(kPi * x) * std::sin(kPi * y), kPi * std::sin(kPi * x) * std::cos(kPi * y)};
}

Profile profile_for(CaseId id) {
  Profile pr;
  const auto zero = [](double) { return 0.0; };
  const auto constant = [](double v) { return [v](double) { return v; }; };
  switch (id) {
    case CaseId::example1: {
      const TimeFn s2 = [](double t) { return std::sin(t) * std::sin(t); };
      const TimeFn ds2 = [](double t) { return std::sin(2 * t); };
      pr.vel = s2;
      pr.dvel = ds2;
      pr.pot = s2;
      pr.species = {{constant(1.1), zero, s2, ds2},
                    {constant(1.1), zero, [](double t) { return -std::sin(t) * std::sin(t); },
                     [](double t) { return -std::sin(2 * t); }}};
      break;
    }
    case CaseId::example2: {
      pr.vel = constant(1.0);
      pr.dvel = zero;
      pr.pot = zero;
      pr.species = {{constant(1.1), zero, constant(1.0), zero}, {constant(1.1), zero, constant(-1.0), zero}};
      break;
    }
    case CaseId::example3: {
      const auto scaled = [](double k) { return [k](double t) { return k * std::exp(-t); }; };
      pr.vel = scaled(1.0);
      pr.dvel = scaled(-1.0);
      pr.pot = scaled(1.0);
      pr.species = {{scaled(2.0), scaled(-2.0), scaled(1.0), scaled(-1.0)},
                    {scaled(6.0), scaled(-6.0), scaled(-2.0), scaled(2.0)},
                    {scaled(2.0), scaled(-2.0), scaled(-1.0), scaled(1.0)}};
      break;
    }
  }
  return pr;
}

Model model_for(CaseId id) {
  Model m;
  m.physics.c0 = 100.0;
  switch (id) {
    case CaseId::example1:
      m.physics.eps = 1.0;
      m.physics.nu = 0.1;
      m.species = {{1.0, 1.0}, {-1.0, 1.0}};
      break;
    case CaseId::example2:
      m.physics.eps = 1.0;
      m.physics.nu = 0.01;
      m.species = {{1.0, 1.0}, {-1.0, 1.0}};
      break;
    case CaseId::example3:
      m.physics.eps = 0.5;
      m.physics.nu = 0.1;
      m.species = {{1.0, 1.0}, {-1.0, 1.0}, {2.0, 1.0}};
      break;
  }
  return m;
}

double fd6(const std::function<double(double)>& f, double t, double h) {
  return (-f(t - 3 * h) + 9 * f(t - 2 * h) - 45 * f(t - h) + 45 * f(t + h) - 9 * f(t + 2 * h) + f(t + 3 * h)) /
         (60 * h);
}

Field2D sample_t(const QuadratureRule& rule, const ScalarFn& f, double t) {
  return Field2D::sample(rule, [&](double x, double y) { return f(x, y, t); });
}

VectorField2D sample_t(const QuadratureRule& rule, const VectorFn& f, double t) {
  return VectorField2D(Field2D::sample(rule, [&](double x, double y) { return f(x, y, t)[0]; }),
                       Field2D::sample(rule, [&](double x, double y) { return f(x, y, t)[1]; }));
}

Field2D time_derivative(const QuadratureRule& rule, const ScalarFn& f, double t, double h) {
  return Field2D::sample(rule, [&](double x, double y) { return fd6([&](double s) { return f(x, y, s); }, t, h); });
}

}  // namespace

const char* to_string(CaseId id) {
  switch (id) {
    case CaseId::example1: return "example1";
    case CaseId::example2: return "example2";
    case CaseId::example3: return "example3";
  }
  return "unknown";
}

CaseId parse_case(const std::string& name) {
  if (name == "example1") return CaseId::example1;
  if (name == "example2") return CaseId::example2;
  if (name == "example3") return CaseId::example3;
  throw std::invalid_argument("unknown case '" + name + "' (expected example1, example2 or example3)");
}

ManufacturedCase make_case(CaseId id) {
  ManufacturedCase mc;
  mc.id = id;
  mc.model = model_for(id);
  mc.has_exact = id != CaseId::example2;
  mc.has_forcing = mc.has_exact;
  const Profile pr = profile_for(id);
  const double nu = mc.model.physics.nu;

  mc.u = [pr](double x, double y, double t) {
    const auto u = shape_u(x, y);
    const double v = pr.vel(t);
    return std::array<double, 2>{v * u[0], v * u[1]};
  };
  mc.p = [pr](double x, double y, double t) { return pr.vel(t) * shape_p(x, y); };
  mc.phi = [pr](double x, double y, double t) { return pr.pot(t) * shape_g(x, y) / (kPi * kPi); };
  for (const auto& sp : pr.species) {
    mc.c.push_back([sp](double x, double y, double t) { return sp.a(t) + sp.b(t) * shape_g(x, y); });
  }
  if (!mc.has_forcing) return mc;

  const SpeciesParams species = mc.model.species;
  mc.f_u = [pr, nu, species](double x, double y, double t) {
    const double v = pr.vel(t);
    const double dv = pr.dvel(t);
    const auto u = shape_u(x, y);
    const auto gu = shape_grad_u(x, y);
    const auto lu = shape_lap_u(x, y);
    const auto gp = shape_grad_p(x, y);
    const auto gg = shape_grad_g(x, y);
    const double g = shape_g(x, y);
    double rho = 0.0;
    for (std::size_t i = 0; i < species.size(); ++i) {
      rho += species[i].valence * (pr.species[i].a(t) + pr.species[i].b(t) * g);
    }
    const double s = pr.pot(t) / (kPi * kPi);
    std::array<double, 2> f{};
    for (int k = 0; k < 2; ++k) {
      const double conv = u[0] * gu[k][0] + u[1] * gu[k][1];
      f[k] = dv * u[k] + v * v * conv - nu * v * lu[k] + v * gp[k] + rho * s * gg[k];
    }
    return f;
  };
  for (std::size_t i = 0; i < pr.species.size(); ++i) {
    const SpeciesProfile sp = pr.species[i];
    const Species par = species[i];
    const auto f_sigma = [pr, sp, par](double x, double y, double t) {
      const double g = shape_g(x, y);
      const auto gg = shape_grad_g(x, y);
      const auto u = shape_u(x, y);
      const double a = sp.a(t), b = sp.b(t), s = pr.pot(t);
      const double c = a + b * g;
      const double pi2 = kPi * kPi;
      const double dt_sigma = (sp.da(t) + sp.db(t) * g) / c;
      // Lap sigma + |grad sigma|^2 = Lap c / c
      const double diffusion = -2 * pi2 * b * g / c;
      const double grad2 = gg[0] * gg[0] + gg[1] * gg[1];
      const double drift = b * s * grad2 / (pi2 * c) - 2 * s * g;
      const double transport = pr.vel(t) * b * (u[0] * gg[0] + u[1] * gg[1]) / c;
      return dt_sigma - par.diffusivity * (diffusion + par.valence * drift) + transport;
    };
    mc.f_sigma.push_back(f_sigma);
    mc.f_c.push_back([sp, f_sigma](double x, double y, double t) {
      return (sp.a(t) + sp.b(t) * shape_g(x, y)) * f_sigma(x, y, t);
    });
  }
  return mc;
}

ExactFields exact_fields(const ManufacturedCase& mc, double t, const QuadratureRule& rule) {
  if (!mc.has_exact && t != 0.0) {
    throw std::invalid_argument(std::string("exact_fields: ") + to_string(mc.id) + " has no exact solution for t > 0");
  }
  ExactFields ex;
  ex.u = sample_t(rule, mc.u, t);
  ex.p = sample_t(rule, mc.p, t);
  ex.phi = sample_t(rule, mc.phi, t);
  for (const auto& ci : mc.c) ex.c.push_back(sample_t(rule, ci, t));
  return ex;
}

ForcingTerms forcing(const ManufacturedCase& mc, double t, const QuadratureRule& rule) {
  if (!mc.has_forcing) throw std::invalid_argument(std::string("forcing: ") + to_string(mc.id) + " is forcing-free");
  ForcingTerms f;
  f.f_u = sample_t(rule, mc.f_u, t);
  for (const auto& fs : mc.f_sigma) f.f_sigma.push_back(sample_t(rule, fs, t));
  for (const auto& fc : mc.f_c) f.f_c.push_back(sample_t(rule, fc, t));
  return f;
}

ForcingFn forcing_fn(const ManufacturedCase& mc, RulePtr rule) {
  if (!mc.has_forcing) return {};
  return [mc, rule](double t) { return forcing(mc, t, *rule); };
}

InitialCondition initial_condition(const ManufacturedCase& mc, const QuadratureRule& rule, double t0) {
  InitialCondition ic;
  ic.t0 = t0;
  ic.u = sample_t(rule, mc.u, t0);
  for (const auto& ci : mc.c) ic.c.push_back(sample_t(rule, ci, t0));
  return ic;
}

ResidualReport residual_oracle(const ManufacturedCase& mc, double t, const QuadratureRule& fine, double h) {
  if (!mc.has_exact) {
    throw std::invalid_argument(std::string("residual_oracle: ") + to_string(mc.id) + " has no exact solution");
  }
  const QuadratureRule& r = fine;
  const Model& model = mc.model;
  const double nu = model.physics.nu;
  const double eps = model.physics.eps;
  ResidualReport rep;

  const VectorField2D u = sample_t(r, mc.u, t);
  const Field2D p = sample_t(r, mc.p, t);
  const Field2D phi = sample_t(r, mc.phi, t);
  std::vector<Field2D> c;
  for (const auto& ci : mc.c) c.push_back(sample_t(r, ci, t));
  const Field2D rho = charge_density(c, model.species);
  const VectorField2D gphi = gradient(phi, r);
  const Field2D lphi = laplacian(phi, r);

  const VectorField2D dudt(time_derivative(r, [&](double x, double y, double s) { return mc.u(x, y, s)[0]; }, t, h),
                           time_derivative(r, [&](double x, double y, double s) { return mc.u(x, y, s)[1]; }, t, h));
  VectorField2D mom = dudt + convect(u, r) + gradient(p, r) - sample_t(r, mc.f_u, t);
  mom.x += rho.times(gphi.x) - nu * laplacian(u.x, r);
  mom.y += rho.times(gphi.y) - nu * laplacian(u.y, r);
  rep.momentum = mom.max_abs();
  rep.continuity = divergence(u, r).max_abs();
  rep.poisson = (-eps * lphi - rho).max_abs();

  for (std::size_t i = 0; i < c.size(); ++i) {
    const Species& sp = model.species[i];
    const ScalarFn& cf = mc.c[i];
    const Field2D sigma = c[i].map([](double v) { return std::log(v); });
    const Field2D dsig = time_derivative(r, [&](double x, double y, double s) { return std::log(cf(x, y, s)); }, t, h);
    const VectorField2D gs = gradient(sigma, r);
    const Field2D inner = laplacian(sigma, r) + gs.x.times(gs.x) + gs.y.times(gs.y) +
                          sp.valence * (gs.x.times(gphi.x) + gs.y.times(gphi.y) + lphi);
    const Field2D res_s = dsig - sp.diffusivity * inner +
                          divergence(VectorField2D(sigma.times(u.x), sigma.times(u.y)), r) -
                          sample_t(r, mc.f_sigma[i], t);
    rep.sigma = std::max(rep.sigma, res_s.max_abs());

    const Field2D dc = time_derivative(r, cf, t, h);
    const VectorField2D gc = gradient(c[i], r);
    const VectorField2D flux(gc.x + sp.valence * c[i].times(gphi.x), gc.y + sp.valence * c[i].times(gphi.y));
    const Field2D res_c = dc - sp.diffusivity * divergence(flux, r) +
                          divergence(VectorField2D(c[i].times(u.x), c[i].times(u.y)), r) -
                          sample_t(r, mc.f_c[i], t);
    rep.concentration = std::max(rep.concentration, res_c.max_abs());

    const int n = r.degree;
    for (int k = 0; k <= n; ++k) {
      rep.boundary = std::max({rep.boundary, std::abs(gc.x(0, k)), std::abs(gc.x(n, k)), std::abs(gc.y(k, 0)),
                               std::abs(gc.y(k, n))});
    }
  }
  const int n = r.degree;
  for (int k = 0; k <= n; ++k) {
    rep.boundary = std::max({rep.boundary, std::abs(gphi.x(0, k)), std::abs(gphi.x(n, k)), std::abs(gphi.y(k, 0)),
                             std::abs(gphi.y(k, n))});
    for (const Field2D* comp : {&u.x, &u.y}) {
      rep.boundary = std::max({rep.boundary, std::abs((*comp)(0, k)), std::abs((*comp)(n, k)),
                               std::abs((*comp)(k, 0)), std::abs((*comp)(k, n))});
    }
  }
  return rep;
}

}  // namespace nsnpp
