#include "nsnpp/model.hpp"

#include <cmath>
#include <sstream>

namespace nsnpp {

void Model::validate() const {
  if (!(physics.eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  if (!(physics.nu > 0.0)) throw std::invalid_argument("nu must be > 0");
  if (!(physics.c0 > 0.0)) throw std::invalid_argument("c0 must be > 0");
  if (species.empty()) throw std::invalid_argument("at least one species is required");
  for (std::size_t i = 0; i < species.size(); ++i) {
    if (!(species[i].diffusivity > 0.0)) {
      throw std::invalid_argument("species." + std::to_string(i + 1) + ".D must be > 0");
    }
    if (!std::isfinite(species[i].valence)) {
      throw std::invalid_argument("species." + std::to_string(i + 1) + ".z must be finite");
    }
  }
}

namespace {

std::string positivity_message(int species, int i, int j, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "positivity violation: species " << species + 1 << " at node (" << i << ", " << j << ") has value "
     << value;
  return os.str();
}

}  // namespace

PositivityError::PositivityError(int s, int i, int j, double v)
    : std::runtime_error(positivity_message(s, i, j, v)), species(s), node_i(i), node_j(j), value(v) {}

Discretization Discretization::make(int degree) {
  Discretization d;
  d.rule = make_rule(degree);
  d.poisson = std::make_shared<const EllipticOperator>(0.0, 1.0, BoundaryKind::neumann, d.rule);
  d.pressure = std::make_shared<const EllipticOperator>(0.0, 1.0, BoundaryKind::pressure, d.rule);
  return d;
}

void require_positive(const std::vector<Field2D>& c) {
  for (std::size_t s = 0; s < c.size(); ++s) {
    const Matrix& v = c[s].values();
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        if (!(v(i, j) > 0.0)) {
          throw PositivityError(static_cast<int>(s), static_cast<int>(i), static_cast<int>(j), v(i, j));
        }
      }
    }
  }
}

Field2D charge_density(const std::vector<Field2D>& c, const SpeciesParams& species) {
  if (c.size() != species.size()) throw std::invalid_argument("charge_density: species count mismatch");
  Field2D rho(c.front().degree());
  for (std::size_t i = 0; i < c.size(); ++i) rho.values() += species[i].valence * c[i].values();
  return rho;
}

double energy_npp(const std::vector<Field2D>& c, const Field2D& phi_bar, const SpeciesParams& species,
                  const QuadratureRule& rule) {
  require_positive(c);
  Matrix density = 0.5 * charge_density(c, species).values().cwiseProduct(phi_bar.values());
  for (const auto& ci : c) {
    density.array() += ci.values().array() * (ci.values().array().log() - 1.0);
  }
  return discrete_integral(Field2D(phi_bar.degree(), std::move(density)), rule);
}

std::vector<Field2D> chemical_potentials(const std::vector<Field2D>& c, const Field2D& phi_bar,
                                         const SpeciesParams& species) {
  require_positive(c);
  std::vector<Field2D> mu;
  mu.reserve(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    Matrix m = c[i].values().array().log().matrix() + species[i].valence * phi_bar.values();
    mu.emplace_back(phi_bar.degree(), std::move(m));
  }
  return mu;
}

std::vector<double> dissipation_terms(const std::vector<Field2D>& c, const std::vector<Field2D>& mu,
                                      const SpeciesParams& species, const QuadratureRule& rule) {
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const VectorField2D g = gradient(mu[i], rule);
    const Field2D g2 = g.x.times(g.x) + g.y.times(g.y);
    out[i] = species[i].diffusivity * discrete_inner(c[i], g2, rule);
  }
  return out;
}

double kinetic_energy(const VectorField2D& u, const QuadratureRule& rule) {
  return 0.5 * discrete_inner(u, u, rule);
}

NsnppState init_state(const InitialCondition& ic, const Model& model, const Discretization& disc,
                      const VectorField2D* momentum_source) {
  model.validate();
  const QuadratureRule& rule = *disc.rule;
  const int n = rule.degree;
  if (static_cast<int>(ic.c.size()) != model.species_count()) {
    throw std::invalid_argument("init_state: initial condition has " + std::to_string(ic.c.size()) +
                                " species, model has " + std::to_string(model.species_count()));
  }
  check_degree(ic.u.x, rule, "init_state");
  for (const auto& ci : ic.c) check_degree(ci, rule, "init_state");
  require_positive(ic.c);

  double boundary_u = 0.0;
  for (int k = 0; k <= n; ++k) {
    for (const Field2D* comp : {&ic.u.x, &ic.u.y}) {
      boundary_u = std::max({boundary_u, std::abs((*comp)(0, k)), std::abs((*comp)(n, k)),
                             std::abs((*comp)(k, 0)), std::abs((*comp)(k, n))});
    }
  }
  if (ic.strong_boundary && boundary_u > 1e-10) {
    std::ostringstream os;
    os << "init_state: initial velocity does not vanish on the boundary (max |u| = " << boundary_u << ")";
    throw std::invalid_argument(os.str());
  }

  NsnppState s;
  s.t = ic.t0;
  s.step = 0;
  s.u = ic.u;
  s.c = ic.c;
  s.sigma.reserve(s.c.size());
  for (const auto& ci : s.c) s.sigma.push_back(ci.map([](double v) { return std::log(v); }));

  const Field2D rho = charge_density(s.c, model.species);
  s.phi_bar = disc.poisson->solve(rho).solution * (1.0 / model.physics.eps);
  s.phi = s.phi_bar;

  const double e = energy_npp(s.c, s.phi_bar, model.species, rule);
  if (e + model.physics.c0 < 1.0) {
    std::ostringstream os;
    os << "init_state: E_npp + c0 = " << e + model.physics.c0 << " < 1; increase c0";
    throw std::invalid_argument(os.str());
  }
  s.r = std::sqrt(e + model.physics.c0);
  s.xi = 1.0;

  // (grad p, grad q)_N = (nu Lap u - (u.grad)u - rho grad phi + f, grad q)_N
  const VectorField2D grad_phi = gradient(s.phi, rule);
  VectorField2D flux = convect(s.u, rule) * -1.0;
  flux.x -= rho.times(grad_phi.x);
  flux.y -= rho.times(grad_phi.y);
  flux.x += model.physics.nu * laplacian(s.u.x, rule);
  flux.y += model.physics.nu * laplacian(s.u.y, rule);
  if (momentum_source) flux += *momentum_source;
  s.p = disc.pressure->solve_flux(flux).solution;

  s.u_tilde = s.u;
  s.p_bar = s.p;
  s.omega = Field2D(n);
  s.initial_mass.reserve(s.c.size());
  for (const auto& ci : s.c) s.initial_mass.push_back(discrete_integral(ci, rule));
  s.mass = s.initial_mass;
  s.mass_prev = s.initial_mass;
  s.sigma_unsynced = s.sigma;
  return s;
}

}  // namespace nsnpp
