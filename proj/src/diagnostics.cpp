#include "nsnpp/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace nsnpp {

const char* to_string(EnergyForm form) {
  switch (form) {
    case EnergyForm::bdf1: return "bdf1";
    case EnergyForm::rpc: return "rpc";
    case EnergyForm::mrpc: return "mrpc";
  }
  return "unknown";
}

namespace {

double grad_norm2(const Field2D& f, const QuadratureRule& rule) {
  const VectorField2D g = gradient(f, rule);
  return discrete_inner(g, g, rule);
}

}  // namespace

double discrete_energy(const NsnppState& s, EnergyForm form, double dt, double nu, const QuadratureRule& rule) {
  const double u2 = discrete_inner(s.u, s.u, rule);
  if (form == EnergyForm::bdf1 || !s.has_previous) {
    return u2 + dt * dt * grad_norm2(s.p, rule) + 2.0 * s.r * s.r;
  }
  const VectorField2D extrap = 2.0 * s.u - s.u_prev;
  const double r2 = 2.0 * s.r - s.r_prev;
  double e = 0.5 * u2 + 0.5 * discrete_inner(extrap, extrap, rule) + s.r * s.r + r2 * r2;
  if (form == EnergyForm::mrpc) {
    e += 2.0 / 3.0 * dt * dt * grad_norm2(s.p_bar, rule);
  } else {
    e += 2.0 / 3.0 * dt * dt * grad_norm2(s.p + nu * s.omega, rule);
    e += nu * dt * discrete_inner(s.omega, s.omega, rule);
  }
  return e;
}

EnergyReport energy_report(const NsnppState& s, const Model& model, const QuadratureRule& rule) {
  EnergyReport rep;
  rep.e_ns = kinetic_energy(s.u, rule);
  rep.e_npp = energy_npp(s.c, s.phi_bar, model.species, rule);
  rep.e_total = rep.e_ns + rep.e_npp;
  rep.mu = chemical_potentials(s.c, s.phi_bar, model.species);
  rep.dissipation = dissipation_terms(s.c, rep.mu, model.species, rule);
  return rep;
}

double l2_error(const Field2D& f, const Field2D& exact, const QuadratureRule& rule) {
  return discrete_norm(f - exact, rule);
}

double l2_error(const VectorField2D& f, const VectorField2D& exact, const QuadratureRule& rule) {
  return discrete_norm(f - exact, rule);
}

double discrete_divergence(const VectorField2D& u, const EllipticOperator& pressure) {
  const QuadratureRule& rule = pressure.rule();
  const auto w = rule.weights.asDiagonal();
  const Matrix wb = w * pressure.basis();
  const Matrix wdb = w * pressure.basis_dx();
  const Matrix load = wdb.transpose() * u.x.values() * wb + wb.transpose() * u.y.values() * wdb;
  return load.cwiseAbs().maxCoeff() / std::max(1.0, discrete_norm(u, rule));
}

std::vector<double> consecutive_rates(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size()) throw std::invalid_argument("consecutive_rates: size mismatch");
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    out.push_back(std::log(e[k] / e[k + 1]) / std::log(h[k] / h[k + 1]));
  }
  return out;
}

namespace {

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

double least_squares_rate(const std::vector<double>& h, const std::vector<double>& e) {
  if (h.size() != e.size() || h.size() < 2) throw std::invalid_argument("least_squares_rate: need >= 2 points");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < h.size(); ++k) {
    x.push_back(std::log(h[k]));
    y.push_back(std::log(e[k]));
  }
  return fit_slope(x, y);
}

double exponential_decay_rate(const std::vector<double>& n, const std::vector<double>& e) {
  if (n.size() != e.size() || n.size() < 2) throw std::invalid_argument("exponential_decay_rate: need >= 2 points");
  std::vector<double> y;
  for (double v : e) y.push_back(std::log(v));
  return -fit_slope(n, y);
}

std::vector<double> ConvergenceTable::consecutive_rates(std::size_t column) const {
  std::vector<double> h, e;
  for (const auto& row : rows) {
    h.push_back(row.h);
    e.push_back(row.errors.at(column));
  }
  return nsnpp::consecutive_rates(h, e);
}

}  // namespace nsnpp
