#pragma once

#include "nsnpp/elliptic.hpp"
#include "nsnpp/model.hpp"

#include <string>
#include <vector>

namespace nsnpp {

/// Which modified-energy functional to evaluate.
///   bdf1  ||u||^2 + dt^2 ||grad p||^2 + 2 r^2
///   rpc   1/2||u||^2 + 1/2||2u - u_prev||^2 + 2/3 dt^2 ||grad(p + nu omega)||^2
///         + nu dt ||omega||^2 + r^2 + (2r - r_prev)^2
/// The r weights are the ones the r-equation's 1/(2 sqrt(E+c0)) factor
/// balances against the velocity terms (r^2 = E_npp + c0, E_ns = ||u||^2/2).
///   mrpc  same as rpc with p_bar in the gradient term and no omega term
enum class EnergyForm { bdf1, rpc, mrpc };

const char* to_string(EnergyForm form);

/// Falls back to the bdf1 functional when the state carries no n-1 level.
double discrete_energy(const NsnppState& s, EnergyForm form, double dt, double nu, const QuadratureRule& rule);

/// Physical energies (kinetic, electrochemical, total) plus dissipation.
EnergyReport energy_report(const NsnppState& s, const Model& model, const QuadratureRule& rule);

double l2_error(const Field2D& f, const Field2D& exact, const QuadratureRule& rule);
double l2_error(const VectorField2D& f, const VectorField2D& exact, const QuadratureRule& rule);

/// max_q |(u, grad q)_N| over the pressure trial basis, normalized by
/// max(1, ||u||_N). The projected velocity should make this ~ roundoff.
double discrete_divergence(const VectorField2D& u, const EllipticOperator& pressure);

struct ConvergenceRow {
  double h = 0.0;  // dt or N
  std::vector<double> errors;
};

struct ConvergenceTable {
  std::string parameter;  // "dt" or "N"
  std::vector<std::string> columns;
  std::vector<ConvergenceRow> rows;

  /// Consecutive-pair orders log(e_k/e_{k+1})/log(h_k/h_{k+1}) for one column.
  std::vector<double> consecutive_rates(std::size_t column) const;
};

/// Least-squares slope of log(e) against log(h).
double least_squares_rate(const std::vector<double>& h, const std::vector<double>& e);
std::vector<double> consecutive_rates(const std::vector<double>& h, const std::vector<double>& e);

/// Fit of log(e) = a - b N (spectral decay); returns b.
double exponential_decay_rate(const std::vector<double>& n, const std::vector<double>& e);

}  // namespace nsnpp
