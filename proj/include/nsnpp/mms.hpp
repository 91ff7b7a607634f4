#pragma once

// Closed-form test cases. With G = cos(pi x) cos(pi y):
//   example1  u = sin^2 t U, p = sin^2 t P, c_{1,2} = 1.1 +- sin^2 t G,
//             phi = sin^2 t G / pi^2, z = (1, -1), D = 1, eps = 1, nu = 0.1
//   example2  initial data only: u = U, c_{1,2} = 1.1 +- G, nu = 0.01
//   example3  u = e^-t U, p = e^-t P, c = e^-t (2 + G, 6 - 2G, 2 - G),
//             phi = e^-t G / pi^2, z = (1, -1, 2), D = 1, eps = 0.5, nu = 0.1
// where U = (pi sin(2 pi y) sin^2(pi x), -pi sin(2 pi x) sin^2(pi y)) and
// P = sin(pi x) sin(pi y).

#include "nsnpp/model.hpp"
#include "nsnpp/schemes.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace nsnpp {

enum class CaseId { example1, example2, example3 };

const char* to_string(CaseId id);
/// Throws std::invalid_argument for unknown names.
CaseId parse_case(const std::string& name);

using ScalarFn = std::function<double(double x, double y, double t)>;
using VectorFn = std::function<std::array<double, 2>(double x, double y, double t)>;

struct ManufacturedCase {
  CaseId id = CaseId::example1;
  Model model;
  bool has_exact = true;    // false for example2 (initial data only)
  bool has_forcing = true;

  VectorFn u;
  ScalarFn p;
  std::vector<ScalarFn> c;
  ScalarFn phi;

  VectorFn f_u;
  std::vector<ScalarFn> f_sigma;
  std::vector<ScalarFn> f_c;
};

ManufacturedCase make_case(CaseId id);

struct ExactFields {
  VectorField2D u;
  Field2D p;
  std::vector<Field2D> c;
  Field2D phi;
};

ExactFields exact_fields(const ManufacturedCase& mc, double t, const QuadratureRule& rule);

/// Nodal forcing at time t. Throws std::invalid_argument for forcing-free cases.
ForcingTerms forcing(const ManufacturedCase& mc, double t, const QuadratureRule& rule);

/// Forcing callback for advance(); empty for forcing-free cases.
ForcingFn forcing_fn(const ManufacturedCase& mc, RulePtr rule);

InitialCondition initial_condition(const ManufacturedCase& mc, const QuadratureRule& rule, double t0 = 0.0);

struct ResidualReport {
  double momentum = 0.0;     // max |du/dt + (u.grad)u - nu Lap u + grad p + rho grad phi - f_u|
  double continuity = 0.0;   // max |div u|
  double sigma = 0.0;        // max over species of the log-concentration equation residual
  double concentration = 0.0;  // max over species of the concentration equation residual with f_c
  double poisson = 0.0;      // max |-eps Lap phi - rho|
  double boundary = 0.0;     // max of |u|, |dc/dn|, |dphi/dn| on the boundary
};

/// Residuals of the governing equations for the exact closures, with
/// spectral differentiation on `fine` and 6th-order central differences in t.
ResidualReport residual_oracle(const ManufacturedCase& mc, double t, const QuadratureRule& fine, double h = 1e-3);

}  // namespace nsnpp
