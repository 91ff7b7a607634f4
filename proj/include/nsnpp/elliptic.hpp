#pragma once

// Fast-diagonalization solvers for (alpha u, v)_N + beta (grad u, grad v)_N
// = <rhs, v> on the square, with a tensor-product trial space.
//
// Trial spaces per direction:
//   dirichlet  span{L_k - L_{k+2}, k <= N-2}                  (= P_N with u(+-1) = 0)
//   neumann    span{L_k - k(k+1)/((k+2)(k+3)) L_{k+2}, k <= N-2} + {L_{N-1}, L_N}
//              (= all of P_N; the Neumann condition is natural)
//   pressure   span{L_k, k <= N-2}                            (= P_{N-2})
//
// The 1D mass and stiffness matrices are assembled with the LGL quadrature
// and simultaneously diagonalized (S V = M V Lambda, V^T M V = I). A 2D solve
// is then four dense products plus a pointwise division.

#include "nsnpp/spectral.hpp"

#include <stdexcept>

namespace nsnpp {

enum class BoundaryKind { dirichlet, neumann, pressure };

const char* to_string(BoundaryKind kind);

class EllipticSetupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveResult {
  Field2D solution;
  /// Magnitude of the constant-mode load that was discarded for singular
  /// (alpha = 0) Neumann/pressure problems, relative to the load norm.
  double discarded_load = 0.0;
};

class EllipticOperator {
 public:
  EllipticOperator(double alpha, double beta, BoundaryKind kind, RulePtr rule);

  /// Right-hand side (f, v)_N for a nodal source f.
  SolveResult solve(const Field2D& source) const;
  /// Right-hand side (g, grad v)_N for a nodal vector flux g.
  SolveResult solve_flux(const VectorField2D& flux) const;

  /// Weak residual a(u, v) - (f, v)_N - (g, grad v)_N over every trial pair
  /// (dim x dim), computed by direct quadrature; independent of the solver.
  Matrix weak_residual(const Field2D& u, const Field2D* source, const VectorField2D* flux) const;

  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  BoundaryKind kind() const { return kind_; }
  bool singular() const { return singular_index_ >= 0; }
  int trial_dim() const { return static_cast<int>(basis_.cols()); }
  const QuadratureRule& rule() const { return *rule_; }
  const RulePtr& rule_ptr() const { return rule_; }

  const Matrix& basis() const { return basis_; }          // nodal values, (N+1) x dim
  const Matrix& basis_dx() const { return basis_dx_; }
  const Matrix& mass() const { return mass_; }
  const Matrix& stiffness() const { return stiffness_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

 private:
  SolveResult finish(Matrix load) const;

  double alpha_;
  double beta_;
  BoundaryKind kind_;
  RulePtr rule_;

  Matrix basis_;
  Matrix basis_dx_;
  Matrix mass_;
  Matrix stiffness_;
  Vector eigenvalues_;
  Matrix to_nodal_;     // basis * V
  Matrix load_;         // W * basis * V
  Matrix load_dx_;      // W * basis_dx * V
  Matrix inv_denominator_;
  int singular_index_ = -1;
};

/// Legendre coefficients (columns) of the 1D trial basis for a boundary kind.
Matrix trial_basis_coefficients(BoundaryKind kind, int degree);

}  // namespace nsnpp
