#pragma once

// Legendre-Gauss-Lobatto machinery on the reference square (-1,1)^2.
//
// Grid layout: a Field2D of degree N stores (N+1)x(N+1) nodal values with
// values(i, j) = f(x_i, y_j). Storage is column-major, so the x-index i is
// the fastest-varying index in memory. Snapshot files and every flat
// traversal in this project follow that order.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

namespace nsnpp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class DegreeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One-dimensional LGL rule of degree N: N+1 nodes including both endpoints.
struct QuadratureRule {
  int degree = 0;
  Vector nodes;    // ascending, nodes[0] = -1, nodes[N] = +1
  Vector weights;  // positive, sum to 2
  Matrix diff;     // first-derivative collocation matrix
  Matrix diff2;    // diff * diff
  Matrix vandermonde;   // vandermonde(j, k) = L_k(x_j), k = 0..N
  Vector modal_gamma;   // (L_k, L_k)_N: 2/(2k+1) for k < N, 2/N for k = N

  int size() const { return degree + 1; }
};

using RulePtr = std::shared_ptr<const QuadratureRule>;

/// Builds the N+1 point rule. Throws std::invalid_argument for N < 1.
QuadratureRule lgl_rule(int degree);
RulePtr make_rule(int degree);

/// Legendre polynomial L_n(x) and its derivative, by three-term recurrence.
struct LegendreValue {
  double value;
  double derivative;
};
LegendreValue legendre(int n, double x);

/// Vandermonde matrix V(j, k) = L_k(x_j) for k = 0..max_mode.
Matrix legendre_vandermonde(const Vector& nodes, int max_mode);

class Field2D {
 public:
  Field2D() = default;
  explicit Field2D(int degree) : degree_(degree), values_(Matrix::Zero(degree + 1, degree + 1)) {}
  Field2D(int degree, Matrix values);

  static Field2D constant(int degree, double value);
  static Field2D sample(const QuadratureRule& rule, const std::function<double(double, double)>& f);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }

  double operator()(int i, int j) const { return values_(i, j); }
  double& operator()(int i, int j) { return values_(i, j); }

  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }

  double min() const { return values_.minCoeff(); }
  double max() const { return values_.maxCoeff(); }
  double max_abs() const { return values_.cwiseAbs().maxCoeff(); }
  bool all_finite() const { return values_.allFinite(); }

  Field2D& operator+=(const Field2D& o);
  Field2D& operator-=(const Field2D& o);
  Field2D& operator*=(double s);

  friend Field2D operator+(Field2D a, const Field2D& b) { return a += b; }
  friend Field2D operator-(Field2D a, const Field2D& b) { return a -= b; }
  friend Field2D operator*(Field2D a, double s) { return a *= s; }
  friend Field2D operator*(double s, Field2D a) { return a *= s; }
  Field2D operator-() const { return Field2D(degree_, -values_); }

  /// Pointwise (nodal) product and other nodal maps.
  Field2D times(const Field2D& o) const;
  Field2D map(const std::function<double(double)>& f) const;

 private:
  int degree_ = 0;
  Matrix values_;
};

struct VectorField2D {
  Field2D x;
  Field2D y;

  VectorField2D() = default;
  explicit VectorField2D(int degree) : x(degree), y(degree) {}
  VectorField2D(Field2D fx, Field2D fy);

  int degree() const { return x.degree(); }

  VectorField2D& operator+=(const VectorField2D& o);
  VectorField2D& operator-=(const VectorField2D& o);
  VectorField2D& operator*=(double s);
  friend VectorField2D operator+(VectorField2D a, const VectorField2D& b) { return a += b; }
  friend VectorField2D operator-(VectorField2D a, const VectorField2D& b) { return a -= b; }
  friend VectorField2D operator*(VectorField2D a, double s) { return a *= s; }
  friend VectorField2D operator*(double s, VectorField2D a) { return a *= s; }

  double max_abs() const;
  bool all_finite() const { return x.all_finite() && y.all_finite(); }
};

void check_degree(const Field2D& f, const QuadratureRule& rule, const char* what);
void check_degree(const Field2D& f, const Field2D& g, const char* what);

/// (f, g)_N = sum_{j,k} f(x_j, y_k) g(x_j, y_k) w_j w_k
double discrete_inner(const Field2D& f, const Field2D& g, const QuadratureRule& rule);
double discrete_inner(const VectorField2D& f, const VectorField2D& g, const QuadratureRule& rule);
double discrete_norm(const Field2D& f, const QuadratureRule& rule);
double discrete_norm(const VectorField2D& f, const QuadratureRule& rule);
/// (f, 1)_N
double discrete_integral(const Field2D& f, const QuadratureRule& rule);
double discrete_mean(const Field2D& f, const QuadratureRule& rule);

Field2D d_dx(const Field2D& f, const QuadratureRule& rule);
Field2D d_dy(const Field2D& f, const QuadratureRule& rule);
VectorField2D gradient(const Field2D& f, const QuadratureRule& rule);
Field2D laplacian(const Field2D& f, const QuadratureRule& rule);
Field2D divergence(const VectorField2D& v, const QuadratureRule& rule);
/// Scalar curl dv_y/dx - dv_x/dy.
Field2D curl(const VectorField2D& v, const QuadratureRule& rule);
/// Pointwise v . grad(f).
Field2D advect(const VectorField2D& v, const Field2D& f, const QuadratureRule& rule);
/// Pointwise (v . grad) v.
VectorField2D convect(const VectorField2D& v, const QuadratureRule& rule);

/// Tensor Legendre coefficients, coeffs(p, q) multiplies L_p(x) L_q(y).
Matrix to_modal(const Field2D& f, const QuadratureRule& rule);
Field2D to_nodal(const Matrix& coeffs, const QuadratureRule& rule);

/// Discrete L2 projection onto P_{max_mode} x P_{max_mode} under (.,.)_N.
/// LGL quadrature keeps distinct Legendre modes orthogonal, so this is a
/// modal truncation.
Field2D truncate_modes(const Field2D& f, const QuadratureRule& rule, int max_mode);

}  // namespace nsnpp
