#include "nsnpp/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace nsnpp {

namespace {

constexpr double kNewtonTol = 1e-14;
constexpr int kNewtonMaxIter = 100;

}  // namespace

LegendreValue legendre(int n, double x) {
  if (n == 0) return {1.0, 0.0};
  double p_prev = 1.0;
  double p = x;
  double dp_prev = 0.0;
  double dp = 1.0;
  for (int k = 2; k <= n; ++k) {
    const double p_next = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k;
    // L'_k = L'_{k-2} + (2k-1) L_{k-1}
    const double dp_next = dp_prev + (2 * k - 1) * p;
    p_prev = p;
    p = p_next;
    dp_prev = dp;
    dp = dp_next;
  }
  return {p, dp};
}

Matrix legendre_vandermonde(const Vector& nodes, int max_mode) {
  Matrix v(nodes.size(), max_mode + 1);
  for (Eigen::Index j = 0; j < nodes.size(); ++j) {
    const double x = nodes[j];
    double p_prev = 1.0;
    double p = x;
    v(j, 0) = 1.0;
    if (max_mode >= 1) v(j, 1) = x;
    for (int k = 2; k <= max_mode; ++k) {
      const double p_next = ((2 * k - 1) * x * p - (k - 1) * p_prev) / k;
      p_prev = p;
      p = p_next;
      v(j, k) = p;
    }
  }
  return v;
}

QuadratureRule lgl_rule(int degree) {
  if (degree < 1) {
    throw std::invalid_argument("lgl_rule: degree must be >= 1 (got " + std::to_string(degree) + ")");
  }
  const int n = degree;
  QuadratureRule rule;
  rule.degree = n;
  rule.nodes.resize(n + 1);
  rule.weights.resize(n + 1);

  rule.nodes[0] = -1.0;
  rule.nodes[n] = 1.0;
  const double nn1 = static_cast<double>(n) * (n + 1);
  // Interior nodes: roots of L'_N, Newton from Chebyshev-Gauss-Lobatto seeds.
  for (int j = 1; j < n; ++j) {
    double x = -std::cos(std::numbers::pi * j / n);
    for (int it = 0; it < kNewtonMaxIter; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double d2p = (2.0 * x * dp - nn1 * p) / (1.0 - x * x);
      const double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < kNewtonTol) break;
    }
    rule.nodes[j] = x;
  }
  // Symmetrize; the rule is exactly symmetric about 0.
  for (int j = 0; j <= n / 2; ++j) {
    const double a = 0.5 * (rule.nodes[n - j] - rule.nodes[j]);
    rule.nodes[j] = -a;
    rule.nodes[n - j] = a;
  }
  if (n % 2 == 0) rule.nodes[n / 2] = 0.0;

  Vector ln(n + 1);
  for (int j = 0; j <= n; ++j) {
    ln[j] = legendre(n, rule.nodes[j]).value;
    rule.weights[j] = 2.0 / (nn1 * ln[j] * ln[j]);
  }

  rule.diff = Matrix::Zero(n + 1, n + 1);
  for (int j = 0; j <= n; ++j) {
    double row_sum = 0.0;
    for (int k = 0; k <= n; ++k) {
      if (k == j) continue;
      const double d = ln[j] / (ln[k] * (rule.nodes[j] - rule.nodes[k]));
      rule.diff(j, k) = d;
      row_sum += d;
    }
    rule.diff(j, j) = -row_sum;
  }
  rule.diff2 = rule.diff * rule.diff;

  rule.vandermonde = legendre_vandermonde(rule.nodes, n);
  rule.modal_gamma.resize(n + 1);
  for (int k = 0; k < n; ++k) rule.modal_gamma[k] = 2.0 / (2.0 * k + 1.0);
  rule.modal_gamma[n] = 2.0 / n;
  return rule;
}

RulePtr make_rule(int degree) { return std::make_shared<const QuadratureRule>(lgl_rule(degree)); }

Field2D::Field2D(int degree, Matrix values) : degree_(degree), values_(std::move(values)) {
  if (values_.rows() != degree + 1 || values_.cols() != degree + 1) {
    throw DegreeMismatch("Field2D: value matrix does not match degree " + std::to_string(degree));
  }
}

Field2D Field2D::constant(int degree, double value) {
  return Field2D(degree, Matrix::Constant(degree + 1, degree + 1, value));
}

Field2D Field2D::sample(const QuadratureRule& rule, const std::function<double(double, double)>& f) {
  Field2D out(rule.degree);
  for (int j = 0; j < rule.size(); ++j) {
    for (int i = 0; i < rule.size(); ++i) out(i, j) = f(rule.nodes[i], rule.nodes[j]);
  }
  return out;
}

Field2D& Field2D::operator+=(const Field2D& o) {
  check_degree(*this, o, "Field2D::operator+=");
  values_ += o.values_;
  return *this;
}

Field2D& Field2D::operator-=(const Field2D& o) {
  check_degree(*this, o, "Field2D::operator-=");
  values_ -= o.values_;
  return *this;
}

Field2D& Field2D::operator*=(double s) {
  values_ *= s;
  return *this;
}

Field2D Field2D::times(const Field2D& o) const {
  check_degree(*this, o, "Field2D::times");
  return Field2D(degree_, values_.cwiseProduct(o.values_));
}

Field2D Field2D::map(const std::function<double(double)>& f) const {
  return Field2D(degree_, values_.unaryExpr(f));
}

VectorField2D::VectorField2D(Field2D fx, Field2D fy) : x(std::move(fx)), y(std::move(fy)) {
  check_degree(x, y, "VectorField2D");
}

VectorField2D& VectorField2D::operator+=(const VectorField2D& o) {
  x += o.x;
  y += o.y;
  return *this;
}

VectorField2D& VectorField2D::operator-=(const VectorField2D& o) {
  x -= o.x;
  y -= o.y;
  return *this;
}

VectorField2D& VectorField2D::operator*=(double s) {
  x *= s;
  y *= s;
  return *this;
}

double VectorField2D::max_abs() const { return std::max(x.max_abs(), y.max_abs()); }

void check_degree(const Field2D& f, const QuadratureRule& rule, const char* what) {
  if (f.degree() != rule.degree) {
    std::ostringstream os;
    os << what << ": field degree " << f.degree() << " does not match rule degree " << rule.degree;
    throw DegreeMismatch(os.str());
  }
}

void check_degree(const Field2D& f, const Field2D& g, const char* what) {
  if (f.degree() != g.degree()) {
    std::ostringstream os;
    os << what << ": degree mismatch " << f.degree() << " vs " << g.degree();
    throw DegreeMismatch(os.str());
  }
}

double discrete_inner(const Field2D& f, const Field2D& g, const QuadratureRule& rule) {
  check_degree(f, rule, "discrete_inner");
  check_degree(g, rule, "discrete_inner");
  // w^T (f .* g) w
  return rule.weights.dot(f.values().cwiseProduct(g.values()) * rule.weights);
}

double discrete_inner(const VectorField2D& f, const VectorField2D& g, const QuadratureRule& rule) {
  return discrete_inner(f.x, g.x, rule) + discrete_inner(f.y, g.y, rule);
}

double discrete_norm(const Field2D& f, const QuadratureRule& rule) {
  return std::sqrt(discrete_inner(f, f, rule));
}

double discrete_norm(const VectorField2D& f, const QuadratureRule& rule) {
  return std::sqrt(discrete_inner(f, f, rule));
}

double discrete_integral(const Field2D& f, const QuadratureRule& rule) {
  check_degree(f, rule, "discrete_integral");
  return rule.weights.dot(f.values() * rule.weights);
}

double discrete_mean(const Field2D& f, const QuadratureRule& rule) {
  return 0.25 * discrete_integral(f, rule);
}

Field2D d_dx(const Field2D& f, const QuadratureRule& rule) {
  check_degree(f, rule, "d_dx");
  return Field2D(f.degree(), rule.diff * f.values());
}

Field2D d_dy(const Field2D& f, const QuadratureRule& rule) {
  check_degree(f, rule, "d_dy");
  return Field2D(f.degree(), f.values() * rule.diff.transpose());
}

VectorField2D gradient(const Field2D& f, const QuadratureRule& rule) {
  return VectorField2D(d_dx(f, rule), d_dy(f, rule));
}

Field2D laplacian(const Field2D& f, const QuadratureRule& rule) {
  check_degree(f, rule, "laplacian");
  return Field2D(f.degree(), rule.diff2 * f.values() + f.values() * rule.diff2.transpose());
}

Field2D divergence(const VectorField2D& v, const QuadratureRule& rule) {
  check_degree(v.x, rule, "divergence");
  return Field2D(v.degree(), rule.diff * v.x.values() + v.y.values() * rule.diff.transpose());
}

Field2D curl(const VectorField2D& v, const QuadratureRule& rule) {
  check_degree(v.x, rule, "curl");
  return Field2D(v.degree(), rule.diff * v.y.values() - v.x.values() * rule.diff.transpose());
}

Field2D advect(const VectorField2D& v, const Field2D& f, const QuadratureRule& rule) {
  const Field2D fx = d_dx(f, rule);
  const Field2D fy = d_dy(f, rule);
  return v.x.times(fx) + v.y.times(fy);
}

VectorField2D convect(const VectorField2D& v, const QuadratureRule& rule) {
  return VectorField2D(advect(v, v.x, rule), advect(v, v.y, rule));
}

Matrix to_modal(const Field2D& f, const QuadratureRule& rule) {
  check_degree(f, rule, "to_modal");
  // c_k = (f, L_k)_N / gamma_k along each direction
  const Matrix proj = rule.weights.asDiagonal() * rule.vandermonde;
  Matrix c = proj.transpose() * f.values() * proj;
  const Vector inv_gamma = rule.modal_gamma.cwiseInverse();
  return inv_gamma.asDiagonal() * c * inv_gamma.asDiagonal();
}

Field2D to_nodal(const Matrix& coeffs, const QuadratureRule& rule) {
  if (coeffs.rows() != rule.size() || coeffs.cols() != rule.size()) {
    throw DegreeMismatch("to_nodal: coefficient array does not match rule degree");
  }
  return Field2D(rule.degree, rule.vandermonde * coeffs * rule.vandermonde.transpose());
}

Field2D truncate_modes(const Field2D& f, const QuadratureRule& rule, int max_mode) {
  Matrix c = to_modal(f, rule);
  for (int q = 0; q < c.cols(); ++q) {
    for (int p = 0; p < c.rows(); ++p) {
      if (p > max_mode || q > max_mode) c(p, q) = 0.0;
    }
  }
  return to_nodal(c, rule);
}

}  // namespace nsnpp
