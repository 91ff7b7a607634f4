#include "nsnpp/elliptic.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

namespace nsnpp {

const char* to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::dirichlet: return "dirichlet";
    case BoundaryKind::neumann: return "neumann";
    case BoundaryKind::pressure: return "pressure";
  }
  return "unknown";
}

Matrix trial_basis_coefficients(BoundaryKind kind, int degree) {
  const int n = degree;
  switch (kind) {
    case BoundaryKind::dirichlet: {
      Matrix c = Matrix::Zero(n + 1, n - 1);
      for (int k = 0; k <= n - 2; ++k) {
        c(k, k) = 1.0;
        c(k + 2, k) = -1.0;
      }
      return c;
    }
    case BoundaryKind::neumann: {
      Matrix c = Matrix::Zero(n + 1, n + 1);
      for (int k = 0; k <= n - 2; ++k) {
        c(k, k) = 1.0;
        c(k + 2, k) = -static_cast<double>(k) * (k + 1) / ((k + 2.0) * (k + 3.0));
      }
      c(n - 1, n - 1) = 1.0;
      c(n, n) = 1.0;
      return c;
    }
    case BoundaryKind::pressure: {
      Matrix c = Matrix::Zero(n + 1, n - 1);
      for (int k = 0; k <= n - 2; ++k) c(k, k) = 1.0;
      return c;
    }
  }
  throw std::invalid_argument("trial_basis_coefficients: unknown boundary kind");
}

EllipticOperator::EllipticOperator(double alpha, double beta, BoundaryKind kind, RulePtr rule)
    : alpha_(alpha), beta_(beta), kind_(kind), rule_(std::move(rule)) {
  if (!rule_) throw std::invalid_argument("EllipticOperator: null quadrature rule");
  if (!(beta > 0.0 || (beta == 0.0 && alpha > 0.0)) || alpha < 0.0) {
    std::ostringstream os;
    os << "EllipticOperator: need beta > 0 or (beta = 0 and alpha > 0), alpha >= 0; got alpha=" << alpha
       << " beta=" << beta;
    throw std::invalid_argument(os.str());
  }
  const int n = rule_->degree;
  if (n < 2 || (kind == BoundaryKind::pressure && n < 3)) {
    throw std::invalid_argument(std::string("EllipticOperator: degree too small for ") + to_string(kind));
  }

  const Matrix coeffs = trial_basis_coefficients(kind, n);
  basis_ = rule_->vandermonde * coeffs;
  basis_dx_ = rule_->diff * basis_;
  const auto w = rule_->weights.asDiagonal();
  mass_ = basis_.transpose() * w * basis_;
  stiffness_ = basis_dx_.transpose() * w * basis_dx_;
  mass_ = 0.5 * (mass_ + mass_.transpose());
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose());

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(stiffness_, mass_);
  if (eig.info() != Eigen::Success) {
    Eigen::LLT<Matrix> llt(mass_);
    std::ostringstream os;
    os << "EllipticOperator: generalized eigendecomposition failed (kind=" << to_string(kind) << ", N=" << n
       << ", mass Cholesky " << (llt.info() == Eigen::Success ? "ok" : "failed: mass matrix not SPD") << ")";
    throw EllipticSetupError(os.str());
  }
  eigenvalues_ = eig.eigenvalues();
  const Matrix& v = eig.eigenvectors();
  to_nodal_ = basis_ * v;
  load_ = w * to_nodal_;
  load_dx_ = w * (basis_dx_ * v);

  const Eigen::Index dim = eigenvalues_.size();
  if (alpha_ == 0.0 && kind_ != BoundaryKind::dirichlet) {
    Eigen::Index k0 = 0;
    eigenvalues_.cwiseAbs().minCoeff(&k0);
    singular_index_ = static_cast<int>(k0);
    eigenvalues_[k0] = 0.0;
  }
  inv_denominator_.resize(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double den = alpha_ + beta_ * (eigenvalues_[i] + eigenvalues_[j]);
      inv_denominator_(i, j) = (i == singular_index_ && j == singular_index_) ? 0.0 : 1.0 / den;
    }
  }
}

SolveResult EllipticOperator::finish(Matrix load) const {
  SolveResult out;
  if (singular_index_ >= 0) {
    const double norm = load.norm();
    const double c = load(singular_index_, singular_index_);
    out.discarded_load = norm > 0.0 ? std::abs(c) / norm : 0.0;
  }
  const Matrix coeffs = load.cwiseProduct(inv_denominator_);
  out.solution = Field2D(rule_->degree, to_nodal_ * coeffs * to_nodal_.transpose());
  if (singular_index_ >= 0) {
    // Mode zeroing already enforces (u, 1)_N = 0; remove the rounding residue.
    const double mean = discrete_mean(out.solution, *rule_);
    out.solution.values().array() -= mean;
  }
  return out;
}

SolveResult EllipticOperator::solve(const Field2D& source) const {
  check_degree(source, *rule_, "EllipticOperator::solve");
  return finish(load_.transpose() * source.values() * load_);
}

SolveResult EllipticOperator::solve_flux(const VectorField2D& flux) const {
  check_degree(flux.x, *rule_, "EllipticOperator::solve_flux");
  return finish(load_dx_.transpose() * flux.x.values() * load_ + load_.transpose() * flux.y.values() * load_dx_);
}

Matrix EllipticOperator::weak_residual(const Field2D& u, const Field2D* source, const VectorField2D* flux) const {
  check_degree(u, *rule_, "EllipticOperator::weak_residual");
  const auto w = rule_->weights.asDiagonal();
  const Matrix wb = w * basis_;
  const Matrix wdb = w * basis_dx_;
  const Matrix ux = rule_->diff * u.values();
  const Matrix uy = u.values() * rule_->diff.transpose();
  Matrix r = alpha_ * (wb.transpose() * u.values() * wb) +
             beta_ * (wdb.transpose() * ux * wb + wb.transpose() * uy * wdb);
  if (source) r -= wb.transpose() * source->values() * wb;
  if (flux) r -= wdb.transpose() * flux->x.values() * wb + wb.transpose() * flux->y.values() * wdb;
  return r;
}

}  // namespace nsnpp
