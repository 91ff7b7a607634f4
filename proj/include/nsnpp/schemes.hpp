#pragma once

// SAV time steppers. One step:
//   1. sigma_i^{n+1} from a linear Neumann Helmholtz problem per species
//   2. c_i = lambda_i exp(sigma_i), lambda_i fixing the discrete mass
//   3. phi_bar^{n+1} from the Neumann Poisson problem
//   4. two Dirichlet Helmholtz velocity solves (history part, coupling part)
//   5. the scalar xi^{n+1} in closed form, u_tilde = u1 + xi u2
//   6. pressure projection (standard, rotational or modified rotational)

#include "nsnpp/diagnostics.hpp"
#include "nsnpp/elliptic.hpp"
#include "nsnpp/model.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsnpp {

enum class Projection { standard, rotational, modified_rotational };

struct SchemeVariant {
  int order = 1;
  Projection projection = Projection::standard;

  static SchemeVariant bdf1() { return {1, Projection::standard}; }
  static SchemeVariant bdf2_rpc() { return {2, Projection::rotational}; }
  static SchemeVariant bdf2_mrpc() { return {2, Projection::modified_rotational}; }

  /// Throws std::invalid_argument unless (1, standard) or (2, rpc/mrpc).
  void validate() const;
  std::string name() const;  // "bdf1", "bdf2-rpc", "bdf2-mrpc"
  static SchemeVariant parse(const std::string& name);
};

enum class TransportForm { div_sigma_u, u_grad_sigma };
enum class PotentialLaplacian { spectral, poisson_identity };

struct SchemeOptions {
  bool sigma_resync = true;
  TransportForm transport = TransportForm::div_sigma_u;
  PotentialLaplacian potential_laplacian = PotentialLaplacian::spectral;
  bool assert_energy = true;
  bool check_invariants = true;
  double energy_tol = 1e-10;
  double mass_tol = 1e-12;
  double xi_tol = 1e-12;
  double divergence_tol = 1e-10;
  double bound_factor = 10.0;
  double sigma_overflow = 700.0;
};

/// Manufactured sources at one time level; empty vectors mean "absent".
struct ForcingTerms {
  VectorField2D f_u;
  std::vector<Field2D> f_sigma;
  std::vector<Field2D> f_c;  // c_exact * f_sigma, drives mass and r sources
};

using ForcingFn = std::function<ForcingTerms(double t)>;

/// Invariant violation inside a step.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(long step, std::string invariant, double magnitude, const std::string& detail);
  long step;
  std::string invariant;
  double magnitude;
};

struct PhaseTimers {
  double elliptic = 0.0;
  double assembly = 0.0;
  double total = 0.0;
  long steps = 0;
};

class SchemeContext {
 public:
  SchemeContext(Discretization disc, Model model, double dt, SchemeVariant variant, SchemeOptions options = {});

  const Discretization& disc() const { return disc_; }
  const QuadratureRule& rule() const { return *disc_.rule; }
  const Model& model() const { return model_; }
  double dt() const { return dt_; }
  const SchemeVariant& variant() const { return variant_; }
  const SchemeOptions& options() const { return options_; }

  const EllipticOperator& sigma_operator(int order, int species) const;
  const EllipticOperator& velocity_operator(int order) const;

  PhaseTimers& timers() const { return timers_; }

 private:
  Discretization disc_;
  Model model_;
  double dt_;
  SchemeVariant variant_;
  SchemeOptions options_;
  std::array<std::vector<std::shared_ptr<const EllipticOperator>>, 2> sigma_ops_;
  std::array<std::shared_ptr<const EllipticOperator>, 2> velocity_ops_;
  mutable PhaseTimers timers_;
};

inline double bdf_gamma(int order) { return order == 1 ? 1.0 : 1.5; }

/// Order that the next step from this state runs (BDF2 bootstraps with BDF1).
int step_order(const NsnppState& s, const SchemeVariant& v);

std::vector<Field2D> sigma_step(const NsnppState& s, const std::vector<Field2D>* forcing_sigma,
                                const SchemeContext& ctx, int order);

struct RescaleResult {
  std::vector<Field2D> c;
  std::vector<double> lambda;
};

/// c_i = lambda_i exp(sigma_i) with (c_i, 1)_N = target_i. Throws
/// StepFailure("sigma_overflow") when max sigma exceeds the overflow guard.
RescaleResult concentration_rescale(const std::vector<Field2D>& sigma, const std::vector<double>& target_masses,
                                    const QuadratureRule& rule, double overflow = 700.0, long step = 0);

Field2D potential_step(const std::vector<Field2D>& c, const Model& model, const EllipticOperator& poisson);

struct VelocitySubsteps {
  VectorField2D u1;
  VectorField2D u2;
  VectorField2D w;
};

VelocitySubsteps velocity_substeps(const NsnppState& s, const std::vector<Field2D>& c_new, const Field2D& phi_bar_new,
                                   const VectorField2D* forcing_u, const SchemeContext& ctx, int order,
                                   Projection projection);

struct XiInputs {
  int order = 1;
  double dt = 0.0;
  double r_n = 0.0;
  double r_nm1 = 0.0;
  double e_bar = 0.0;        // E_npp at the new level with phi_bar
  double c0 = 0.0;
  double dissipation = 0.0;  // sum_i D_i (c_i, |grad mu_bar_i|^2)_N
  double w_u1 = 0.0;         // (w, u1)_N
  double w_u2 = 0.0;         // (w, u2)_N
  double source = 0.0;       // sum_i (f_c_i, mu_bar_i)_N, zero without forcing
};

struct XiResult {
  double xi = 1.0;
  double r = 0.0;
  double sqrt_e = 0.0;
  double history = 0.0;
  double denominator = 0.0;
};

XiResult compute_xi(const XiInputs& in);

/// Relative residual of gamma r - history - dt/(2S) [(w,u)_N - xi D + F]
/// with (w,u)_N supplied by the caller.
double xi_residual(const XiInputs& in, const XiResult& out, double w_u);

struct ProjectionResult {
  VectorField2D u;
  Field2D p;
  Field2D psi;
  Field2D p_bar;
  Field2D omega;
};

ProjectionResult pressure_projection(const VectorField2D& u_tilde, const NsnppState& s, const SchemeContext& ctx,
                                     int order, Projection projection);

struct StepReport {
  int order = 1;
  Projection projection = Projection::standard;
  EnergyForm form = EnergyForm::bdf1;
  double energy_before = 0.0;
  double energy_after = 0.0;
  bool energy_checked = false;
  std::vector<double> lambda;
  XiResult xi;
  double xi_residual = 0.0;
  double divergence = 0.0;
  double min_c = 0.0;
  double max_mass_error = 0.0;
  double max_discarded_load = 0.0;
  VectorField2D u1;
  VectorField2D u2;
  VectorField2D w;
  Field2D psi;
};

EnergyForm energy_form(int order, Projection projection);

NsnppState advance(const NsnppState& s, const SchemeContext& ctx, const ForcingFn* forcing = nullptr,
                   StepReport* report = nullptr);

}  // namespace nsnpp
