#pragma once

#include "nsnpp/elliptic.hpp"
#include "nsnpp/spectral.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsnpp {

struct Species {
  double valence = 0.0;      // z_i
  double diffusivity = 1.0;  // D_i
};

using SpeciesParams = std::vector<Species>;

struct PhysicsParams {
  double eps = 1.0;   // squared Debye length ratio
  double nu = 1.0;    // kinematic viscosity
  double c0 = 100.0;  // shift keeping E_npp + c0 >= 1
};

struct Model {
  PhysicsParams physics;
  SpeciesParams species;

  int species_count() const { return static_cast<int>(species.size()); }
  /// Throws std::invalid_argument naming the offending parameter.
  void validate() const;
};

/// A nodal concentration that is not strictly positive.
class PositivityError : public std::runtime_error {
 public:
  PositivityError(int species, int i, int j, double value);
  int species;
  int node_i;
  int node_j;
  double value;
};

/// Rule plus the two parameter-free singular operators every run needs.
struct Discretization {
  RulePtr rule;
  std::shared_ptr<const EllipticOperator> poisson;   // -Lap, Neumann, zero mean
  std::shared_ptr<const EllipticOperator> pressure;  // -Lap on P_{N-2}, zero mean

  static Discretization make(int degree);
  int degree() const { return rule->degree; }
};

/// Full solution at one time level plus the history the BDF2 steppers need.
struct NsnppState {
  double t = 0.0;
  long step = 0;

  VectorField2D u;
  Field2D p;         // in M_{N-2} for standard/RPC, p_bar - nu div(u_tilde) for MRPC
  Field2D phi;       // xi * phi_bar
  Field2D phi_bar;   // zero-mean Poisson solution
  std::vector<Field2D> c;
  std::vector<Field2D> sigma;
  double r = 0.0;
  double xi = 1.0;

  // Level n-1 (valid when has_previous).
  bool has_previous = false;
  VectorField2D u_prev;
  std::vector<Field2D> sigma_prev;
  std::vector<Field2D> c_prev;
  Field2D phi_prev;
  double r_prev = 0.0;
  double xi_prev = 1.0;

  VectorField2D u_tilde;  // intermediate velocity of the last step
  Field2D p_bar;          // p + nu div(u_tilde), kept in M_{N-2} (MRPC)
  Field2D omega;          // sum of Pi_{N-2} div(u_tilde) (RPC energy)

  std::vector<double> initial_mass;
  std::vector<double> mass;       // target (c_i, 1)_N at this level
  std::vector<double> mass_prev;
  std::vector<Field2D> sigma_unsynced;  // solve output before the log(lambda) shift
  double reference_energy = -1.0;       // first-step energy, bounds forcing-free runs

  int degree() const { return u.degree(); }
};

struct EnergyReport {
  double e_ns = 0.0;
  double e_npp = 0.0;
  double e_total = 0.0;
  double scheme_energy = 0.0;
  std::vector<double> dissipation;  // D_i (c_i, |grad mu_i|^2)_N
  std::vector<Field2D> mu;
};

/// Nodal values of every species must be > 0; throws PositivityError.
void require_positive(const std::vector<Field2D>& c);

Field2D charge_density(const std::vector<Field2D>& c, const SpeciesParams& species);

/// (sum_i c_i (log c_i - 1) + 1/2 (sum_i z_i c_i) phi_bar, 1)_N
double energy_npp(const std::vector<Field2D>& c, const Field2D& phi_bar, const SpeciesParams& species,
                  const QuadratureRule& rule);

/// mu_i = log c_i + z_i phi_bar, nodally.
std::vector<Field2D> chemical_potentials(const std::vector<Field2D>& c, const Field2D& phi_bar,
                                         const SpeciesParams& species);

/// sum_i D_i (c_i, |grad mu_i|^2)_N, per species.
std::vector<double> dissipation_terms(const std::vector<Field2D>& c, const std::vector<Field2D>& mu,
                                      const SpeciesParams& species, const QuadratureRule& rule);

double kinetic_energy(const VectorField2D& u, const QuadratureRule& rule);

struct InitialCondition {
  double t0 = 0.0;
  VectorField2D u;
  std::vector<Field2D> c;
  // false for a restart: a projected velocity only satisfies u = 0 weakly
  bool strong_boundary = true;
};

/// Builds the t0 state: sigma = log c, the zero-mean potential, r, and the
/// pressure from the momentum equation projected onto gradients. The
/// optional momentum source is included in that projection.
NsnppState init_state(const InitialCondition& ic, const Model& model, const Discretization& disc,
                      const VectorField2D* momentum_source = nullptr);

}  // namespace nsnpp
