#include "nsnpp/schemes.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace nsnpp {

namespace {

class ScopedTimer {
 public:
  explicit ScopedTimer(double& acc) : acc_(acc), t0_(std::chrono::steady_clock::now()) {}
  ~ScopedTimer() {
    acc_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  ScopedTimer(const ScopedTimer&) = delete;
  ScopedTimer& operator=(const ScopedTimer&) = delete;

 private:
  double& acc_;
  std::chrono::steady_clock::time_point t0_;
};

Field2D extrapolate(const Field2D& now, const Field2D& prev, int order) {
  return order == 1 ? now : 2.0 * now - prev;
}

VectorField2D extrapolate(const VectorField2D& now, const VectorField2D& prev, int order) {
  return order == 1 ? now : 2.0 * now - prev;
}

Field2D bdf_history(const Field2D& now, const Field2D& prev, int order) {
  return order == 1 ? now : 0.5 * (4.0 * now - prev);
}

VectorField2D bdf_history(const VectorField2D& now, const VectorField2D& prev, int order) {
  return order == 1 ? now : 0.5 * (4.0 * now - prev);
}

std::string format_failure(long step, const std::string& invariant, double magnitude, const std::string& detail) {
  std::ostringstream os;
  os.precision(17);
  os << "step " << step << ": invariant '" << invariant << "' violated (magnitude " << magnitude << ")";
  if (!detail.empty()) os << ": " << detail;
  return os.str();
}

}  // namespace

void SchemeVariant::validate() const {
  const bool ok = (order == 1 && projection == Projection::standard) ||
                  (order == 2 && projection != Projection::standard);
  if (!ok) throw std::invalid_argument("SchemeVariant: order 1 requires standard projection, order 2 rpc or mrpc");
}

std::string SchemeVariant::name() const {
  if (order == 1) return "bdf1";
  return projection == Projection::rotational ? "bdf2-rpc" : "bdf2-mrpc";
}

SchemeVariant SchemeVariant::parse(const std::string& name) {
  if (name == "bdf1") return bdf1();
  if (name == "bdf2-rpc") return bdf2_rpc();
  if (name == "bdf2-mrpc") return bdf2_mrpc();
  throw std::invalid_argument("unknown scheme '" + name + "' (expected bdf1, bdf2-rpc or bdf2-mrpc)");
}

StepFailure::StepFailure(long s, std::string inv, double mag, const std::string& detail)
    : std::runtime_error(format_failure(s, inv, mag, detail)), step(s), invariant(std::move(inv)), magnitude(mag) {}

SchemeContext::SchemeContext(Discretization disc, Model model, double dt, SchemeVariant variant,
                             SchemeOptions options)
    : disc_(std::move(disc)), model_(std::move(model)), dt_(dt), variant_(variant), options_(options) {
  variant_.validate();
  model_.validate();
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw std::invalid_argument("SchemeContext: dt must be > 0");
  for (int order = 1; order <= variant_.order; ++order) {
    const double alpha = bdf_gamma(order) / dt_;
    for (const auto& sp : model_.species) {
      sigma_ops_[order - 1].push_back(
          std::make_shared<const EllipticOperator>(alpha, sp.diffusivity, BoundaryKind::neumann, disc_.rule));
    }
    velocity_ops_[order - 1] =
        std::make_shared<const EllipticOperator>(alpha, model_.physics.nu, BoundaryKind::dirichlet, disc_.rule);
  }
}

const EllipticOperator& SchemeContext::sigma_operator(int order, int species) const {
  return *sigma_ops_.at(order - 1).at(species);
}

const EllipticOperator& SchemeContext::velocity_operator(int order) const {
  const auto& op = velocity_ops_.at(order - 1);
  if (!op) throw std::logic_error("velocity operator for this order was not built");
  return *op;
}

int step_order(const NsnppState& s, const SchemeVariant& v) {
  return (v.order == 2 && s.has_previous) ? 2 : 1;
}

EnergyForm energy_form(int order, Projection projection) {
  if (order == 1) return EnergyForm::bdf1;
  return projection == Projection::rotational ? EnergyForm::rpc : EnergyForm::mrpc;
}

std::vector<Field2D> sigma_step(const NsnppState& s, const std::vector<Field2D>* forcing_sigma,
                                const SchemeContext& ctx, int order) {
  if (order == 2 && !s.has_previous) throw std::invalid_argument("sigma_step: BDF2 needs the n-1 level");
  const QuadratureRule& rule = ctx.rule();
  const Model& model = ctx.model();
  const double inv_dt = 1.0 / ctx.dt();
  auto& timers = ctx.timers();

  std::vector<Field2D> rhs;
  {
    ScopedTimer tm(timers.assembly);
    const Field2D phi_star = extrapolate(s.phi, s.phi_prev, order);
    const VectorField2D u_star = extrapolate(s.u, s.u_prev, order);
    const VectorField2D grad_phi = gradient(phi_star, rule);
    Field2D lap_phi(rule.degree);
    if (ctx.options().potential_laplacian == PotentialLaplacian::spectral) {
      lap_phi = laplacian(phi_star, rule);
    } else {
      const auto lap_of = [&](const std::vector<Field2D>& c, double xi) {
        Field2D rho = charge_density(c, model.species);
        rho.values().array() -= discrete_mean(rho, rule);
        return rho * (-xi / model.physics.eps);
      };
      lap_phi = order == 1 ? lap_of(s.c, s.xi) : 2.0 * lap_of(s.c, s.xi) - lap_of(s.c_prev, s.xi_prev);
    }

    for (int i = 0; i < model.species_count(); ++i) {
      const Species& sp = model.species[i];
      const Field2D sig_star = extrapolate(s.sigma[i], i < static_cast<int>(s.sigma_prev.size()) ? s.sigma_prev[i]
                                                                                                  : s.sigma[i],
                                           order);
      const VectorField2D g = gradient(sig_star, rule);
      Matrix expl = g.x.values().cwiseAbs2() + g.y.values().cwiseAbs2();
      expl += sp.valence * (g.x.values().cwiseProduct(grad_phi.x.values()) +
                            g.y.values().cwiseProduct(grad_phi.y.values()) + lap_phi.values());
      const Field2D transport = ctx.options().transport == TransportForm::div_sigma_u
                                    ? divergence(VectorField2D(sig_star.times(u_star.x), sig_star.times(u_star.y)), rule)
                                    : advect(u_star, sig_star, rule);
      Field2D g_rhs = inv_dt * bdf_history(s.sigma[i], order == 1 ? s.sigma[i] : s.sigma_prev[i], order);
      g_rhs.values() += sp.diffusivity * expl - transport.values();
      if (forcing_sigma && !forcing_sigma->empty()) g_rhs += forcing_sigma->at(i);
      rhs.push_back(std::move(g_rhs));
    }
  }

  std::vector<Field2D> out;
  ScopedTimer tm(timers.elliptic);
  for (int i = 0; i < model.species_count(); ++i) out.push_back(ctx.sigma_operator(order, i).solve(rhs[i]).solution);
  return out;
}

RescaleResult concentration_rescale(const std::vector<Field2D>& sigma, const std::vector<double>& target_masses,
                                    const QuadratureRule& rule, double overflow, long step) {
  if (sigma.size() != target_masses.size()) throw std::invalid_argument("concentration_rescale: size mismatch");
  RescaleResult out;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!(target_masses[i] > 0.0)) {
      throw std::invalid_argument("concentration_rescale: target mass must be > 0 (species " +
                                  std::to_string(i + 1) + ")");
    }
    const double smax = sigma[i].max();
    if (!sigma[i].all_finite() || smax > overflow) {
      throw StepFailure(step, "sigma_overflow", smax,
                        "species " + std::to_string(i + 1) + " has nodal sigma above " + std::to_string(overflow));
    }
    Field2D cbar = sigma[i].map([](double v) { return std::exp(v); });
    const double lambda = target_masses[i] / discrete_integral(cbar, rule);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw StepFailure(step, "rescale_factor", lambda, "species " + std::to_string(i + 1));
    }
    cbar *= lambda;
    out.c.push_back(std::move(cbar));
    out.lambda.push_back(lambda);
  }
  return out;
}

Field2D potential_step(const std::vector<Field2D>& c, const Model& model, const EllipticOperator& poisson) {
  return poisson.solve(charge_density(c, model.species)).solution * (1.0 / model.physics.eps);
}

VelocitySubsteps velocity_substeps(const NsnppState& s, const std::vector<Field2D>& c_new, const Field2D& phi_bar_new,
                                   const VectorField2D* forcing_u, const SchemeContext& ctx, int order,
                                   Projection projection) {
  if (order == 2 && !s.has_previous) throw std::invalid_argument("velocity_substeps: BDF2 needs the n-1 level");
  const QuadratureRule& rule = ctx.rule();
  auto& timers = ctx.timers();
  VelocitySubsteps out;
  VectorField2D f1;
  {
    ScopedTimer tm(timers.assembly);
    const VectorField2D u_star = extrapolate(s.u, s.u_prev, order);
    const Field2D rho = charge_density(c_new, ctx.model().species);
    const VectorField2D gphi = gradient(phi_bar_new, rule);
    out.w = convect(u_star, rule);
    out.w.x += rho.times(gphi.x);
    out.w.y += rho.times(gphi.y);

    const Field2D& p_ref = projection == Projection::modified_rotational ? s.p_bar : s.p;
    f1 = (1.0 / ctx.dt()) * bdf_history(s.u, order == 1 ? s.u : s.u_prev, order) - gradient(p_ref, rule);
    if (forcing_u && forcing_u->degree() == rule.degree) f1 += *forcing_u;
  }
  ScopedTimer tm(timers.elliptic);
  const EllipticOperator& op = ctx.velocity_operator(order);
  out.u1 = VectorField2D(op.solve(f1.x).solution, op.solve(f1.y).solution);
  out.u2 = VectorField2D(op.solve(-out.w.x).solution, op.solve(-out.w.y).solution);
  return out;
}

XiResult compute_xi(const XiInputs& in) {
  XiResult out;
  const double gamma = bdf_gamma(in.order);
  out.sqrt_e = std::sqrt(in.e_bar + in.c0);
  out.history = in.order == 1 ? in.r_n : 2.0 * in.r_n - 0.5 * in.r_nm1;
  const double k = in.dt / (2.0 * out.sqrt_e);
  out.denominator = gamma * out.sqrt_e + k * (in.dissipation - in.w_u2);
  out.xi = (out.history + k * (in.w_u1 + in.source)) / out.denominator;
  out.r = out.xi * out.sqrt_e;
  return out;
}

double xi_residual(const XiInputs& in, const XiResult& out, double w_u) {
  const double gamma = bdf_gamma(in.order);
  const double k = in.dt / (2.0 * out.sqrt_e);
  const double res = gamma * out.r - out.history - k * (w_u - out.xi * in.dissipation + in.source);
  const double scale = std::max({std::abs(gamma * out.r), std::abs(out.history),
                                 k * (std::abs(w_u) + std::abs(out.xi * in.dissipation) + std::abs(in.source))});
  return scale > 0.0 ? std::abs(res) / scale : std::abs(res);
}

ProjectionResult pressure_projection(const VectorField2D& u_tilde, const NsnppState& s, const SchemeContext& ctx,
                                     int order, Projection projection) {
  const QuadratureRule& rule = ctx.rule();
  const double gamma = bdf_gamma(order);
  const double nu = ctx.model().physics.nu;
  ProjectionResult out;
  {
    ScopedTimer tm(ctx.timers().elliptic);
    out.psi = ctx.disc().pressure->solve_flux(u_tilde).solution * (gamma / ctx.dt());
  }
  ScopedTimer tm(ctx.timers().assembly);
  out.u = u_tilde - (ctx.dt() / gamma) * gradient(out.psi, rule);
  switch (projection) {
    case Projection::standard:
      out.p = s.p + out.psi;
      out.p_bar = out.p;
      out.omega = s.omega;
      break;
    case Projection::rotational: {
      const Field2D div_proj = truncate_modes(divergence(u_tilde, rule), rule, rule.degree - 2);
      out.p = s.p + out.psi - nu * div_proj;
      out.p_bar = out.p;
      out.omega = s.omega + div_proj;
      break;
    }
    case Projection::modified_rotational:
      out.p_bar = s.p_bar + out.psi;
      out.p = out.p_bar - nu * divergence(u_tilde, rule);
      out.omega = s.omega;
      break;
  }
  return out;
}

NsnppState advance(const NsnppState& s, const SchemeContext& ctx, const ForcingFn* forcing, StepReport* report) {
  ScopedTimer total(ctx.timers().total);
  const QuadratureRule& rule = ctx.rule();
  const Model& model = ctx.model();
  const SchemeOptions& opt = ctx.options();
  const double dt = ctx.dt();
  const long step = s.step + 1;
  const int m = model.species_count();

  const int order = step_order(s, ctx.variant());
  const Projection projection = order == 1 ? Projection::standard : ctx.variant().projection;
  const EnergyForm form = energy_form(order, projection);
  const double t_new = s.t + dt;

  std::optional<ForcingTerms> f;
  if (forcing && *forcing) f = (*forcing)(t_new);
  const bool forced = f.has_value();
  const bool mass_source = forced && static_cast<int>(f->f_c.size()) == m;

  const bool check_energy = opt.check_invariants && opt.assert_energy && !forced;
  const double e_before = check_energy ? discrete_energy(s, form, dt, model.physics.nu, rule) : 0.0;
  double reference = s.reference_energy;
  if (reference < 0.0 && !forced) reference = discrete_energy(s, EnergyForm::bdf1, dt, model.physics.nu, rule);

  // 1-2: sigma solves and mass rescaling
  const std::vector<Field2D> sigma = sigma_step(s, forced ? &f->f_sigma : nullptr, ctx, order);
  std::vector<double> targets(m);
  for (int i = 0; i < m; ++i) {
    if (!mass_source) {
      targets[i] = s.mass[i];
      continue;
    }
    const double rate = discrete_integral(f->f_c[i], rule);
    targets[i] = order == 1 ? s.mass[i] + dt * rate : (4.0 * s.mass[i] - s.mass_prev[i] + 2.0 * dt * rate) / 3.0;
  }
  RescaleResult rescaled = concentration_rescale(sigma, targets, rule, opt.sigma_overflow, step);

  // 3: potential
  Field2D phi_bar;
  {
    ScopedTimer tm(ctx.timers().elliptic);
    phi_bar = potential_step(rescaled.c, model, *ctx.disc().poisson);
  }

  // 4: velocity substeps
  VelocitySubsteps sub = velocity_substeps(s, rescaled.c, phi_bar, forced ? &f->f_u : nullptr, ctx, order, projection);

  // 5: xi
  XiInputs in;
  XiResult xr;
  VectorField2D u_tilde;
  double xi_res = 0.0;
  {
    ScopedTimer tm(ctx.timers().assembly);
    in.order = order;
    in.dt = dt;
    in.r_n = s.r;
    in.r_nm1 = s.r_prev;
    in.c0 = model.physics.c0;
    in.e_bar = energy_npp(rescaled.c, phi_bar, model.species, rule);
    if (in.e_bar + in.c0 < 1.0) {
      throw StepFailure(step, "sav_shift", in.e_bar + in.c0, "E_npp + c0 fell below 1; increase c0");
    }
    const std::vector<Field2D> mu = chemical_potentials(rescaled.c, phi_bar, model.species);
    for (double d : dissipation_terms(rescaled.c, mu, model.species, rule)) in.dissipation += d;
    if (mass_source) {
      for (int i = 0; i < m; ++i) in.source += discrete_inner(f->f_c[i], mu[i], rule);
    }
    in.w_u1 = discrete_inner(sub.w, sub.u1, rule);
    in.w_u2 = discrete_inner(sub.w, sub.u2, rule);
    xr = compute_xi(in);
    if (opt.check_invariants && !(xr.denominator > 0.5 * bdf_gamma(order) * xr.sqrt_e)) {
      throw StepFailure(step, "xi_denominator", xr.denominator, "denominator not above gamma*sqrt(E+c0)/2");
    }
    u_tilde = sub.u1 + xr.xi * sub.u2;
    xi_res = xi_residual(in, xr, discrete_inner(sub.w, u_tilde, rule));
  }
  if (opt.check_invariants && !(xi_res <= opt.xi_tol)) {
    throw StepFailure(step, "xi_consistency", xi_res, "scalar r-equation residual");
  }

  // 6: projection
  ProjectionResult pr = pressure_projection(u_tilde, s, ctx, order, projection);

  NsnppState n;
  n.t = t_new;
  n.step = step;
  n.u = std::move(pr.u);
  n.p = std::move(pr.p);
  n.p_bar = std::move(pr.p_bar);
  n.omega = std::move(pr.omega);
  n.phi_bar = phi_bar;
  n.phi = xr.xi * phi_bar;
  n.c = std::move(rescaled.c);
  n.sigma_unsynced = sigma;
  n.sigma = sigma;
  if (opt.sigma_resync) {
    for (int i = 0; i < m; ++i) n.sigma[i].values().array() += std::log(rescaled.lambda[i]);
  }
  n.r = xr.r;
  n.xi = xr.xi;
  n.has_previous = true;
  n.u_prev = s.u;
  n.sigma_prev = s.sigma;
  n.c_prev = s.c;
  n.phi_prev = s.phi;
  n.r_prev = s.r;
  n.xi_prev = s.xi;
  n.u_tilde = u_tilde;
  n.initial_mass = s.initial_mass;
  n.mass = targets;
  n.mass_prev = s.mass;
  n.reference_energy = reference;

  StepReport rep;
  rep.order = order;
  rep.projection = projection;
  rep.form = form;
  rep.energy_before = e_before;
  rep.lambda = rescaled.lambda;
  rep.xi = xr;
  rep.xi_residual = xi_res;

  if (opt.check_invariants) {
    if (!n.u.all_finite() || !n.p.all_finite() || !std::isfinite(n.r)) {
      throw StepFailure(step, "finite", std::nan(""), "non-finite velocity, pressure or r");
    }
    try {
      require_positive(n.c);
    } catch (const PositivityError& e) {
      throw StepFailure(step, "positivity", e.value, e.what());
    }
    for (int i = 0; i < m; ++i) {
      const double mass = discrete_integral(n.c[i], rule);
      const double err = std::abs(mass - targets[i]) / targets[i];
      rep.max_mass_error = std::max(rep.max_mass_error, err);
      if (!(err <= opt.mass_tol)) {
        throw StepFailure(step, "mass", err, "species " + std::to_string(i + 1) + " relative mass drift");
      }
    }
    rep.divergence = discrete_divergence(n.u, *ctx.disc().pressure);
    if (!(rep.divergence <= opt.divergence_tol)) {
      throw StepFailure(step, "divergence", rep.divergence, "(u, grad q)_N over the pressure basis");
    }
    if (check_energy) {
      rep.energy_after = discrete_energy(n, form, dt, model.physics.nu, rule);
      rep.energy_checked = true;
      if (!(rep.energy_after <= e_before + opt.energy_tol * std::abs(e_before))) {
        std::ostringstream os;
        os.precision(17);
        os << to_string(form) << " energy rose from " << e_before << " to " << rep.energy_after;
        throw StepFailure(step, "energy", (rep.energy_after - e_before) / std::abs(e_before), os.str());
      }
    }
    if (!forced && reference > 0.0) {
      const double bound = opt.bound_factor * reference;
      const double u2 = discrete_inner(n.u, n.u, rule);
      const double worst = std::max({u2, n.r * n.r, n.xi * n.xi});
      if (!(worst <= bound)) throw StepFailure(step, "boundedness", worst / reference, "|u|^2, r^2 or xi^2 bound");
    }
  }
  if (report) {
    rep.min_c = n.c.front().min();
    for (const auto& ci : n.c) rep.min_c = std::min(rep.min_c, ci.min());
    if (!rep.energy_checked) rep.energy_after = discrete_energy(n, form, dt, model.physics.nu, rule);
    rep.u1 = std::move(sub.u1);
    rep.u2 = std::move(sub.u2);
    rep.w = std::move(sub.w);
    rep.psi = std::move(pr.psi);
    *report = std::move(rep);
  }
  ++ctx.timers().steps;
  return n;
}

}  // namespace nsnpp
