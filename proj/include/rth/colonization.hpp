#pragma once

#include "rth/core_model.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace rth {

/// Colonization and vital-dynamics constants. A fraction p of returning
/// travelers goes back to its own home; the rest adopts the current
/// location. f(u) = (beta - mu) u - kappa u^2 acts on the home density and
/// nu is an extra traveler death rate.
template <typename Scalar>
struct ColonizationParamsT {
  Scalar p = 1;
  Scalar beta = 0;
  Scalar mu = 0;
  Scalar kappa = 0;
  Scalar nu = 0;

  void validate() const {
    if (!(p >= 0 && p <= 1))
      throw std::invalid_argument("params: p must lie in [0, 1]");
    if (beta < 0 || mu < 0 || kappa < 0 || nu < 0)
      throw std::invalid_argument("params: beta, mu, kappa, nu must be >= 0");
  }
};

using ColonizationParams = ColonizationParamsT<double>;

/// Flux of travelers settling at y, pooled over their previous homes:
/// out(y) = alpha (1-p) h^2 sum_{y'} v(y, y'). Well defined because the
/// position and home axes share one grid.
template <typename Scalar>
ScalarFieldT<Scalar> colonize_flux(const TravelerFieldT<Scalar>& v,
                                   const CoreParamsT<Scalar>& core,
                                   const ColonizationParamsT<Scalar>& ext) {
  detail::require_frame(v.frame, Frame::eulerian, "colonize_flux");
  ScalarFieldT<Scalar> out = integrate_home(v);
  out.values *= core.alpha * (1 - ext.p);
  return out;
}

namespace detail {

/// First two columns of the exponential of the augmented exchange system
///   u' = -gamma u + alpha p V,   V' = gamma u - alpha V,
///   J' = u - alpha J,            Q' = V,            P' = J,
/// so that J(tau) drives the deposited traveler profile and P(tau) the
/// time-integrated colonize flux; Q is the integrated traveler total.
template <typename Scalar>
MatrixX<Scalar> exchange_exponential(Scalar tau, Scalar alpha, Scalar gamma, Scalar p) {
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(5, 5);
  m(0, 0) = -gamma;
  m(0, 1) = alpha * p;
  m(1, 0) = gamma;
  m(1, 1) = -alpha;
  m(2, 0) = 1;
  m(2, 2) = -alpha;
  m(3, 1) = 1;
  m(4, 2) = 1;
  return (tau * m).exp();
}

/// Exchange window with colonization. The traveler update is the exact
/// solution of v' = -alpha v + gamma rho u along the window; the colonize
/// deposit is the exact time integral of the colonize flux along the same
/// flow, so u + V + deposits balances and every coefficient is nonnegative
/// (the scheme inherits the monotonicity of the semiflow).
template <typename Scalar>
void exchange_colonize_substep(ScalarFieldT<Scalar>& u, TravelerFieldT<Scalar>& v,
                               Scalar tau, const CoreParamsT<Scalar>& core,
                               Scalar p, const ScalarFieldT<Scalar>& rho,
                               const SpectralPlanT<Scalar>& plan,
                               const SpectralSymbolT<Scalar>& rho_symbol) {
  const MatrixX<Scalar> e = exchange_exponential(tau, core.alpha, core.gamma, p);
  const VectorX<Scalar> big_v = integrate_position(v).values;

  VectorX<Scalar> u_new = e(0, 0) * u.values + e(0, 1) * big_v;
  if (p < 1) {
    const Scalar survive_integral = -std::expm1(-core.alpha * tau) / core.alpha;
    ScalarFieldT<Scalar> settled = integrate_home(v);
    settled.values *= survive_integral;
    ScalarFieldT<Scalar> deposited(u.grid);
    deposited.values = core.gamma * (e(4, 0) * u.values + e(4, 1) * big_v);
    settled.values += plan.convolve(deposited, rho_symbol).values;
    u_new += core.alpha * (1 - p) * settled.values;
  }

  const VectorX<Scalar> deposit =
      core.gamma * (e(2, 0) * u.values + e(2, 1) * big_v);
  v.values *= std::exp(-core.alpha * tau);
  add_shifted_profile(v, deposit, rho);
  u.values = std::move(u_new);
}

/// Explicit midpoint window for the logistic term f(u) = (beta-mu) u - kappa u^2.
template <typename Scalar>
void logistic_substep(ScalarFieldT<Scalar>& u, Scalar tau,
                      const ColonizationParamsT<Scalar>& ext) {
  if (ext.beta == ext.mu && ext.kappa == 0) return;
  const Scalar r = ext.beta - ext.mu;
  const auto f = [&](const VectorX<Scalar>& w) -> VectorX<Scalar> {
    return r * w.array().matrix() - ext.kappa * w.array().square().matrix();
  };
  const VectorX<Scalar> mid = u.values + (tau / 2) * f(u.values);
  u.values += tau * f(mid);
}

}  // namespace detail

/// One Strang step of the colonization model: palindromic composition of
/// the logistic window, the exchange-with-colonization window, and position
/// diffusion with the extra e^{-nu dt} traveler decay. Reduces to the base
/// step when p = 1 and beta = mu = kappa = nu = 0.
/// Accuracy guidance: dt <= 1 / (2 (beta + kappa * sup u)).
template <typename Scalar>
CoreStateT<Scalar> step_colonization(const CoreStateT<Scalar>& state, Scalar dt,
                                     const CoreParamsT<Scalar>& core,
                                     const ColonizationParamsT<Scalar>& ext) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  core.validate();
  ext.validate();
  const GridSpec& g = state.v.grid;
  const auto rho = gaussian_rho(g, core.sigma, false);
  SpectralPlanT<Scalar> plan(g);
  const Scalar sigma = core.sigma;
  const auto rho_symbol = plan.symbol(
      [sigma](Scalar k2) { return std::exp(-Scalar(0.5) * sigma * sigma * k2); });
  const MatrixX<Scalar> heat = plan.heat_axis_operator(dt, core.epsilon);

  CoreStateT<Scalar> s = state;
  detail::logistic_substep(s.u, dt / 2, ext);
  detail::exchange_colonize_substep(s.u, s.v, dt / 2, core, ext.p, rho, plan,
                                    rho_symbol);
  apply_per_axis(s.v.values, heat, g.points);
  if (ext.nu > 0) s.v.values *= std::exp(-ext.nu * dt);
  detail::exchange_colonize_substep(s.u, s.v, dt / 2, core, ext.p, rho, plan,
                                    rho_symbol);
  detail::logistic_substep(s.u, dt / 2, ext);
  s.t += dt;
  if (!s.all_finite())
    throw std::runtime_error("solver abort: non-finite values at t = " +
                             std::to_string(s.t));
  return s;
}

/// Global population h^2 sum u + h^4 sum sum v (conserved when p < 1 only
/// globally, and only without vital dynamics).
template <typename Scalar>
Scalar global_population(const CoreStateT<Scalar>& state) {
  return integral(state.u) + integral(integrate_position(state.v));
}

template <typename Scalar>
TrajectoryT<CoreStateT<Scalar>> simulate_colonization(
    const CoreStateT<Scalar>& state0, Scalar total_time, Scalar dt,
    const CoreParamsT<Scalar>& core, const ColonizationParamsT<Scalar>& ext,
    Index sample_every = 1) {
  const Scalar total0 = global_population(state0);
  return detail::march(
      state0, static_cast<double>(total_time), static_cast<double>(dt), sample_every,
      [&](const CoreStateT<Scalar>& s, double step_size) {
        return step_colonization(s, static_cast<Scalar>(step_size), core, ext);
      },
      [&](const CoreStateT<Scalar>& s) {
        DiagnosticsRow row;
        row.t = static_cast<double>(s.t);
        row.state_norm = static_cast<double>(norm_state(s.u, s.v));
        const Scalar total = global_population(s);
        row.conservation_residual = static_cast<double>(
            total0 != 0 ? std::abs(total - total0) / std::abs(total0)
                        : std::abs(total - total0));
        row.min_value = static_cast<double>(s.min_value());
        return row;
      });
}

struct MonotoneReport {
  bool precondition_ok = false;
  double max_violation = 0;  // sup over time of max(0, lo - hi)
  double scale = 0;          // initial sup norm of the upper state
  bool pass = false;
};

/// Evolve an ordered pair of nonnegative states and report the worst
/// componentwise order violation along the trajectory.
template <typename Scalar>
MonotoneReport check_monotone(const CoreStateT<Scalar>& state_lo,
                              const CoreStateT<Scalar>& state_hi, Scalar total_time,
                              Scalar dt, const CoreParamsT<Scalar>& core,
                              const ColonizationParamsT<Scalar>& ext) {
  MonotoneReport report;
  report.scale = static_cast<double>(
      std::max(std::max(norm_sup(state_hi.u), norm_sup(state_lo.u)),
               std::max(state_hi.v.values.cwiseAbs().maxCoeff(),
                        state_lo.v.values.cwiseAbs().maxCoeff())));
  const bool ordered = (state_hi.u.values - state_lo.u.values).minCoeff() >= 0 &&
                       (state_hi.v.values - state_lo.v.values).minCoeff() >= 0;
  const bool nonneg =
      state_lo.u.values.minCoeff() >= 0 && state_lo.v.values.minCoeff() >= 0;
  report.precondition_ok = ordered && nonneg;
  if (!report.precondition_ok) return report;

  CoreStateT<Scalar> lo = state_lo, hi = state_hi;
  double remaining = static_cast<double>(total_time);
  while (remaining > 1e-12 * static_cast<double>(total_time)) {
    const Scalar step_size = static_cast<Scalar>(std::min(static_cast<double>(dt), remaining));
    lo = step_colonization(lo, step_size, core, ext);
    hi = step_colonization(hi, step_size, core, ext);
    remaining -= static_cast<double>(step_size);
    const double worst =
        std::max((lo.u.values - hi.u.values).maxCoeff(),
                 (lo.v.values - hi.v.values).maxCoeff());
    report.max_violation = std::max(report.max_violation, std::max(0.0, worst));
  }
  report.pass = report.max_violation <= 1e-9 * report.scale;
  return report;
}

}  // namespace rth
