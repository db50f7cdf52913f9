#pragma once

#include "rth/core_model.hpp"

namespace rth {

/// Transmission and removal constants of the epidemic extension.
/// kappa1 couples home susceptibles to home infecteds at the same node;
/// kappa2 couples traveler susceptibles to the pooled infected travelers at
/// the same position; nu1 and nu2 remove infecteds from the system.
template <typename Scalar>
struct EpidemicParamsT {
  Scalar kappa1 = 0;
  Scalar kappa2 = 0;
  Scalar nu1 = 0;
  Scalar nu2 = 0;

  void validate() const {
    if (kappa1 < 0 || kappa2 < 0 || nu1 < 0 || nu2 < 0)
      throw std::invalid_argument("params: kappa1, kappa2, nu1, nu2 must be >= 0");
  }
};

using EpidemicParams = EpidemicParamsT<double>;

template <typename Scalar>
struct EpidemicStateT {
  Scalar t = 0;
  ScalarFieldT<Scalar> s1, i1;
  TravelerFieldT<Scalar> s2, i2;

  EpidemicStateT() = default;
  explicit EpidemicStateT(const GridSpec& g)
      : s1(ScalarFieldT<Scalar>::zero(g)), i1(ScalarFieldT<Scalar>::zero(g)),
        s2(TravelerFieldT<Scalar>::zero(g)), i2(TravelerFieldT<Scalar>::zero(g)) {}

  const GridSpec& grid() const { return s1.grid; }

  Scalar min_value() const {
    return std::min(std::min(s1.values.minCoeff(), i1.values.minCoeff()),
                    std::min(s2.values.minCoeff(), i2.values.minCoeff()));
  }
  bool all_finite() const {
    return s1.values.allFinite() && i1.values.allFinite() && s2.values.allFinite() &&
           i2.values.allFinite();
  }
};

using EpidemicState = EpidemicStateT<double>;

/// Pooled infected travelers at each position: I(x) = h^2 sum_y i2(x, y).
template <typename Scalar>
ScalarFieldT<Scalar> force_of_infection(const TravelerFieldT<Scalar>& i2) {
  detail::require_frame(i2.frame, Frame::eulerian, "force_of_infection");
  return integrate_home(i2);
}

/// Per-home population N(y) = s1 + i1 + int (s2 + i2) dx. Constant when
/// nu1 = nu2 = 0, nonincreasing otherwise.
template <typename Scalar>
ScalarFieldT<Scalar> home_total(const EpidemicStateT<Scalar>& state) {
  ScalarFieldT<Scalar> n = integrate_position(state.s2);
  n.values += integrate_position(state.i2).values;
  n.values += state.s1.values + state.i1.values;
  return n;
}

namespace detail {

/// Explicit midpoint window for incidence and removal. The pooled force of
/// infection is one reduction per stage and enters each stage frozen; every
/// transfer amount is computed once and applied with opposite signs, so
/// s + i totals are insensitive to the kappas.
template <typename Scalar>
void incidence_substep(EpidemicStateT<Scalar>& s, Scalar tau,
                       const EpidemicParamsT<Scalar>& epi) {
  if (epi.kappa1 == 0 && epi.kappa2 == 0 && epi.nu1 == 0 && epi.nu2 == 0) return;
  const Scalar area = static_cast<Scalar>(s.grid().cell_area());

  const auto home_transfer = [&](const VectorX<Scalar>& sus,
                                 const VectorX<Scalar>& inf) -> VectorX<Scalar> {
    return epi.kappa1 * sus.cwiseProduct(inf);
  };
  const auto travel_transfer = [&](const MatrixX<Scalar>& sus,
                                   const MatrixX<Scalar>& inf) -> MatrixX<Scalar> {
    const VectorX<Scalar> pooled = area * inf.rowwise().sum();
    return epi.kappa2 * (sus.array().colwise() * pooled.array()).matrix();
  };

  // Half window to the midpoint state.
  VectorX<Scalar> t1 = home_transfer(s.s1.values, s.i1.values);
  MatrixX<Scalar> t2 = travel_transfer(s.s2.values, s.i2.values);
  const Scalar half = tau / 2;
  VectorX<Scalar> s1_mid = s.s1.values - half * t1;
  VectorX<Scalar> i1_mid = s.i1.values + half * (t1 - epi.nu1 * s.i1.values);
  MatrixX<Scalar> s2_mid = s.s2.values - half * t2;
  MatrixX<Scalar> i2_mid = s.i2.values + half * (t2 - epi.nu2 * s.i2.values);

  // Full window with the midpoint rates.
  t1 = home_transfer(s1_mid, i1_mid);
  t2 = travel_transfer(s2_mid, i2_mid);
  s.s1.values -= tau * t1;
  s.i1.values += tau * (t1 - epi.nu1 * i1_mid);
  s.s2.values -= tau * t2;
  s.i2.values += tau * (t2 - epi.nu2 * i2_mid);
}

}  // namespace detail

/// One Strang step of the epidemic model: palindromic composition of the
/// incidence window, the exact exchange window applied independently to the
/// susceptible and infected pairs, and position diffusion of s2 and i2.
template <typename Scalar>
EpidemicStateT<Scalar> step_epidemic(const EpidemicStateT<Scalar>& state, Scalar dt,
                                     const CoreParamsT<Scalar>& core,
                                     const EpidemicParamsT<Scalar>& epi) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  core.validate();
  epi.validate();
  const GridSpec& g = state.grid();

  if (epi.kappa2 > 0) {
    const Scalar pooled_sup = norm_sup(force_of_infection(state.i2));
    if (dt * epi.kappa2 * pooled_sup > Scalar(0.5))
      std::cerr << "warning: step_epidemic: dt * kappa2 * sup I = "
                << dt * epi.kappa2 * pooled_sup << " > 0.5, halve dt\n";
  }

  const auto rho = gaussian_rho(g, core.sigma, false);
  SpectralPlanT<Scalar> plan(g);
  const MatrixX<Scalar> heat = plan.heat_axis_operator(dt, core.epsilon);

  EpidemicStateT<Scalar> s = state;
  detail::incidence_substep(s, dt / 2, epi);
  detail::exchange_substep(s.s1, s.s2, dt / 2, core, rho);
  detail::exchange_substep(s.i1, s.i2, dt / 2, core, rho);
  apply_per_axis(s.s2.values, heat, g.points);
  apply_per_axis(s.i2.values, heat, g.points);
  detail::exchange_substep(s.s1, s.s2, dt / 2, core, rho);
  detail::exchange_substep(s.i1, s.i2, dt / 2, core, rho);
  detail::incidence_substep(s, dt / 2, epi);
  s.t += dt;
  if (!s.all_finite())
    throw std::runtime_error("solver abort: non-finite values at t = " +
                             std::to_string(s.t));
  return s;
}

struct EpidemicDiagnosticsRow {
  double t = 0;
  double state_norm = 0;  // ||(s1,s2)||_X + ||(i1,i2)||_X
  double min_value = 0;
  double total_s1 = 0, total_i1 = 0, total_s2 = 0, total_i2 = 0;
  ScalarField home_totals;  // N(y) at this sample
};

using EpidemicTrajectory = TrajectoryT<EpidemicState, EpidemicDiagnosticsRow>;

template <typename Scalar>
EpidemicDiagnosticsRow epidemic_diagnostics(const EpidemicStateT<Scalar>& s) {
  EpidemicDiagnosticsRow row;
  row.t = static_cast<double>(s.t);
  row.state_norm = static_cast<double>(norm_state(s.s1, s.s2) + norm_state(s.i1, s.i2));
  row.min_value = static_cast<double>(s.min_value());
  row.total_s1 = static_cast<double>(integral(s.s1));
  row.total_i1 = static_cast<double>(integral(s.i1));
  row.total_s2 = static_cast<double>(integral(integrate_position(s.s2)));
  row.total_i2 = static_cast<double>(integral(integrate_position(s.i2)));
  row.home_totals = home_total(s);
  return row;
}

template <typename Scalar>
EpidemicTrajectory simulate_epidemic(const EpidemicStateT<Scalar>& state0,
                                     Scalar total_time, Scalar dt,
                                     const CoreParamsT<Scalar>& core,
                                     const EpidemicParamsT<Scalar>& epi,
                                     Index sample_every = 1) {
  return detail::march(
      state0, static_cast<double>(total_time), static_cast<double>(dt), sample_every,
      [&](const EpidemicStateT<Scalar>& s, double step_size) {
        return step_epidemic(s, static_cast<Scalar>(step_size), core, epi);
      },
      [&](const EpidemicStateT<Scalar>& s) { return epidemic_diagnostics(s); });
}

}  // namespace rth
