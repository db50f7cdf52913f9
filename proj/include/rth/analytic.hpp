#pragma once

#include "rth/core_model.hpp"

namespace rth {

/// Stationary profiles: u_bar = alpha/(alpha+gamma) h0 and
/// v_bar(x,y) = chi(x-y) u_bar(y).
template <typename Scalar>
struct EquilibriumPairT {
  ScalarFieldT<Scalar> u_bar;
  TravelerFieldT<Scalar> v_bar;
};

using EquilibriumPair = EquilibriumPairT<double>;

/// Closed-form at-home density:
/// u(t,y) = u0(y) e^{-(alpha+gamma)t} + alpha/(alpha+gamma) (1 - e^{-(alpha+gamma)t}) h0(y).
template <typename Scalar>
ScalarFieldT<Scalar> u_exact(Scalar t, const ScalarFieldT<Scalar>& u0,
                             const ScalarFieldT<Scalar>& h0,
                             const CoreParamsT<Scalar>& params) {
  if (t < 0) throw std::invalid_argument("u_exact: t must be >= 0");
  params.validate();
  if (u0.grid != h0.grid) throw std::invalid_argument("u_exact: grids differ");
  const Scalar rate = params.alpha + params.gamma;
  const Scalar decay = std::exp(-rate * t);
  const Scalar frac = params.alpha / rate;
  ScalarFieldT<Scalar> out(u0.grid);
  out.values = decay * u0.values + frac * (1 - decay) * h0.values;
  return out;
}

namespace detail {

/// (e^{a t} - 1) / a with a series guard near the removable singularity.
template <typename Scalar>
Scalar exp_growth(Scalar a, Scalar t) {
  if (std::abs(a) < Scalar(1e-8)) return t + a * t * t / 2;
  return std::expm1(a * t) / a;
}

}  // namespace detail

/// Closed-form traveler density v = v1 + v2 + v3: decayed heat propagation
/// of v0 plus two deposited-profile terms whose time integrals are taken in
/// closed form per mode. The mode factors depend only on the offset z, so
/// v2 and v3 are rank-one in the Lagrangian frame.
template <typename Scalar>
TravelerFieldT<Scalar> v_exact(Scalar t, const ScalarFieldT<Scalar>& u0,
                               const TravelerFieldT<Scalar>& v0,
                               const ScalarFieldT<Scalar>& h0,
                               const CoreParamsT<Scalar>& params) {
  if (t < 0) throw std::invalid_argument("v_exact: t must be >= 0");
  params.validate();
  detail::require_frame(v0.frame, Frame::eulerian, "v_exact");
  if (t == 0) return v0;

  const Scalar t0 = matching_time(params);
  const Scalar e2 = params.epsilon * params.epsilon;
  const Scalar alpha = params.alpha, gamma = params.gamma;
  SpectralPlanT<Scalar> plan(v0.grid);

  const auto factor2 = plan.symbol([&](Scalar k2) {
    return std::exp(-alpha * t) * std::exp(-e2 * k2 * (t + t0)) *
           detail::exp_growth(e2 * k2 - gamma, t);
  });
  const auto factor3 = plan.symbol([&](Scalar k2) {
    return alpha * std::exp(-e2 * k2 * t0) * (-std::expm1(-(alpha + e2 * k2) * t)) /
           (alpha + e2 * k2);
  });
  const ScalarFieldT<Scalar> m2 = plan.synthesize(factor2);
  const ScalarFieldT<Scalar> m3 = plan.synthesize(factor3);

  const Scalar frac = alpha / (alpha + gamma);
  const VectorX<Scalar> q2 = gamma * (u0.values - frac * h0.values);
  const VectorX<Scalar> q3 = gamma / (alpha + gamma) * h0.values;

  TravelerFieldT<Scalar> extra(v0.grid, Frame::lagrangian);
  extra.values = m2.values * q2.transpose() + m3.values * q3.transpose();

  TravelerFieldT<Scalar> out = heat_propagate(v0, t, params.epsilon);
  out.values *= std::exp(-alpha * t);
  out.values += to_eulerian(extra).values;
  return out;
}

/// Stationary pair for a given conserved home distribution h0.
template <typename Scalar>
EquilibriumPairT<Scalar> equilibrium(const ScalarFieldT<Scalar>& h0,
                                     const CoreParamsT<Scalar>& params) {
  params.validate();
  ScalarFieldT<Scalar> u_bar(h0.grid);
  u_bar.values = params.alpha / (params.alpha + params.gamma) * h0.values;
  const ScalarFieldT<Scalar> chi = chi_kernel(params, h0.grid);
  return {u_bar, traveler_from_kernel(chi, u_bar)};
}

}  // namespace rth
