#pragma once

#include "rth/spectral.hpp"

#include <iostream>

namespace rth {

/// Rate and shape constants of the base movement model.
/// alpha: return-home rate, gamma: leave-home rate, epsilon: square root of
/// the traveler diffusivity, sigma: width of the Gaussian home profile.
template <typename Scalar>
struct CoreParamsT {
  Scalar alpha = 1;
  Scalar gamma = 1;
  Scalar epsilon = 1;
  Scalar sigma = 1;

  void validate() const {
    if (!(alpha > 0)) throw std::invalid_argument("params: alpha must be > 0");
    if (!(gamma >= 0)) throw std::invalid_argument("params: gamma must be >= 0");
    if (!(epsilon > 0)) throw std::invalid_argument("params: epsilon must be > 0");
    if (!(sigma > 0)) throw std::invalid_argument("params: sigma must be > 0");
  }
};

using CoreParams = CoreParamsT<double>;

/// Time at which the heat kernel equals the home profile: t0 = sigma^2 / (2 eps^2).
template <typename Scalar>
Scalar matching_time(const CoreParamsT<Scalar>& params) {
  params.validate();
  return params.sigma * params.sigma / (Scalar(2) * params.epsilon * params.epsilon);
}

/// Discrete home profile: the exact periodization of the unit-mass Gaussian
/// of width sigma, defined through its mode weights e^{-sigma^2 |k|^2 / 2}.
/// h^2 * sum equals 1 up to round-off (the k = 0 weight).
template <typename Scalar>
ScalarFieldT<Scalar> gaussian_rho(const GridSpec& grid, Scalar sigma,
                                  bool warn_underresolved = true) {
  if (!(sigma > 0)) throw std::invalid_argument("gaussian_rho: sigma must be > 0");
  if (warn_underresolved && sigma < Scalar(2) * static_cast<Scalar>(grid.spacing()))
    std::cerr << "warning: gaussian_rho: sigma < 2h, home profile under-resolved\n";
  SpectralPlanT<Scalar> plan(grid);
  return plan.synthesize(plan.symbol(
      [sigma](Scalar k2) { return std::exp(-Scalar(0.5) * sigma * sigma * k2); }));
}

/// Grid field of the periodized heat kernel K(t, .) with diffusivity eps^2.
template <typename Scalar>
ScalarFieldT<Scalar> heat_kernel_field(const GridSpec& grid, Scalar t, Scalar epsilon) {
  if (!(t > 0)) throw std::invalid_argument("heat_kernel_field: t must be > 0");
  SpectralPlanT<Scalar> plan(grid);
  return plan.synthesize(
      plan.symbol([=](Scalar k2) { return std::exp(-epsilon * epsilon * k2 * t); }));
}

/// Heat semigroup on a scalar field: multiply each mode by e^{-eps^2 |k|^2 t}.
/// Conserves the integral (k = 0 mode) and is the identity at t = 0.
template <typename Scalar>
ScalarFieldT<Scalar> heat_propagate(const ScalarFieldT<Scalar>& f, Scalar t,
                                    Scalar epsilon) {
  if (t < 0) throw std::invalid_argument("heat_propagate: t must be >= 0");
  if (t == 0) return f;
  SpectralPlanT<Scalar> plan(f.grid);
  const MatrixX<Scalar> op = plan.heat_axis_operator(t, epsilon);
  ScalarFieldT<Scalar> out(f.grid);
  out.as_matrix() = op * f.as_matrix() * op.transpose();
  return out;
}

/// Heat semigroup along the position axis of a traveler field. Acts on the
/// first index in either frame (the generator is Delta_z in Lagrangian form).
template <typename Scalar>
TravelerFieldT<Scalar> heat_propagate(const TravelerFieldT<Scalar>& v, Scalar t,
                                      Scalar epsilon) {
  if (t < 0) throw std::invalid_argument("heat_propagate: t must be >= 0");
  if (t == 0) return v;
  SpectralPlanT<Scalar> plan(v.grid);
  const MatrixX<Scalar> op = plan.heat_axis_operator(t, epsilon);
  TravelerFieldT<Scalar> out = v;
  apply_per_axis(out.values, op, v.grid.points);
  return out;
}

/// Equilibrium traveler profile per unit at-home density:
/// chi(z) = gamma * int_0^inf e^{-alpha t} K(t + t0, z) dt, evaluated in
/// closed form per mode as gamma e^{-eps^2 |k|^2 t0} / (alpha + eps^2 |k|^2).
/// Its integral is gamma / alpha exactly (the k = 0 weight).
template <typename Scalar>
ScalarFieldT<Scalar> chi_kernel(const CoreParamsT<Scalar>& params, const GridSpec& grid) {
  params.validate();
  const Scalar t0 = matching_time(params);
  const Scalar e2 = params.epsilon * params.epsilon;
  SpectralPlanT<Scalar> plan(grid);
  return plan.synthesize(plan.symbol([&](Scalar k2) {
    return params.gamma * std::exp(-e2 * k2 * t0) / (params.alpha + e2 * k2);
  }));
}

}  // namespace rth
