#pragma once

#include "rth/kernels.hpp"

#include <utility>
#include <vector>

namespace rth {

/// State of the base model: at-home density u over home nodes and traveler
/// density v over (position, home) pairs, stored in the Eulerian frame.
template <typename Scalar>
struct CoreStateT {
  Scalar t = 0;
  ScalarFieldT<Scalar> u;
  TravelerFieldT<Scalar> v;

  CoreStateT() = default;
  CoreStateT(const GridSpec& g)
      : u(ScalarFieldT<Scalar>::zero(g)), v(TravelerFieldT<Scalar>::zero(g)) {}
  CoreStateT(Scalar time, ScalarFieldT<Scalar> u_, TravelerFieldT<Scalar> v_)
      : t(time), u(std::move(u_)), v(std::move(v_)) {
    detail::require_frame(v.frame, Frame::eulerian, "core state");
    if (u.grid != v.grid) throw std::invalid_argument("core state: grids differ");
  }

  Scalar min_value() const {
    return std::min(u.values.minCoeff(), v.values.minCoeff());
  }
  bool all_finite() const { return u.values.allFinite() && v.values.allFinite(); }
};

using CoreState = CoreStateT<double>;

struct DiagnosticsRow {
  double t = 0;
  double state_norm = 0;            // ||u||_inf + ||v||_Y1 + ||v||_Y2
  double conservation_residual = 0; // relative drift of the conserved total
  double min_value = 0;
};

template <typename State, typename Row = DiagnosticsRow>
struct TrajectoryT {
  std::vector<State> states;
  std::vector<Row> diagnostics;

  void append(State s, Row row) {
    if (!states.empty() && !(row.t > diagnostics.back().t))
      throw std::logic_error("trajectory: timestamps must increase");
    states.push_back(std::move(s));
    diagnostics.push_back(std::move(row));
  }
};

using Trajectory = TrajectoryT<CoreState>;

/// v.col(y) += weight(y) * profile(. - y) for every home column.
template <typename Scalar>
void add_shifted_profile(TravelerFieldT<Scalar>& v, const VectorX<Scalar>& weights,
                         const ScalarFieldT<Scalar>& profile) {
  const Index n = v.grid.points;
  if (profile.grid != v.grid) throw std::invalid_argument("profile grid mismatch");
  const bool shifted = v.frame == Frame::eulerian;
  for (Index j1 = 0; j1 < n; ++j1)
    for (Index j2 = 0; j2 < n; ++j2) {
      const Index q = flat_index(j1, j2, n);
      const Scalar w = weights[q];
      if (w == Scalar(0)) continue;
      auto col = v.values.col(q);
      if (!shifted) {
        col += w * profile.values;
        continue;
      }
      for (Index x1 = 0; x1 < n; ++x1) {
        const Index z1 = offset_index(x1, j1, n);
        for (Index x2 = 0; x2 < n; ++x2)
          col[flat_index(x1, x2, n)] +=
              w * profile.values[flat_index(z1, offset_index(x2, j2, n), n)];
      }
    }
}

/// K(x-y) * weight(y): traveler field deposited per home column.
template <typename Scalar>
TravelerFieldT<Scalar> traveler_from_kernel(const ScalarFieldT<Scalar>& kernel,
                                            const ScalarFieldT<Scalar>& weights,
                                            Frame frame = Frame::eulerian) {
  TravelerFieldT<Scalar> v(kernel.grid, frame);
  add_shifted_profile(v, VectorX<Scalar>(weights.values), kernel);
  return v;
}

namespace detail {

/// Exact solution of the exchange sub-system over a window tau:
///   du/dt = alpha V - gamma u,  dV/dt = gamma u - alpha V,
/// applied per home node. Traveler mass decays uniformly by e^{-alpha tau}
/// (removal proportional to the column's own profile) and the balance is
/// deposited with the home profile, so u + V is conserved by construction.
/// This also carries the full -alpha v decay of the traveler equation, so
/// the diffusion sub-step must not repeat it.
template <typename Scalar>
void exchange_substep(ScalarFieldT<Scalar>& u, TravelerFieldT<Scalar>& v, Scalar tau,
                      const CoreParamsT<Scalar>& params,
                      const ScalarFieldT<Scalar>& rho) {
  const Scalar rate = params.alpha + params.gamma;
  const Scalar decay = std::exp(-rate * tau);
  const Scalar at_home_fraction = params.alpha / rate;
  const Scalar survive = std::exp(-params.alpha * tau);

  const VectorX<Scalar> big_v = integrate_position(v).values;
  const VectorX<Scalar> total = u.values + big_v;
  VectorX<Scalar> u_new =
      at_home_fraction * total + decay * (u.values - at_home_fraction * total);
  VectorX<Scalar> deposit = total - u_new - survive * big_v;

  v.values *= survive;
  add_shifted_profile(v, deposit, rho);
  u.values = std::move(u_new);
}

template <typename State, typename StepFn, typename DiagFn>
auto march(State state, double total_time, double dt, Index sample_every,
           StepFn&& do_step, DiagFn&& diagnose)
    -> TrajectoryT<State, std::decay_t<decltype(diagnose(state))>> {
  if (!(total_time > 0)) throw std::invalid_argument("simulate: T must be > 0");
  if (!(dt > 0) || dt > total_time)
    throw std::invalid_argument("simulate: need 0 < dt <= T");
  if (sample_every < 1) throw std::invalid_argument("simulate: sample_every >= 1");

  TrajectoryT<State, std::decay_t<decltype(diagnose(state))>> out;
  out.append(state, diagnose(state));
  const double t_end = state.t + total_time;
  Index steps = 0;
  while (state.t < t_end - 1e-12 * total_time) {
    const double step_size = std::min(dt, t_end - state.t);
    state = do_step(state, step_size);
    ++steps;
    if (!state.all_finite())
      throw std::runtime_error("solver abort: non-finite values at t = " +
                               std::to_string(state.t));
    if (steps % sample_every == 0 || !(state.t < t_end - 1e-12 * total_time))
      out.append(state, diagnose(state));
  }
  return out;
}

}  // namespace detail

/// One Strang step: half exchange, full position diffusion, half exchange.
/// The u update is exact for any dt; v is second-order accurate.
template <typename Scalar>
CoreStateT<Scalar> step(const CoreStateT<Scalar>& state, Scalar dt,
                        const CoreParamsT<Scalar>& params) {
  if (!(dt > 0)) throw std::invalid_argument("step: dt must be > 0");
  params.validate();
  const auto rho = gaussian_rho(state.v.grid, params.sigma, false);
  SpectralPlanT<Scalar> plan(state.v.grid);
  const MatrixX<Scalar> heat = plan.heat_axis_operator(dt, params.epsilon);

  CoreStateT<Scalar> s = state;
  detail::exchange_substep(s.u, s.v, dt / 2, params, rho);
  apply_per_axis(s.v.values, heat, s.v.grid.points);
  detail::exchange_substep(s.u, s.v, dt / 2, params, rho);
  s.t += dt;
  if (!s.all_finite())
    throw std::runtime_error("solver abort: non-finite values at t = " +
                             std::to_string(s.t));
  return s;
}

/// Conserved per-home total h(y) = u(y) + int v(.,y) dx.
template <typename Scalar>
ScalarFieldT<Scalar> home_distribution(const CoreStateT<Scalar>& state) {
  ScalarFieldT<Scalar> h = integrate_position(state.v);
  h.values += state.u.values;
  return h;
}

/// Total population over space: w~(x) = int v(x,y) dy + (u * rho)(x),
/// with the second term evaluated as a circulant convolution.
template <typename Scalar>
ScalarFieldT<Scalar> total_distribution(const CoreStateT<Scalar>& state,
                                        const CoreParamsT<Scalar>& params) {
  SpectralPlanT<Scalar> plan(state.u.grid);
  const Scalar sigma = params.sigma;
  const auto rho_symbol = plan.symbol(
      [sigma](Scalar k2) { return std::exp(-Scalar(0.5) * sigma * sigma * k2); });
  ScalarFieldT<Scalar> out = plan.convolve(state.u, rho_symbol);
  out.values += integrate_home(state.v).values;
  return out;
}

template <typename Scalar>
DiagnosticsRow core_diagnostics(const CoreStateT<Scalar>& state,
                                const ScalarFieldT<Scalar>& reference_total) {
  DiagnosticsRow row;
  row.t = static_cast<double>(state.t);
  row.state_norm = static_cast<double>(norm_state(state.u, state.v));
  const Scalar scale = norm_sup(reference_total);
  const ScalarFieldT<Scalar> h = home_distribution(state);
  row.conservation_residual =
      scale > 0 ? static_cast<double>((h.values - reference_total.values)
                                          .cwiseAbs()
                                          .maxCoeff() /
                                      scale)
                : static_cast<double>((h.values - reference_total.values)
                                          .cwiseAbs()
                                          .maxCoeff());
  row.min_value = static_cast<double>(state.min_value());
  return row;
}

/// Repeated stepping with sampled diagnostics; the last step is shortened
/// so the final state lands on t0 + T.
template <typename Scalar>
TrajectoryT<CoreStateT<Scalar>> simulate(const CoreStateT<Scalar>& state0,
                                         Scalar total_time, Scalar dt,
                                         const CoreParamsT<Scalar>& params,
                                         Index sample_every = 1) {
  const ScalarFieldT<Scalar> h0 = home_distribution(state0);
  return detail::march(
      state0, static_cast<double>(total_time), static_cast<double>(dt), sample_every,
      [&](const CoreStateT<Scalar>& s, double step_size) {
        return step(s, static_cast<Scalar>(step_size), params);
      },
      [&](const CoreStateT<Scalar>& s) { return core_diagnostics(s, h0); });
}

}  // namespace rth
