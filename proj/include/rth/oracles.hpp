#pragma once

#include "rth/epidemic.hpp"

namespace rth::oracles {

/// Direct periodization of the unit-mass Gaussian: sum of the closed-form
/// density over a (2*images+1)^2 block of periodic copies. Reference for
/// the symbol-defined gaussian_rho; accurate once the discarded images are
/// below the target tolerance (sigma a few times smaller than L).
template <typename Scalar>
ScalarFieldT<Scalar> periodized_gaussian_direct(const GridSpec& grid, Scalar sigma,
                                                int images = 2) {
  ScalarFieldT<Scalar> f(grid);
  const Scalar norm = Scalar(1) / (Scalar(2) * std::numbers::pi_v<Scalar> * sigma * sigma);
  const Scalar inv_two_sigma2 = Scalar(1) / (Scalar(2) * sigma * sigma);
  for (Index i1 = 0; i1 < grid.points; ++i1)
    for (Index i2 = 0; i2 < grid.points; ++i2) {
      const Scalar x1 = static_cast<Scalar>(grid.node(i1));
      const Scalar x2 = static_cast<Scalar>(grid.node(i2));
      Scalar acc = 0;
      for (int n1 = -images; n1 <= images; ++n1)
        for (int n2 = -images; n2 <= images; ++n2) {
          const Scalar d1 = x1 + static_cast<Scalar>(n1) * static_cast<Scalar>(grid.length);
          const Scalar d2 = x2 + static_cast<Scalar>(n2) * static_cast<Scalar>(grid.length);
          acc += std::exp(-(d1 * d1 + d2 * d2) * inv_two_sigma2);
        }
      f(i1, i2) = norm * acc;
    }
  return f;
}

/// Composite-midpoint time quadrature of the defining integral of chi,
/// chi(z) = gamma int_0^inf e^{-alpha t} K(t + t0, z) dt, truncated where
/// e^{-alpha T} = tail. The kernel fields are summed mode-wise and
/// synthesized once at the end (the transform is linear).
template <typename Scalar>
ScalarFieldT<Scalar> chi_time_quadrature(const CoreParamsT<Scalar>& params,
                                         const GridSpec& grid, int nodes = 10000,
                                         Scalar tail = Scalar(1e-12)) {
  params.validate();
  const Scalar t0 = matching_time(params);
  const Scalar e2 = params.epsilon * params.epsilon;
  const Scalar horizon = -std::log(tail) / params.alpha;
  const Scalar dt = horizon / static_cast<Scalar>(nodes);

  SpectralPlanT<Scalar> plan(grid);
  const Index n = grid.points;
  MatrixX<Scalar> acc = MatrixX<Scalar>::Zero(n, n);
  for (int j = 0; j < nodes; ++j) {
    const Scalar t = (static_cast<Scalar>(j) + Scalar(0.5)) * dt;
    const Scalar decay = params.gamma * std::exp(-params.alpha * t) * dt;
    for (Index m1 = 0; m1 < n; ++m1)
      for (Index m2 = 0; m2 < n; ++m2) {
        const Scalar k1 = plan.wavenumbers()[m1];
        const Scalar k2 = plan.wavenumbers()[m2];
        acc(m1, m2) += decay * std::exp(-e2 * (k1 * k1 + k2 * k2) * (t + t0));
      }
  }
  return plan.synthesize(SpectralSymbolT<Scalar>{grid, acc});
}

/// Midpoint quadrature of the per-mode time integrals entering the explicit
/// traveler solution: for each mode,
///   factor2 = e^{-alpha t} int_0^t e^{-gamma s} e^{-eps^2 |k|^2 (t + t0 - s)} ds
///   factor3 =              int_0^t alpha e^{-alpha s} e^{-eps^2 |k|^2 (s + t0)} ds
/// Reference for the closed-form factors used by the analytic solution.
template <typename Scalar>
struct TravelerFactorQuadrature {
  MatrixX<Scalar> factor2;
  MatrixX<Scalar> factor3;
};

template <typename Scalar>
TravelerFactorQuadrature<Scalar> traveler_factors_quadrature(
    const CoreParamsT<Scalar>& params, const SpectralPlanT<Scalar>& plan, Scalar t,
    int nodes = 10000) {
  const Scalar t0 = matching_time(params);
  const Scalar e2 = params.epsilon * params.epsilon;
  const Index n = plan.grid().points;
  TravelerFactorQuadrature<Scalar> out;
  out.factor2 = MatrixX<Scalar>::Zero(n, n);
  out.factor3 = MatrixX<Scalar>::Zero(n, n);
  if (t <= 0) return out;
  const Scalar ds = t / static_cast<Scalar>(nodes);
  for (Index m1 = 0; m1 < n; ++m1)
    for (Index m2 = 0; m2 < n; ++m2) {
      const Scalar k1 = plan.wavenumbers()[m1];
      const Scalar k2 = plan.wavenumbers()[m2];
      const Scalar mode = e2 * (k1 * k1 + k2 * k2);
      Scalar acc2 = 0, acc3 = 0;
      for (int j = 0; j < nodes; ++j) {
        const Scalar s = (static_cast<Scalar>(j) + Scalar(0.5)) * ds;
        acc2 += std::exp(-params.gamma * s - mode * (t + t0 - s));
        acc3 += params.alpha * std::exp(-params.alpha * s - mode * (s + t0));
      }
      out.factor2(m1, m2) = std::exp(-params.alpha * t) * acc2 * ds;
      out.factor3(m1, m2) = acc3 * ds;
    }
  return out;
}

/// Classical RK4 on the full coupled epidemic system, every compartment
/// advanced together with the same spatial discretization as the split
/// stepper (spectral Laplacian, profile deposits). Brute-force reference
/// for step_epidemic; dt must resolve the fastest rate.
template <typename Scalar>
EpidemicStateT<Scalar> epidemic_rk4_reference(const EpidemicStateT<Scalar>& state0,
                                              Scalar total_time, Scalar dt,
                                              const CoreParamsT<Scalar>& core,
                                              const EpidemicParamsT<Scalar>& epi) {
  const GridSpec g = state0.grid();
  const Index n = g.points;
  const Scalar area = static_cast<Scalar>(g.cell_area());
  const Scalar e2 = core.epsilon * core.epsilon;

  SpectralPlanT<Scalar> plan(g);
  const MatrixX<Scalar> lap = plan.laplacian_axis_operator();
  const auto rho = gaussian_rho(g, core.sigma, false);
  // Deposit matrix: column y holds rho(. - y).
  const MatrixX<Scalar> deposit =
      traveler_from_kernel(rho, ScalarFieldT<Scalar>::constant(g, 1)).values;

  struct Block {
    VectorX<Scalar> s1, i1;
    MatrixX<Scalar> s2, i2;
  };
  const auto axpy = [](Block& y, Scalar a, const Block& x) {
    y.s1 += a * x.s1;
    y.i1 += a * x.i1;
    y.s2 += a * x.s2;
    y.i2 += a * x.i2;
  };

  Block y{state0.s1.values, state0.i1.values, state0.s2.values, state0.i2.values};
  Block k, stage = y;

  const auto rhs = [&](const Block& x, Block& out) {
    const VectorX<Scalar> vs = area * x.s2.colwise().sum().transpose();
    const VectorX<Scalar> vi = area * x.i2.colwise().sum().transpose();
    const VectorX<Scalar> pooled = area * x.i2.rowwise().sum();
    const VectorX<Scalar> t1 = epi.kappa1 * x.s1.cwiseProduct(x.i1);
    const MatrixX<Scalar> t2 =
        epi.kappa2 * (x.s2.array().colwise() * pooled.array()).matrix();

    out.s1 = core.alpha * vs - core.gamma * x.s1 - t1;
    out.i1 = core.alpha * vi - core.gamma * x.i1 + t1 - epi.nu1 * x.i1;
    out.s2 = e2 * apply_axis_sum(x.s2, lap, n) - core.alpha * x.s2 - t2;
    out.s2.noalias() += deposit * (core.gamma * x.s1).asDiagonal();
    out.i2 = e2 * apply_axis_sum(x.i2, lap, n) - core.alpha * x.i2 + t2 -
             epi.nu2 * x.i2;
    out.i2.noalias() += deposit * (core.gamma * x.i1).asDiagonal();
  };

  Block acc;
  const long steps = std::lround(static_cast<double>(total_time / dt));
  for (long it = 0; it < steps; ++it) {
    rhs(y, k);            // k1
    acc = y;
    axpy(acc, dt / 6, k);
    stage = y;
    axpy(stage, dt / 2, k);
    rhs(stage, k);        // k2
    axpy(acc, dt / 3, k);
    stage = y;
    axpy(stage, dt / 2, k);
    rhs(stage, k);        // k3
    axpy(acc, dt / 3, k);
    stage = y;
    axpy(stage, dt, k);
    rhs(stage, k);        // k4
    axpy(acc, dt / 6, k);
    y = acc;
  }

  EpidemicStateT<Scalar> out(g);
  out.t = state0.t + static_cast<Scalar>(steps) * dt;
  out.s1.values = y.s1;
  out.i1.values = y.i1;
  out.s2.values = y.s2;
  out.i2.values = y.i2;
  return out;
}

}  // namespace rth::oracles
