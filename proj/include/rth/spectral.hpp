#pragma once

#include "rth/grid.hpp"

#include <complex>
#include <numbers>

namespace rth {

/// Real mode weights over wavenumbers k = 2*pi*m~/L, with m~ in the
/// centered range stored in FFT order (m~ = m for m < N/2, m - N after).
template <typename Scalar>
struct SpectralSymbolT {
  GridSpec grid;
  MatrixX<Scalar> values;  // (m1, m2)
};

using SpectralSymbol = SpectralSymbolT<double>;

/// Dense discrete Fourier transform pair on one grid.
///
/// Conventions: forward coefficients f^(k) = h^2 sum_x f(x) e^{-i k.x}, so
/// the k = 0 coefficient equals the rectangle-rule integral, and inverse
/// f(x) = (1/L^2) sum_k f^(k) e^{+i k.x}. At N <= a few hundred the dense
/// matrices beat any FFT setup cost and keep Eigen the only dependency.
template <typename Scalar>
class SpectralPlanT {
 public:
  using Complex = std::complex<Scalar>;

  explicit SpectralPlanT(const GridSpec& grid) : grid_(grid) {
    const Index n = grid.points;
    const Scalar h = static_cast<Scalar>(grid.spacing());
    const Scalar inv_l = Scalar(1) / static_cast<Scalar>(grid.length);
    wavenumbers_.resize(n);
    for (Index m = 0; m < n; ++m) {
      const Index m_centered = m < n / 2 ? m : m - n;
      wavenumbers_[m] = Scalar(2) * std::numbers::pi_v<Scalar> *
                        static_cast<Scalar>(m_centered) * inv_l;
    }
    forward_.resize(n, n);
    inverse_.resize(n, n);
    for (Index m = 0; m < n; ++m)
      for (Index j = 0; j < n; ++j) {
        const Scalar phase = wavenumbers_[m] * static_cast<Scalar>(grid.node(j));
        forward_(m, j) = h * Complex(std::cos(phase), -std::sin(phase));
        inverse_(j, m) = inv_l * Complex(std::cos(phase), std::sin(phase));
      }
  }

  const GridSpec& grid() const { return grid_; }
  const VectorX<Scalar>& wavenumbers() const { return wavenumbers_; }

  /// Build a symbol from a radial function of |k|^2.
  template <typename Fn>
  SpectralSymbolT<Scalar> symbol(Fn&& fn) const {
    const Index n = grid_.points;
    SpectralSymbolT<Scalar> s{grid_, MatrixX<Scalar>(n, n)};
    for (Index m1 = 0; m1 < n; ++m1)
      for (Index m2 = 0; m2 < n; ++m2)
        s.values(m1, m2) =
            fn(wavenumbers_[m1] * wavenumbers_[m1] + wavenumbers_[m2] * wavenumbers_[m2]);
    return s;
  }

  /// Mode coefficients of a field, FFT order.
  MatrixX<Complex> analyze(const ScalarFieldT<Scalar>& f) const {
    MatrixX<Complex> x = f.as_matrix().template cast<Complex>();
    return forward_ * x * forward_.transpose();
  }

  /// Field with the given mode coefficients (real part; imaginary parts
  /// cancel for symbols that are even in k).
  ScalarFieldT<Scalar> synthesize(const MatrixX<Complex>& coeffs) const {
    MatrixX<Complex> x = inverse_ * coeffs * inverse_.transpose();
    ScalarFieldT<Scalar> f(grid_);
    f.as_matrix() = x.real();
    return f;
  }

  ScalarFieldT<Scalar> synthesize(const SpectralSymbolT<Scalar>& s) const {
    return synthesize(MatrixX<Complex>(s.values.template cast<Complex>()));
  }

  /// Circulant convolution: field with coefficients f^(k) * s(k).
  ScalarFieldT<Scalar> convolve(const ScalarFieldT<Scalar>& f,
                                const SpectralSymbolT<Scalar>& s) const {
    MatrixX<Complex> c = analyze(f);
    c.array() *= s.values.template cast<Complex>().array();
    return synthesize(c);
  }

  /// One-axis real operator with the given 1-D mode weights
  /// (a symmetric circulant; rows sum to the k = 0 weight).
  MatrixX<Scalar> axis_operator(const VectorX<Scalar>& weights_1d) const {
    MatrixX<Complex> op = inverse_ * weights_1d.template cast<Complex>().asDiagonal() *
                          forward_;
    return op.real();
  }

  MatrixX<Scalar> heat_axis_operator(Scalar t, Scalar epsilon) const {
    VectorX<Scalar> w(grid_.points);
    for (Index m = 0; m < grid_.points; ++m)
      w[m] = std::exp(-epsilon * epsilon * wavenumbers_[m] * wavenumbers_[m] * t);
    return axis_operator(w);
  }

  MatrixX<Scalar> laplacian_axis_operator() const {
    VectorX<Scalar> w(grid_.points);
    for (Index m = 0; m < grid_.points; ++m) w[m] = -wavenumbers_[m] * wavenumbers_[m];
    return axis_operator(w);
  }

 private:
  GridSpec grid_;
  VectorX<Scalar> wavenumbers_;
  MatrixX<Complex> forward_;   // (mode, node)
  MatrixX<Complex> inverse_;   // (node, mode)
};

using SpectralPlan = SpectralPlanT<double>;

/// Apply a one-axis operator on both components of the position index of a
/// traveler-field value block: V <- (Op (x) Op) V. Rows are p = i1*N + i2.
template <typename Scalar>
void apply_per_axis(MatrixX<Scalar>& values, const MatrixX<Scalar>& op, Index n) {
  const Index cols = values.cols();
  // Second position component is contiguous: one wide product.
  Eigen::Map<MatrixX<Scalar>> wide(values.data(), n, n * cols);
  MatrixX<Scalar> tmp = op * wide;
  wide = tmp;
  // Swap the position components, repeat, swap back.
  for (Index q = 0; q < cols; ++q)
    Eigen::Map<MatrixX<Scalar>>(values.col(q).data(), n, n).transposeInPlace();
  tmp.noalias() = op * wide;
  wide = tmp;
  for (Index q = 0; q < cols; ++q)
    Eigen::Map<MatrixX<Scalar>>(values.col(q).data(), n, n).transposeInPlace();
}

/// V <- (Op (x) I + I (x) Op) V, e.g. the 2-D Laplacian from its 1-D factor.
template <typename Scalar>
MatrixX<Scalar> apply_axis_sum(const MatrixX<Scalar>& values, const MatrixX<Scalar>& op,
                               Index n) {
  const Index cols = values.cols();
  MatrixX<Scalar> out(values.rows(), cols);
  Eigen::Map<const MatrixX<Scalar>> wide(values.data(), n, n * cols);
  Eigen::Map<MatrixX<Scalar>> out_wide(out.data(), n, n * cols);
  out_wide.noalias() = op * wide;
  for (Index q = 0; q < cols; ++q) {
    Eigen::Map<const MatrixX<Scalar>> x(values.col(q).data(), n, n);
    Eigen::Map<MatrixX<Scalar>> o(out.col(q).data(), n, n);
    o.noalias() += x * op.transpose();
  }
  return out;
}

}  // namespace rth
