#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace rth {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using RowMajorMatrixX =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Periodic square grid shared by the position and home axes.
/// Nodes per axis: x_m = -L/2 + m*h, m = 0..N-1, h = L/N.
struct GridSpec {
  double length = 0.0;
  Index points = 0;

  double spacing() const { return length / static_cast<double>(points); }
  double node(Index m) const { return -0.5 * length + static_cast<double>(m) * spacing(); }
  Index node_count() const { return points * points; }

  /// Quadrature weight of one node (rectangle rule).
  double cell_area() const { return spacing() * spacing(); }

  bool operator==(const GridSpec& other) const {
    return length == other.length && points == other.points;
  }
  bool operator!=(const GridSpec& other) const { return !(*this == other); }
};

inline GridSpec make_grid(double length, Index points) {
  if (!(length > 0.0)) throw std::invalid_argument("grid: L must be positive");
  if (points < 4 || points % 2 != 0)
    throw std::invalid_argument("grid: N must be even, >= 4");
  return GridSpec{length, points};
}

inline Index wrap_index(Index i, Index n) { return ((i % n) + n) % n; }

/// Flat node index, first axis major: p = i1*N + i2.
inline Index flat_index(Index i1, Index i2, Index n) { return i1 * n + i2; }

enum class Frame { eulerian, lagrangian };

inline std::string frame_name(Frame f) {
  return f == Frame::eulerian ? "eulerian" : "lagrangian";
}

/// Real-valued field over the grid nodes (at-home densities, kernels,
/// equilibrium profiles). Values are stored flat with p = i1*N + i2.
template <typename Scalar>
struct ScalarFieldT {
  GridSpec grid;
  VectorX<Scalar> values;

  ScalarFieldT() = default;
  explicit ScalarFieldT(const GridSpec& g)
      : grid(g), values(VectorX<Scalar>::Zero(g.node_count())) {}
  ScalarFieldT(const GridSpec& g, VectorX<Scalar> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.node_count())
      throw std::invalid_argument("scalar field: value count != N^2");
  }

  static ScalarFieldT zero(const GridSpec& g) { return ScalarFieldT(g); }
  static ScalarFieldT constant(const GridSpec& g, Scalar c) {
    return ScalarFieldT(g, VectorX<Scalar>::Constant(g.node_count(), c));
  }

  Scalar& operator()(Index i1, Index i2) {
    return values[flat_index(i1, i2, grid.points)];
  }
  Scalar operator()(Index i1, Index i2) const {
    return values[flat_index(i1, i2, grid.points)];
  }

  /// N-by-N view, row index = first axis.
  Eigen::Map<RowMajorMatrixX<Scalar>> as_matrix() {
    return {values.data(), grid.points, grid.points};
  }
  Eigen::Map<const RowMajorMatrixX<Scalar>> as_matrix() const {
    return {values.data(), grid.points, grid.points};
  }
};

/// Traveler density over (position, home) node pairs. Rows index the
/// position node p, columns the home node q; the frame tag says whether
/// the row index means absolute position x or the offset z = x - y.
template <typename Scalar>
struct TravelerFieldT {
  GridSpec grid;
  Frame frame = Frame::eulerian;
  MatrixX<Scalar> values;

  TravelerFieldT() = default;
  TravelerFieldT(const GridSpec& g, Frame f)
      : grid(g), frame(f),
        values(MatrixX<Scalar>::Zero(g.node_count(), g.node_count())) {}
  TravelerFieldT(const GridSpec& g, Frame f, MatrixX<Scalar> v)
      : grid(g), frame(f), values(std::move(v)) {
    if (values.rows() != grid.node_count() || values.cols() != grid.node_count())
      throw std::invalid_argument("traveler field: value shape != N^2 x N^2");
  }

  static TravelerFieldT zero(const GridSpec& g, Frame f = Frame::eulerian) {
    return TravelerFieldT(g, f);
  }
  static TravelerFieldT constant(const GridSpec& g, Scalar c,
                                 Frame f = Frame::eulerian) {
    TravelerFieldT out(g, f);
    out.values.setConstant(c);
    return out;
  }
};

using ScalarField = ScalarFieldT<double>;
using TravelerField = TravelerFieldT<double>;

namespace detail {
inline void require_frame(Frame have, Frame want, const char* op) {
  if (have != want)
    throw std::invalid_argument(std::string(op) + ": expected " + frame_name(want) +
                                " frame, got " + frame_name(have));
}
}  // namespace detail

/// h^2 * sum of all values (rectangle-rule integral over the grid).
template <typename Scalar>
Scalar integral(const ScalarFieldT<Scalar>& f) {
  return static_cast<Scalar>(f.grid.cell_area()) * f.values.sum();
}

/// Integral over position for each home node: out(y) = h^2 sum_x v(x,y).
template <typename Scalar>
ScalarFieldT<Scalar> integrate_position(const TravelerFieldT<Scalar>& v) {
  detail::require_frame(v.frame, Frame::eulerian, "integrate_position");
  const auto w = static_cast<Scalar>(v.grid.cell_area());
  return ScalarFieldT<Scalar>(v.grid, w * v.values.colwise().sum().transpose());
}

/// Integral over home for each position node: out(x) = h^2 sum_y v(x,y).
/// The returned field is indexed by position nodes.
template <typename Scalar>
ScalarFieldT<Scalar> integrate_home(const TravelerFieldT<Scalar>& v) {
  detail::require_frame(v.frame, Frame::eulerian, "integrate_home");
  const auto w = static_cast<Scalar>(v.grid.cell_area());
  return ScalarFieldT<Scalar>(v.grid, w * v.values.rowwise().sum());
}

/// Index of the node whose coordinate is x_i - x_j (mod L). The half-count
/// offset comes from the nodes starting at -L/2 rather than 0.
inline Index offset_index(Index i, Index j, Index n) {
  return wrap_index(i - j + n / 2, n);
}

/// Exact index-shift change of variables w(z,y) = v(z+y, y), with z and x
/// read at node coordinates.
template <typename Scalar>
TravelerFieldT<Scalar> to_lagrangian(const TravelerFieldT<Scalar>& v) {
  detail::require_frame(v.frame, Frame::eulerian, "to_lagrangian");
  const Index n = v.grid.points;
  TravelerFieldT<Scalar> w(v.grid, Frame::lagrangian);
  for (Index j1 = 0; j1 < n; ++j1)
    for (Index j2 = 0; j2 < n; ++j2) {
      const Index q = flat_index(j1, j2, n);
      auto src = v.values.col(q);
      auto dst = w.values.col(q);
      for (Index z1 = 0; z1 < n; ++z1) {
        const Index x1 = wrap_index(z1 + j1 + n / 2, n);
        for (Index z2 = 0; z2 < n; ++z2)
          dst[flat_index(z1, z2, n)] =
              src[flat_index(x1, wrap_index(z2 + j2 + n / 2, n), n)];
      }
    }
  return w;
}

/// Inverse of to_lagrangian: v(x,y) = w(x-y, y). Bit-exact round trip.
template <typename Scalar>
TravelerFieldT<Scalar> to_eulerian(const TravelerFieldT<Scalar>& w) {
  detail::require_frame(w.frame, Frame::lagrangian, "to_eulerian");
  const Index n = w.grid.points;
  TravelerFieldT<Scalar> v(w.grid, Frame::eulerian);
  for (Index j1 = 0; j1 < n; ++j1)
    for (Index j2 = 0; j2 < n; ++j2) {
      const Index q = flat_index(j1, j2, n);
      auto src = w.values.col(q);
      auto dst = v.values.col(q);
      for (Index x1 = 0; x1 < n; ++x1) {
        const Index z1 = offset_index(x1, j1, n);
        for (Index x2 = 0; x2 < n; ++x2)
          dst[flat_index(x1, x2, n)] = src[flat_index(z1, offset_index(x2, j2, n), n)];
      }
    }
  return v;
}

/// sup over position of the home-integrated absolute density.
template <typename Scalar>
Scalar norm_y1(const TravelerFieldT<Scalar>& v) {
  if (v.frame == Frame::lagrangian) return norm_y1(to_eulerian(v));
  const auto w = static_cast<Scalar>(v.grid.cell_area());
  return w * v.values.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Offset-integral of the home-sup of |w(z,y)|, taken in the Lagrangian frame.
template <typename Scalar>
Scalar norm_y2(const TravelerFieldT<Scalar>& v) {
  if (v.frame == Frame::eulerian) return norm_y2(to_lagrangian(v));
  const auto area = static_cast<Scalar>(v.grid.cell_area());
  return area * v.values.cwiseAbs().rowwise().maxCoeff().sum();
}

template <typename Scalar>
Scalar norm_sup(const ScalarFieldT<Scalar>& u) {
  return u.values.size() == 0 ? Scalar(0) : u.values.cwiseAbs().maxCoeff();
}

/// State norm: ||u||_inf + ||v||_Y1 + ||v||_Y2.
template <typename Scalar>
Scalar norm_state(const ScalarFieldT<Scalar>& u, const TravelerFieldT<Scalar>& v) {
  return norm_sup(u) + norm_y1(v) + norm_y2(v);
}

}  // namespace rth
