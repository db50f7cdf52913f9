#pragma once

#include "rth/grid.hpp"

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rth {

static_assert(std::endian::native == std::endian::little,
              "snapshot payloads are little-endian");

/// Round-trip decimal formatting (17 significant digits).
inline std::string full_precision(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Either kind of field, as read back from disk.
struct Snapshot {
  bool is_traveler = false;
  ScalarField scalar;
  TravelerField traveler;

  const GridSpec& grid() const { return is_traveler ? traveler.grid : scalar.grid; }
};

namespace detail {

inline void write_header(std::ostream& os, const GridSpec& g, const std::string& frame) {
  os << "RHSIM1 " << g.points << ' ' << full_precision(g.length) << ' ' << frame
     << '\n';
}

inline void write_doubles(std::ostream& os, const double* data, std::size_t count) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

}  // namespace detail

/// Binary snapshot: header line `RHSIM1 <N> <L> <frame>`, then the float64
/// payload in row-major order (position-major for traveler fields).
inline void write_snapshot(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  detail::write_header(os, f.grid, "scalar");
  detail::write_doubles(os, f.values.data(), static_cast<std::size_t>(f.values.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline void write_snapshot(const std::filesystem::path& path, const TravelerField& v) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  detail::write_header(os, v.grid, frame_name(v.frame));
  // Row (position) major: all home nodes for one position node, then the next.
  std::vector<double> row(static_cast<std::size_t>(v.values.cols()));
  for (Index p = 0; p < v.values.rows(); ++p) {
    for (Index q = 0; q < v.values.cols(); ++q) row[static_cast<std::size_t>(q)] = v.values(p, q);
    detail::write_doubles(os, row.data(), row.size());
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

inline Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("missing header: " + path.string());
  std::istringstream header(line);
  std::string magic, frame;
  Index n = 0;
  double length = 0;
  header >> magic >> n >> length >> frame;
  if (magic != "RHSIM1" || !header)
    throw std::runtime_error("not a RHSIM1 snapshot: " + path.string());
  const GridSpec g = make_grid(length, n);

  Snapshot snap;
  if (frame == "scalar") {
    snap.is_traveler = false;
    snap.scalar = ScalarField(g);
    is.read(reinterpret_cast<char*>(snap.scalar.values.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(g.node_count())));
  } else if (frame == "eulerian" || frame == "lagrangian") {
    snap.is_traveler = true;
    snap.traveler = TravelerField(
        g, frame == "eulerian" ? Frame::eulerian : Frame::lagrangian);
    std::vector<double> row(static_cast<std::size_t>(g.node_count()));
    for (Index p = 0; p < g.node_count(); ++p) {
      is.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(sizeof(double) * row.size()));
      for (Index q = 0; q < g.node_count(); ++q)
        snap.traveler.values(p, q) = row[static_cast<std::size_t>(q)];
    }
  } else {
    throw std::runtime_error("unknown frame tag '" + frame + "' in " + path.string());
  }
  if (!is) throw std::runtime_error("truncated payload: " + path.string());
  return snap;
}

/// Plain-text export, one row per node: coordinates then value.
inline void write_csv(const std::filesystem::path& path, const ScalarField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << "y1,y2,value\n";
  const Index n = f.grid.points;
  for (Index i1 = 0; i1 < n; ++i1)
    for (Index i2 = 0; i2 < n; ++i2)
      os << full_precision(f.grid.node(i1)) << ',' << full_precision(f.grid.node(i2))
         << ',' << full_precision(f(i1, i2)) << '\n';
}

inline void write_csv(const std::filesystem::path& path, const TravelerField& v) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << (v.frame == Frame::eulerian ? "x1,x2,y1,y2,value\n" : "z1,z2,y1,y2,value\n");
  const Index n = v.grid.points;
  for (Index p1 = 0; p1 < n; ++p1)
    for (Index p2 = 0; p2 < n; ++p2)
      for (Index j1 = 0; j1 < n; ++j1)
        for (Index j2 = 0; j2 < n; ++j2)
          os << full_precision(v.grid.node(p1)) << ',' << full_precision(v.grid.node(p2))
             << ',' << full_precision(v.grid.node(j1)) << ','
             << full_precision(v.grid.node(j2)) << ','
             << full_precision(v.values(flat_index(p1, p2, n), flat_index(j1, j2, n)))
             << '\n';
}

}  // namespace rth
