#pragma once

#include "rth/grid.hpp"

#include <zlib.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace rth {

struct Image {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  // 3 bytes per pixel, row major from the top

  Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t at = 3 * (static_cast<std::size_t>(y) * width + x);
    rgb[at] = r;
    rgb[at + 1] = g;
    rgb[at + 2] = b;
  }

  void fill(int x0, int y0, int w, int h, unsigned char r, unsigned char g,
            unsigned char b) {
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) set(x, y, r, g, b);
  }
};

namespace detail {

// 5x7 bitmap glyphs, one byte per row, bit 4 = leftmost column.
inline const unsigned char* glyph(char c) {
  static constexpr unsigned char digits[10][7] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
  static constexpr unsigned char letters[26][7] = {
      {0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F},  // a
      {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E},  // b
      {0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E},  // c
      {0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F},  // d
      {0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E},  // e
      {0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08},  // f
      {0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E},  // g
      {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11},  // h
      {0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E},  // i
      {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C},  // j
      {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12},  // k
      {0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E},  // l
      {0x00, 0x00, 0x1A, 0x15, 0x15, 0x11, 0x11},  // m
      {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11},  // n
      {0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E},  // o
      {0x00, 0x00, 0x1E, 0x11, 0x1E, 0x10, 0x10},  // p
      {0x00, 0x00, 0x0D, 0x13, 0x0F, 0x01, 0x01},  // q
      {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10},  // r
      {0x00, 0x00, 0x0E, 0x10, 0x0E, 0x01, 0x1E},  // s
      {0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06},  // t
      {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D},  // u
      {0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04},  // v
      {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A},  // w
      {0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11},  // x
      {0x00, 0x00, 0x11, 0x11, 0x0F, 0x01, 0x0E},  // y
      {0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F}}; // z
  static constexpr unsigned char minus[7] = {0x00, 0x00, 0x00, 0x0E, 0x00, 0x00, 0x00};
  static constexpr unsigned char plus[7] = {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00};
  static constexpr unsigned char dot[7] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
  static constexpr unsigned char comma[7] = {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08};
  static constexpr unsigned char equal[7] = {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00};
  static constexpr unsigned char colon[7] = {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00};
  static constexpr unsigned char under[7] = {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F};
  static constexpr unsigned char slash[7] = {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10};
  static constexpr unsigned char space[7] = {0, 0, 0, 0, 0, 0, 0};
  static constexpr unsigned char box[7] = {0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F};

  if (c >= '0' && c <= '9') return digits[c - '0'];
  if (c >= 'a' && c <= 'z') return letters[c - 'a'];
  if (c >= 'A' && c <= 'Z') return letters[c - 'A'];
  switch (c) {
    case '-': return minus;
    case '+': return plus;
    case '.': return dot;
    case ',': return comma;
    case '=': return equal;
    case ':': return colon;
    case '_': return under;
    case '/': return slash;
    case ' ': return space;
    default: return box;
  }
}

inline void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

inline void put_chunk(std::vector<unsigned char>& out, const char type[5],
                      const std::vector<unsigned char>& payload) {
  put_be32(out, static_cast<std::uint32_t>(payload.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), payload.begin(), payload.end());
  const auto crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(out.size() - crc_start));
  put_be32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline void draw_text(Image& img, int x, int y, const std::string& text, int scale = 1,
                      unsigned char r = 0, unsigned char g = 0, unsigned char b = 0) {
  int cx = x;
  for (char c : text) {
    const unsigned char* rows = detail::glyph(c);
    for (int row = 0; row < 7; ++row)
      for (int col = 0; col < 5; ++col)
        if (rows[row] & (0x10 >> col))
          img.fill(cx + col * scale, y + row * scale, scale, scale, r, g, b);
    cx += 6 * scale;
  }
}

/// Linear blue-cyan-green-yellow-red ramp.
inline std::array<unsigned char, 3> colormap(double t) {
  static constexpr double anchors[5][3] = {{0.05, 0.03, 0.35},
                                           {0.10, 0.60, 0.85},
                                           {0.10, 0.75, 0.30},
                                           {0.95, 0.85, 0.10},
                                           {0.80, 0.10, 0.10}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(t));
  const double f = t - k;
  std::array<unsigned char, 3> out{};
  for (int c = 0; c < 3; ++c) {
    const double v = anchors[k][c] * (1 - f) + anchors[k + 1][c] * f;
    out[static_cast<std::size_t>(c)] = static_cast<unsigned char>(255.0 * v + 0.5);
  }
  return out;
}

/// Write an 8-bit RGB PNG (zlib-deflated, filter 0 rows).
inline void write_png(const std::filesystem::path& path, const Image& img) {
  std::vector<unsigned char> raw;
  raw.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * static_cast<std::size_t>(img.width)));
  for (int y = 0; y < img.height; ++y) {
    raw.push_back(0);  // filter: none
    const std::size_t at = 3 * static_cast<std::size_t>(y) * img.width;
    raw.insert(raw.end(), img.rgb.begin() + static_cast<std::ptrdiff_t>(at),
               img.rgb.begin() + static_cast<std::ptrdiff_t>(at + 3 * static_cast<std::size_t>(img.width)));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<unsigned char> deflated(bound);
  if (compress2(deflated.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
    throw std::runtime_error("png: deflate failed");
  deflated.resize(bound);

  std::vector<unsigned char> file = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  std::vector<unsigned char> ihdr;
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.width));
  detail::put_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: RGB
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  detail::put_chunk(file, "IHDR", ihdr);
  detail::put_chunk(file, "IDAT", deflated);
  detail::put_chunk(file, "IEND", {});

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(file.data()), static_cast<std::streamsize>(file.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

/// Heatmap of a grid field with axis ticks in domain coordinates, a linear
/// colorbar, and a title. The first field axis runs left to right, the
/// second bottom to top.
inline void render_heatmap(const std::filesystem::path& path, const ScalarField& field,
                           const std::string& title) {
  const Index n = field.grid.points;
  const double length = field.grid.length;
  const int cell = std::max<int>(2, static_cast<int>(320 / n));
  const int plot = static_cast<int>(n) * cell;
  const int left = 54, bottom = 30, top = 22, right = 76;
  Image img(left + plot + right, top + plot + bottom);

  double lo = field.values.minCoeff();
  double hi = field.values.maxCoeff();
  const bool flat = !(hi > lo);

  for (Index i1 = 0; i1 < n; ++i1)
    for (Index i2 = 0; i2 < n; ++i2) {
      const double t = flat ? 0.5 : (field(i1, i2) - lo) / (hi - lo);
      const auto c = colormap(t);
      img.fill(left + static_cast<int>(i1) * cell,
               top + static_cast<int>(n - 1 - i2) * cell, cell, cell, c[0], c[1], c[2]);
    }

  draw_text(img, left, top - 12, title, 1);

  // Axis ticks at quarters of the domain.
  char label[32];
  for (int k = 0; k <= 4; ++k) {
    const double coord = -0.5 * length + 0.25 * k * length;
    const int px = left + static_cast<int>((plot - 1) * k / 4.0);
    img.fill(px, top + plot, 1, 4, 0, 0, 0);
    std::snprintf(label, sizeof(label), "%g", coord);
    draw_text(img, px - 3 * static_cast<int>(std::strlen(label)),
              top + plot + 7, label, 1);
    const int py = top + plot - 1 - static_cast<int>((plot - 1) * k / 4.0);
    img.fill(left - 4, py, 4, 1, 0, 0, 0);
    draw_text(img, 2, py - 3, label, 1);
  }

  // Colorbar with end labels.
  const int bar_x = left + plot + 18, bar_w = 14;
  for (int y = 0; y < plot; ++y) {
    const auto c = colormap(1.0 - static_cast<double>(y) / (plot - 1));
    img.fill(bar_x, top + y, bar_w, 1, c[0], c[1], c[2]);
  }
  std::snprintf(label, sizeof(label), "%.3g", hi);
  draw_text(img, bar_x + bar_w + 3, top, label, 1);
  std::snprintf(label, sizeof(label), "%.3g", lo);
  draw_text(img, bar_x + bar_w + 3, top + plot - 7, label, 1);

  write_png(path, img);
}

}  // namespace rth
