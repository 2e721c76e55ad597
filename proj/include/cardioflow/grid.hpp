#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "cardioflow/errors.hpp"

namespace cardioflow {

/// 2-D point or vector in pixel units. x grows to the right, y grows downward.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;
  double norm() const { return std::hypot(x, y); }
};

/// Row-major dense grid. Element (x, y) lives at y * width + x.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height), data_(static_cast<std::size_t>(checked_area(width, height)), fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  bool same_shape(const auto& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  T& operator()(int x, int y) {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const {
    assert(contains(x, y));
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static long checked_area(int w, int h) {
    if (w < 0 || h < 0) throw DomainError("grid dimensions must be non-negative");
    return static_cast<long>(w) * h;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image = Grid<double>;

/// Bilinear interpolant value and its spatial derivatives at a sampling point.
struct BilinearSample {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

namespace detail {

// Locates the interpolation cell along one axis. Coordinates are clamped to
// [0, n-1]; the derivative along a clamped axis is zero.
struct AxisCell {
  int i0 = 0;
  int i1 = 0;
  double frac = 0.0;
  bool clamped = false;
};

inline AxisCell axis_cell(double c, int n) {
  AxisCell cell;
  const double hi = static_cast<double>(n - 1);
  if (c < 0.0) {
    c = 0.0;
    cell.clamped = true;
  } else if (c > hi) {
    c = hi;
    cell.clamped = true;
  }
  if (n == 1) return cell;
  cell.i0 = std::min(static_cast<int>(std::floor(c)), n - 2);
  cell.i1 = cell.i0 + 1;
  cell.frac = c - cell.i0;
  return cell;
}

}  // namespace detail

/// Samples `img` at the continuous position (x, y) with bilinear interpolation.
inline BilinearSample sample_bilinear(const Image& img, double x, double y) {
  const auto cx = detail::axis_cell(x, img.width());
  const auto cy = detail::axis_cell(y, img.height());
  const double v00 = img(cx.i0, cy.i0);
  const double v10 = img(cx.i1, cy.i0);
  const double v01 = img(cx.i0, cy.i1);
  const double v11 = img(cx.i1, cy.i1);
  const double fx = cx.frac;
  const double fy = cy.frac;
  BilinearSample s;
  s.value = (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
  if (!cx.clamped && img.width() > 1) s.dx = (1 - fy) * (v10 - v00) + fy * (v11 - v01);
  if (!cy.clamped && img.height() > 1) s.dy = (1 - fx) * (v01 - v00) + fx * (v11 - v10);
  return s;
}

/// Normalized 1-D Gaussian taps, radius ceil(3 sigma).
inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

/// Separable Gaussian blur with replicated borders.
inline Image gaussian_blur(const Image& src, double sigma) {
  if (sigma <= 0.0 || src.empty()) return src;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = src.width();
  const int h = src.height();
  Image tmp(w, h);
  std::vector<double> row(static_cast<std::size_t>(w + 2 * r));
  for (int y = 0; y < h; ++y) {
    for (int i = 0; i < w + 2 * r; ++i) row[static_cast<std::size_t>(i)] = src(std::clamp(i - r, 0, w - 1), y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i <= 2 * r; ++i) acc += k[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(x + i)];
      tmp(x, y) = acc;
    }
  }
  // Vertical pass row by row so the inner loop runs over contiguous memory.
  Image out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    double* dst = &out(0, y);
    for (int i = -r; i <= r; ++i) {
      const double kv = k[static_cast<std::size_t>(i + r)];
      const double* s_row = &tmp(0, std::clamp(y + i, 0, h - 1));
      for (int x = 0; x < w; ++x) dst[x] += kv * s_row[x];
    }
  }
  return out;
}

/// 2x2 box downsampling; an odd trailing row/column is folded into the last cell.
inline Image downsample2(const Image& src) {
  const int w = std::max(1, src.width() / 2);
  const int h = std::max(1, src.height() / 2);
  Image out(w, h);
  std::vector<int> count(out.size(), 0);
  for (int y = 0; y < src.height(); ++y) {
    const int cy = std::min(y / 2, h - 1);
    for (int x = 0; x < src.width(); ++x) {
      const int cx = std::min(x / 2, w - 1);
      out(cx, cy) += src(x, y);
      ++count[static_cast<std::size_t>(cy) * w + cx];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= count[i];
  return out;
}

}  // namespace cardioflow
