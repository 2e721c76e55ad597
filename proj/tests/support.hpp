#pragma once

// Shared helpers for the test binaries. Oracles here are written
// independently of the library code they check.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <random>
#include <vector>

#include "cardioflow/cardioflow.hpp"

namespace cftest {

using namespace cardioflow;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Image random_image(int w, int h, std::mt19937_64& rng) {
  Image img(w, h);
  for (auto& v : img.values()) v = uniform(rng, 0.0, 1.0);
  return img;
}

inline anatomy::LabelMask random_mask(int w, int h, std::mt19937_64& rng) {
  anatomy::LabelMask m(w, h);
  std::uniform_int_distribution<int> d(0, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) m.set(x, y, static_cast<anatomy::Label>(d(rng)));
  }
  return m;
}

/// Concentric LV ring (cavity radius rn, wall w) plus an RVC disc to the right.
inline anatomy::LabelMask ring_mask(int n, Vec2 c, double rn, double w, double rv_offset = 0.0, double rv_radius = 0.0) {
  anatomy::LabelMask m(n, n);
  if (rv_offset == 0.0) rv_offset = rn + w + 3.0 + 6.0;
  if (rv_radius == 0.0) rv_radius = 5.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(x - c.x, y - c.y);
      if (r < rn) m.set(x, y, anatomy::Label::kLVC);
      else if (r < rn + w) m.set(x, y, anatomy::Label::kLVM);
      else if (std::hypot(x - c.x - rv_offset, y - c.y) < rv_radius) m.set(x, y, anatomy::Label::kRVC);
    }
  }
  return m;
}

/// Radial scaling about `c` by factor s as a flow field: P -> c + s (P - c).
inline flow::FlowField radial_flow(int n, Vec2 c, double s) {
  flow::FlowField f(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      f.fx(x, y) = (s - 1.0) * (x - c.x);
      f.fy(x, y) = (s - 1.0) * (y - c.y);
    }
  }
  return f;
}

/// Per-structure hard Dice magnitude between two masks.
inline double hard_dice(const anatomy::LabelMask& a, const anatomy::LabelMask& b, anatomy::Label l) {
  double ia = 0, ib = 0, inter = 0;
  for (int y = 0; y < a.height(); ++y) {
    for (int x = 0; x < a.width(); ++x) {
      const bool pa = a(x, y) == l, pb = b(x, y) == l;
      ia += pa;
      ib += pb;
      inter += pa && pb;
    }
  }
  return ia + ib > 0 ? 2.0 * inter / (ia + ib) : 1.0;
}

/// Nearest-label pull-back of a mask through a flow: out(P) = m(round(P + F(P))).
inline anatomy::LabelMask warp_mask_nearest(const anatomy::LabelMask& m, const flow::FlowField& f) {
  anatomy::LabelMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      const int sx = static_cast<int>(std::lround(x + f.fx(x, y)));
      const int sy = static_cast<int>(std::lround(y + f.fy(x, y)));
      out.set(x, y, m.contains(sx, sy) ? m(sx, sy) : anatomy::Label::kBackground);
    }
  }
  return out;
}

/// Soft warped-structure Dice magnitude: ED structure vs ES structure pulled back through the flow.
inline double warped_dice(const anatomy::LabelMask& ed, const anatomy::LabelMask& es, const flow::FlowField& f, anatomy::Label l) {
  const Image a = ed.binary(l);
  const Image b = flow::warp_image(es.binary(l), f);
  double sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
  }
  return 2.0 * sab / (sa + sb);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("cftest_" + tag + "_" + std::to_string(rd()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace cftest
