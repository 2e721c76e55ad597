#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "cardioflow/errors.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::anatomy {

enum class Label : std::uint8_t { kBackground = 0, kLVC = 1, kLVM = 2, kRVC = 3 };

inline constexpr std::array<Label, 3> kStructures = {Label::kLVC, Label::kLVM, Label::kRVC};
inline constexpr int kSegmentCount = 6;

inline const char* label_name(Label l) {
  switch (l) {
    case Label::kBackground: return "background";
    case Label::kLVC: return "LVC";
    case Label::kLVM: return "LVM";
    case Label::kRVC: return "RVC";
  }
  return "?";
}

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(Pixel, Pixel) = default;
  friend auto operator<=>(Pixel a, Pixel b) { return a.y != b.y ? a.y <=> b.y : a.x <=> b.x; }
};

using PixelSet = std::vector<Pixel>;  // row-major order

/// Per-pixel categorical segmentation over {background, LVC, LVM, RVC}.
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(int width, int height) : codes_(width, height, 0) {}

  /// Validates that every code is one of the four labels.
  static LabelMask from_codes(Grid<std::uint8_t> codes) {
    for (auto c : codes.values()) {
      if (c > 3) throw FormatError("label code " + std::to_string(c) + " outside {0,1,2,3}");
    }
    LabelMask m;
    m.codes_ = std::move(codes);
    return m;
  }

  int width() const noexcept { return codes_.width(); }
  int height() const noexcept { return codes_.height(); }
  bool contains(int x, int y) const noexcept { return codes_.contains(x, y); }

  Label operator()(int x, int y) const { return static_cast<Label>(codes_(x, y)); }
  void set(int x, int y, Label l) { codes_(x, y) = static_cast<std::uint8_t>(l); }

  const Grid<std::uint8_t>& codes() const noexcept { return codes_; }

  std::size_t count(Label l) const {
    std::size_t n = 0;
    for (auto c : codes_.values()) n += (c == static_cast<std::uint8_t>(l));
    return n;
  }

  /// Binary 0/1 image of one structure.
  Image binary(Label l) const {
    Image out(width(), height());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = codes_[i] == static_cast<std::uint8_t>(l) ? 1.0 : 0.0;
    return out;
  }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  Grid<std::uint8_t> codes_;
};

/// Arithmetic mean of the pixel coordinates carrying `l`.
inline Vec2 barycenter(const LabelMask& mask, Label l) {
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) == l) {
        sx += x;
        sy += y;
        ++n;
      }
    }
  }
  if (n == 0) throw MissingStructureError(static_cast<int>(l));
  return {sx / n, sy / n};
}

/// Angle of `v` measured from `ref`, positive rotation from +x toward +y, in [0, 2pi).
inline double angle_from(Vec2 ref, Vec2 v) {
  const double cross = ref.x * v.y - ref.y * v.x;
  const double dot = ref.x * v.x + ref.y * v.y;
  double a = std::atan2(cross, dot);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  if (a >= 2.0 * std::numbers::pi) a -= 2.0 * std::numbers::pi;
  return a;
}

inline int segment_of_angle(double angle) {
  const int k = static_cast<int>(std::floor(angle / (std::numbers::pi / 3.0)));
  return std::clamp(k, 0, kSegmentCount - 1);
}

/// Assignment of LVM pixels to the six angular myocardial segments.
struct SegmentMap {
  Grid<std::int8_t> assignment;  // -1 outside LVM
  Vec2 b_l;                      // LVC barycenter
  Vec2 b_r;                      // RVC barycenter

  int segment(int x, int y) const { return assignment(x, y); }

  std::array<std::size_t, kSegmentCount> counts() const {
    std::array<std::size_t, kSegmentCount> c{};
    for (auto k : assignment.values()) {
      if (k >= 0) ++c[static_cast<std::size_t>(k)];
    }
    return c;
  }
};

/// Splits LVM into six segments by the angle between B_L->P and B_L->B_R.
inline SegmentMap divide_segments(const LabelMask& mask) {
  SegmentMap seg;
  seg.b_l = barycenter(mask, Label::kLVC);
  seg.b_r = barycenter(mask, Label::kRVC);
  if (mask.count(Label::kLVM) == 0) throw MissingStructureError(static_cast<int>(Label::kLVM));
  const Vec2 ref = seg.b_r - seg.b_l;
  if (ref.norm() == 0.0) {
    throw ValidationError("mask", "LVC and RVC barycenters coincide; segment reference direction undefined");
  }
  seg.assignment = Grid<std::int8_t>(mask.width(), mask.height(), -1);
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) != Label::kLVM) continue;
      const Vec2 v = Vec2{static_cast<double>(x), static_cast<double>(y)} - seg.b_l;
      const int k = (v.x == 0.0 && v.y == 0.0) ? 0 : segment_of_angle(angle_from(ref, v));
      seg.assignment(x, y) = static_cast<std::int8_t>(k);
    }
  }
  return seg;
}

namespace detail {

inline constexpr std::array<std::array<int, 2>, 4> kNeighbors4 = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

inline void require_segment(const SegmentMap& seg, int k) {
  if (k < 0 || k >= kSegmentCount) throw DomainError("segment index " + std::to_string(k) + " outside [0,5]");
  if (seg.counts()[static_cast<std::size_t>(k)] == 0) throw DegenerateSegmentError(k, "segment is empty");
}

}  // namespace detail

/// LVC pixels with at least one 4-neighbor in segment k.
inline PixelSet inner_boundary(const LabelMask& mask, const SegmentMap& seg, int k) {
  detail::require_segment(seg, k);
  PixelSet out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (mask(x, y) != Label::kLVC) continue;
      for (auto [dx, dy] : detail::kNeighbors4) {
        if (mask.contains(x + dx, y + dy) && seg.segment(x + dx, y + dy) == k) {
          out.push_back({x, y});
          break;
        }
      }
    }
  }
  if (out.empty()) throw DegenerateSegmentError(k, "no cavity pixel adjacent to the segment");
  return out;
}

/// Pixels of segment k with at least one 4-neighbor labelled background.
inline PixelSet outer_boundary(const LabelMask& mask, const SegmentMap& seg, int k) {
  detail::require_segment(seg, k);
  PixelSet out;
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (seg.segment(x, y) != k) continue;
      for (auto [dx, dy] : detail::kNeighbors4) {
        if (mask.contains(x + dx, y + dy) && mask(x + dx, y + dy) == Label::kBackground) {
          out.push_back({x, y});
          break;
        }
      }
    }
  }
  if (out.empty()) throw DegenerateSegmentError(k, "no background pixel adjacent to the segment");
  return out;
}

}  // namespace cardioflow::anatomy
