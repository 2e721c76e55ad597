#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::motion {

inline constexpr int kInstants = 10;

enum class SliceMode { kApply, kTrain };

/// Half away from zero.
inline long round_half_away(double v) { return std::lround(v); }

struct MidStackSelection {
  int i1 = 0;  // first slice containing RVC
  int i2 = 0;  // last slice containing LVC
  int h = 0;
  int begin = 0;  // selected slices are [begin, end)
  int end = 0;

  std::vector<int> indices() const {
    std::vector<int> out;
    for (int s = begin; s < end; ++s) out.push_back(s);
    return out;
  }
};

inline MidStackSelection select_mid_stack(const std::vector<anatomy::LabelMask>& masks, SliceMode mode) {
  using anatomy::Label;
  int i1 = -1, i2 = -1;
  for (int s = 0; s < static_cast<int>(masks.size()); ++s) {
    if (i1 < 0 && masks[static_cast<std::size_t>(s)].count(Label::kRVC) > 0) i1 = s;
    if (masks[static_cast<std::size_t>(s)].count(Label::kLVC) > 0) i2 = s;
  }
  if (i1 < 0) throw MissingStructureError(static_cast<int>(Label::kRVC));
  if (i2 < 0) throw MissingStructureError(static_cast<int>(Label::kLVC));
  if (i1 > i2) throw InsufficientStackError("first RVC slice lies after the last LVC slice");
  MidStackSelection sel;
  sel.i1 = i1;
  sel.i2 = i2;
  sel.h = i2 - i1 + 1;
  const double top = mode == SliceMode::kApply ? 0.1 : 0.2;
  sel.begin = static_cast<int>(round_half_away(i1 + top * sel.h));
  sel.end = static_cast<int>(round_half_away(i2 + 1 - 0.2 * sel.h));
  if (sel.begin >= sel.end) {
    throw InsufficientStackError("mid-stack selection [" + std::to_string(sel.begin) + ", " + std::to_string(sel.end) +
                                 ") is empty");
  }
  return sel;
}

/// t_i = round(t0 + i f / 10) mod f for i in [0, 9].
inline std::array<int, kInstants> sample_frames(int f, int t0) {
  if (f < kInstants) throw UnsupportedSequenceError("need at least 10 frames per cycle, got " + std::to_string(f));
  if (t0 < 0 || t0 >= f) throw DomainError("ED index " + std::to_string(t0) + " outside [0, " + std::to_string(f) + ")");
  std::array<int, kInstants> t{};
  for (int i = 0; i < kInstants; ++i) {
    // (10 t0 + i f) / 10 keeps .5 ties exact in binary floating point
    const long r = round_half_away(static_cast<double>(10 * t0 + i * f) / 10.0);
    t[static_cast<std::size_t>(i)] = static_cast<int>(r % f);
  }
  return t;
}

/// RA (radius) and T (thickness) per segment k and instant i, mm/m^2.
struct SegmentSeries {
  std::array<std::array<double, kInstants>, anatomy::kSegmentCount> ra{};
  std::array<std::array<double, kInstants>, anatomy::kSegmentCount> th{};
  int slice_index = 0;
};

inline Vec2 warped_mean(const anatomy::PixelSet& pixels, const flow::FlowField& f) {
  double sx = 0.0, sy = 0.0;
  for (auto p : pixels) {
    sx += p.x + f.fx(p.x, p.y);
    sy += p.y + f.fy(p.x, p.y);
  }
  const double n = static_cast<double>(pixels.size());
  return {sx / n, sy / n};
}

/// Series of one slice from the flows F_{t_0..t_9}; flows[0] must be the null flow.
inline SegmentSeries extract_series(const std::vector<flow::FlowField>& flows, const anatomy::LabelMask& mask_ed,
                                    const anatomy::SegmentMap& seg, double bsa, double spacing_mm, int slice_index = 0) {
  if (flows.size() != kInstants) throw DomainError("extract_series needs 10 flows, got " + std::to_string(flows.size()));
  if (!(bsa > 0.0)) throw ValidationError("bsa", "must be > 0");
  if (!(spacing_mm > 0.0)) throw ValidationError("pixel_spacing", "must be > 0");
  for (const auto& f : flows) {
    if (f.width() != mask_ed.width() || f.height() != mask_ed.height()) {
      throw DomainError("extract_series: flow dimensions do not match the mask");
    }
  }
  for (std::size_t j = 0; j < flows[0].size(); ++j) {
    if (flows[0].fx[j] != 0.0 || flows[0].fy[j] != 0.0) throw DomainError("extract_series: F_t0 must be the null flow");
  }

  anatomy::PixelSet lvc;
  for (int y = 0; y < mask_ed.height(); ++y) {
    for (int x = 0; x < mask_ed.width(); ++x) {
      if (mask_ed(x, y) == anatomy::Label::kLVC) lvc.push_back({x, y});
    }
  }
  if (lvc.empty()) throw MissingStructureError(static_cast<int>(anatomy::Label::kLVC));
  std::array<anatomy::PixelSet, anatomy::kSegmentCount> inner, outer;
  for (int k = 0; k < anatomy::kSegmentCount; ++k) {
    inner[static_cast<std::size_t>(k)] = anatomy::inner_boundary(mask_ed, seg, k);
    outer[static_cast<std::size_t>(k)] = anatomy::outer_boundary(mask_ed, seg, k);
  }

  SegmentSeries s;
  s.slice_index = slice_index;
  const double scale = spacing_mm / bsa;
  for (int i = 0; i < kInstants; ++i) {
    const auto& f = flows[static_cast<std::size_t>(i)];
    const Vec2 b = warped_mean(lvc, f);
    for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
      const double ra = (warped_mean(inner[k], f) - b).norm() * scale;
      const double ro = (warped_mean(outer[k], f) - b).norm() * scale;
      s.ra[k][static_cast<std::size_t>(i)] = ra;
      s.th[k][static_cast<std::size_t>(i)] = ro - ra;
    }
  }
  for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
    if (!(s.ra[k][0] > 0.0)) throw DegenerateSegmentError(static_cast<int>(k), "zero radius at ED");
    if (!(s.th[k][0] > 0.0)) throw DegenerateSegmentError(static_cast<int>(k), "non-positive thickness at ED");
  }
  return s;
}

/// max_i [ max_{s,k} RA_{k,i}/RA_{k,0} - min_{s,k} RA_{k,i}/RA_{k,0} ]
inline double radius_motion_disparity(const std::vector<SegmentSeries>& series) {
  if (series.empty()) throw InsufficientStackError("radius motion disparity needs at least one slice");
  double rmd = 0.0;
  for (int i = 0; i < kInstants; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
      for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
        const double r = s.ra[k][static_cast<std::size_t>(i)] / s.ra[k][0];
        lo = std::min(lo, r);
        hi = std::max(hi, r);
      }
    }
    rmd = std::max(rmd, hi - lo);
  }
  return rmd;
}

/// max over slices and instants of (max_k T_{k,i} - min_k T_{k,i}) / min_k T_{k,0}
inline double thickness_motion_disparity(const std::vector<SegmentSeries>& series) {
  if (series.empty()) throw InsufficientStackError("thickness motion disparity needs at least one slice");
  double tmd = 0.0;
  for (const auto& s : series) {
    std::size_t kmin = 0;
    for (std::size_t k = 1; k < anatomy::kSegmentCount; ++k) {
      if (s.th[k][0] < s.th[kmin][0]) kmin = k;
    }
    const double t0 = s.th[kmin][0];
    if (!(t0 > 0.0)) throw DegenerateSegmentError(static_cast<int>(kmin), "zero thickness at ED");
    for (int i = 0; i < kInstants; ++i) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
        lo = std::min(lo, s.th[k][static_cast<std::size_t>(i)]);
        hi = std::max(hi, s.th[k][static_cast<std::size_t>(i)]);
      }
      tmd = std::max(tmd, (hi - lo) / t0);
    }
  }
  return tmd;
}

struct MotionFeatures {
  double rmd = 0.0;
  double tmd = 0.0;
};

inline MotionFeatures motion_disparities(const std::vector<SegmentSeries>& series) {
  return {radius_motion_disparity(series), thickness_motion_disparity(series)};
}

}  // namespace cardioflow::motion
