#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::shape {

/// Mosteller body surface area in m^2 from height (cm) and weight (kg).
inline double mosteller_bsa(double height_cm, double weight_kg) {
  if (!(height_cm > 0.0) || !std::isfinite(height_cm)) throw ValidationError("height_cm", "must be > 0");
  if (!(weight_kg > 0.0) || !std::isfinite(weight_kg)) throw ValidationError("weight_kg", "must be > 0");
  return std::sqrt(height_cm * weight_kg) / 60.0;
}

/// Truncated-cone volume in mL from per-slice areas (mm^2) at long-axis positions (mm).
inline double volume_from_areas(const std::vector<double>& areas_mm2, const std::vector<double>& positions_mm) {
  if (areas_mm2.size() != positions_mm.size()) throw DomainError("volume: areas and positions differ in length");
  if (areas_mm2.size() < 2) throw InsufficientStackError("volume needs at least 2 slices, got " + std::to_string(areas_mm2.size()));
  for (std::size_t i = 1; i < positions_mm.size(); ++i) {
    if (!(positions_mm[i] > positions_mm[i - 1])) throw ValidationError("slice_positions", "must be strictly increasing");
  }
  double mm3 = 0.0;
  for (std::size_t i = 0; i + 1 < areas_mm2.size(); ++i) {
    const double a = areas_mm2[i];
    const double b = areas_mm2[i + 1];
    if (a < 0.0 || b < 0.0) throw DomainError("volume: negative area");
    if (a == 0.0 && b == 0.0) continue;
    mm3 += (a + b + std::sqrt(a * b)) * (positions_mm[i + 1] - positions_mm[i]) / 3.0;
  }
  return mm3 / 1000.0;
}

inline std::vector<double> structure_areas(const std::vector<anatomy::LabelMask>& masks, anatomy::Label l,
                                           double spacing_mm) {
  std::vector<double> areas;
  areas.reserve(masks.size());
  for (const auto& m : masks) areas.push_back(static_cast<double>(m.count(l)) * spacing_mm * spacing_mm);
  return areas;
}

inline double structure_volume(const std::vector<anatomy::LabelMask>& masks, anatomy::Label l,
                               const std::vector<double>& positions_mm, double spacing_mm) {
  if (!(spacing_mm > 0.0)) throw ValidationError("pixel_spacing", "must be > 0");
  return volume_from_areas(structure_areas(masks, l, spacing_mm), positions_mm);
}

/// ED and ES mask stacks of one case with acquisition geometry.
struct CaseGeometry {
  std::vector<anatomy::LabelMask> masks_ed;
  std::vector<anatomy::LabelMask> masks_es;
  std::vector<double> slice_positions;  // mm
  double pixel_spacing = 1.0;           // mm/px
  double height_cm = 0.0;
  double weight_kg = 0.0;

  double bsa() const { return mosteller_bsa(height_cm, weight_kg); }

  void validate() const {
    if (masks_ed.size() != slice_positions.size() || masks_es.size() != slice_positions.size()) {
      throw DomainError("case geometry: mask stacks and slice positions differ in length");
    }
    if (!(pixel_spacing > 0.0)) throw ValidationError("pixel_spacing", "must be > 0");
    bsa();
  }
};

/// ED thickness per segment in mm (|B O_k| - |B I_k|), no BSA normalization.
inline std::array<double, anatomy::kSegmentCount> ed_thickness_mm(const anatomy::LabelMask& mask,
                                                                   const anatomy::SegmentMap& seg, double spacing_mm) {
  std::array<double, anatomy::kSegmentCount> t{};
  const Vec2 b = seg.b_l;
  auto mean = [](const anatomy::PixelSet& ps) {
    Vec2 acc;
    for (auto p : ps) acc = acc + Vec2{static_cast<double>(p.x), static_cast<double>(p.y)};
    return (1.0 / static_cast<double>(ps.size())) * acc;
  };
  for (int k = 0; k < anatomy::kSegmentCount; ++k) {
    const Vec2 in = mean(anatomy::inner_boundary(mask, seg, k));
    const Vec2 out = mean(anatomy::outer_boundary(mask, seg, k));
    t[static_cast<std::size_t>(k)] = ((out - b).norm() - (in - b).norm()) * spacing_mm;
  }
  return t;
}

struct ShapeFeatures {
  double v_rvc_ed = 0.0;  // mL/m^2
  double v_lvc_es = 0.0;  // mL/m^2
  double ef_rvc = 0.0;
  double ef_lvc = 0.0;
  double r_rvclv_ed = 0.0;
  double r_lvmlvc_ed = 0.0;
  double mt_lvm_ed = 0.0;  // mm
  // intermediates, mL/m^2
  double v_lvc_ed = 0.0;
  double v_rvc_es = 0.0;
  double v_lvm_ed = 0.0;
  int mt_slices = 0;  // slices that contributed to mt_lvm_ed
};

/// Max ED segment thickness over the slices whose segmentation is usable.
inline double max_ed_thickness_mm(const std::vector<anatomy::LabelMask>& masks_ed, double spacing_mm, int* used = nullptr) {
  double mt = 0.0;
  int n = 0;
  for (const auto& m : masks_ed) {
    try {
      const auto seg = anatomy::divide_segments(m);
      const auto t = ed_thickness_mm(m, seg, spacing_mm);
      mt = std::max(mt, *std::max_element(t.begin(), t.end()));
      ++n;
    } catch (const MissingStructureError&) {
    } catch (const DegenerateSegmentError&) {
    }
  }
  if (n == 0) throw DegenerateGeometryError("no slice with a complete LVC/LVM/RVC segmentation for wall thickness");
  if (used) *used = n;
  return mt;
}

inline ShapeFeatures compute_shape_features(const CaseGeometry& geom) {
  using anatomy::Label;
  geom.validate();
  const double bsa = geom.bsa();
  auto vol = [&](const std::vector<anatomy::LabelMask>& m, Label l) {
    return structure_volume(m, l, geom.slice_positions, geom.pixel_spacing);
  };
  const double lvc_ed = vol(geom.masks_ed, Label::kLVC);
  const double lvc_es = vol(geom.masks_es, Label::kLVC);
  const double rvc_ed = vol(geom.masks_ed, Label::kRVC);
  const double rvc_es = vol(geom.masks_es, Label::kRVC);
  const double lvm_ed = vol(geom.masks_ed, Label::kLVM);
  if (lvc_ed <= 0.0) throw DegenerateGeometryError("LVC volume at ED is zero");
  if (rvc_ed <= 0.0) throw DegenerateGeometryError("RVC volume at ED is zero");
  if (lvm_ed <= 0.0) throw DegenerateGeometryError("LVM volume at ED is zero");

  ShapeFeatures f;
  f.v_lvc_ed = lvc_ed / bsa;
  f.v_lvc_es = lvc_es / bsa;
  f.v_rvc_ed = rvc_ed / bsa;
  f.v_rvc_es = rvc_es / bsa;
  f.v_lvm_ed = lvm_ed / bsa;
  f.ef_lvc = 1.0 - lvc_es / lvc_ed;
  f.ef_rvc = 1.0 - rvc_es / rvc_ed;
  f.r_rvclv_ed = rvc_ed / (lvc_ed + lvm_ed);
  f.r_lvmlvc_ed = lvm_ed / lvc_ed;
  f.mt_lvm_ed = max_ed_thickness_mm(geom.masks_ed, geom.pixel_spacing, &f.mt_slices);
  return f;
}

}  // namespace cardioflow::shape
