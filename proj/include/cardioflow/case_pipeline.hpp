#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/category.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/features.hpp"
#include "cardioflow/flow_estimate.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/flow_loss.hpp"
#include "cardioflow/motion_features.hpp"
#include "cardioflow/parallel.hpp"
#include "cardioflow/phantom.hpp"
#include "cardioflow/shape_features.hpp"

namespace cardioflow::pipeline {

/// Everything the feature extractor needs from one case.
struct CaseData {
  std::string case_id;
  std::optional<Category> category;
  std::vector<std::vector<Image>> frames;  // [slice][frame]
  std::vector<anatomy::LabelMask> masks_ed;
  std::vector<anatomy::LabelMask> masks_es;
  int n_frames = 0;
  int ed_index = 0;
  int es_index = 0;
  double pixel_spacing = 1.0;
  std::vector<double> slice_positions;
  double height_cm = 0.0;
  double weight_kg = 0.0;

  int n_slices() const { return static_cast<int>(masks_ed.size()); }

  shape::CaseGeometry geometry() const {
    return {masks_ed, masks_es, slice_positions, pixel_spacing, height_cm, weight_kg};
  }

  void validate() const {
    geometry().validate();
    if (ed_index < 0 || ed_index >= n_frames) throw FormatError(case_id + ": ED index outside the cycle");
    if (es_index < 0 || es_index >= n_frames) throw FormatError(case_id + ": ES index outside the cycle");
  }
};

inline CaseData case_from_phantom(const phantom::PhantomCase& c, std::string case_id) {
  CaseData d;
  d.case_id = std::move(case_id);
  d.category = c.spec.category;
  d.n_frames = c.spec.n_frames;
  d.ed_index = c.ed_frame_index;
  d.es_index = c.es_frame_index;
  d.pixel_spacing = c.spec.pixel_spacing_mm;
  d.slice_positions = c.slice_positions_mm();
  d.height_cm = c.spec.height_cm;
  d.weight_kg = c.spec.weight_kg;
  for (const auto& s : c.slices) {
    d.frames.push_back(s.frames);
    d.masks_ed.push_back(s.masks[static_cast<std::size_t>(c.ed_frame_index)]);
    d.masks_es.push_back(s.masks[static_cast<std::size_t>(c.es_frame_index)]);
  }
  return d;
}

struct FeatureConfig {
  flow::FlowLossParams loss;
  flow::OptimizerConfig optimizer;
  bool supervised_es = true;  // pass ED/ES masks to the (ED, ES) pair when it is sampled
  motion::SliceMode slice_mode = motion::SliceMode::kApply;
  int threads = 1;
};

struct PairRecord {
  int slice = 0;
  int instant = 0;  // i in [1, 9]
  int frame = 0;    // t_i
  bool supervised = false;
  flow::LossTerms terms;
  int iterations = 0;
};

struct SliceFlows {
  int slice = 0;
  std::array<int, motion::kInstants> frames{};
  std::vector<flow::FlowField> flows;  // 10, flows[0] null
  std::vector<PairRecord> records;     // 9, instants 1..9
};

inline motion::MidStackSelection select_slices(const CaseData& c, motion::SliceMode mode) {
  return motion::select_mid_stack(c.masks_ed, mode);
}

/// Flows (ED, t_i), i = 1..9, for every selected slice. Pairs run in parallel.
inline std::vector<SliceFlows> estimate_case_flows(const CaseData& c, const FeatureConfig& cfg) {
  c.validate();
  const auto sel = select_slices(c, cfg.slice_mode);
  const auto frames = motion::sample_frames(c.n_frames, c.ed_index);
  std::vector<SliceFlows> out;
  for (int s : sel.indices()) {
    if (static_cast<int>(c.frames.size()) <= s || static_cast<int>(c.frames[static_cast<std::size_t>(s)].size()) != c.n_frames) {
      throw FormatError(c.case_id + ": slice " + std::to_string(s) + " lacks its cine frames");
    }
    SliceFlows sf;
    sf.slice = s;
    sf.frames = frames;
    sf.flows.resize(motion::kInstants);
    sf.records.resize(motion::kInstants - 1);
    const auto& first = c.frames[static_cast<std::size_t>(s)][0];
    sf.flows[0] = flow::FlowField(first.width(), first.height());
    out.push_back(std::move(sf));
  }
  const int per_slice = motion::kInstants - 1;
  parallel_for(static_cast<int>(out.size()) * per_slice, cfg.threads, [&](int task) {
    auto& sf = out[static_cast<std::size_t>(task / per_slice)];
    const int i = task % per_slice + 1;
    const auto s = static_cast<std::size_t>(sf.slice);
    const int t = sf.frames[static_cast<std::size_t>(i)];
    flow::FramePair pair{c.frames[s][static_cast<std::size_t>(c.ed_index)], c.frames[s][static_cast<std::size_t>(t)], std::nullopt};
    // p2 = 0 drops the Dice term, so the pair counts as unsupervised.
    const bool supervised = cfg.supervised_es && cfg.loss.p2 > 0.0 && t == c.es_index;
    if (supervised) pair.supervision = flow::Supervision{c.masks_ed[s], c.masks_es[s]};
    flow::EstimateResult r;
    try {
      r = flow::estimate_flow_detailed(pair, cfg.loss, cfg.optimizer);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(e.iteration(), c.case_id + ", slice " + std::to_string(sf.slice) + ", pair (" +
                                                std::to_string(c.ed_index) + ", " + std::to_string(t) + "): non-finite flow energy");
    }
    sf.records[static_cast<std::size_t>(i - 1)] = {sf.slice, i, t, supervised, r.terms, r.iterations};
    sf.flows[static_cast<std::size_t>(i)] = std::move(r.flow);
  });
  return out;
}

struct CaseFeatures {
  FeatureVector features;
  shape::ShapeFeatures shape;
  motion::MotionFeatures motion;
  std::vector<motion::SegmentSeries> series;
};

inline CaseFeatures features_from_flows(const CaseData& c, const std::vector<SliceFlows>& flows) {
  if (flows.empty()) throw InsufficientStackError(c.case_id + ": no slice flows");
  CaseFeatures out;
  out.shape = shape::compute_shape_features(c.geometry());
  const double bsa = c.geometry().bsa();
  for (const auto& sf : flows) {
    const auto& mask = c.masks_ed.at(static_cast<std::size_t>(sf.slice));
    const auto seg = anatomy::divide_segments(mask);
    out.series.push_back(motion::extract_series(sf.flows, mask, seg, bsa, c.pixel_spacing, sf.slice));
  }
  out.motion = motion::motion_disparities(out.series);

  auto& f = out.features;
  f[Feature::kV_RVC_ED] = out.shape.v_rvc_ed;
  f[Feature::kV_LVC_ES] = out.shape.v_lvc_es;
  f[Feature::kEF_RVC] = out.shape.ef_rvc;
  f[Feature::kEF_LVC] = out.shape.ef_lvc;
  f[Feature::kR_RVCLV_ED] = out.shape.r_rvclv_ed;
  f[Feature::kR_LVMLVC_ED] = out.shape.r_lvmlvc_ed;
  f[Feature::kMT_LVM_ED] = out.shape.mt_lvm_ed;
  f[Feature::kRMD] = out.motion.rmd;
  f[Feature::kTMD] = out.motion.tmd;
  return out;
}

inline CaseFeatures compute_case_features(const CaseData& c, const FeatureConfig& cfg) {
  return features_from_flows(c, estimate_case_flows(c, cfg));
}

}  // namespace cardioflow::pipeline
