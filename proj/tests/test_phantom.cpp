#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace cardioflow;
using namespace cardioflow::phantom;

namespace {

PhantomSpec small_spec(Category cat = Category::kNOR) {
  PhantomSpec s;
  s.category = cat;
  s.n_slices = 3;
  s.n_frames = 14;
  return s;
}

// Pixel count of LVC on slice 0 at the frame whose profile is 1 (exact ES) vs ED.
double rasterized_area_ratio(const PhantomSpec& s) {
  const SliceModel model(s, 0);
  double ed = 0, es = 0;
  const int n = s.image_size;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const Vec2 p{static_cast<double>(x), static_cast<double>(y)};
      ed += model.label_at(p, 0.0) == anatomy::Label::kLVC;
      es += model.label_at(p, 1.0) == anatomy::Label::kLVC;
    }
  }
  return es / ed;
}

}  // namespace

TEST(PhantomEf, NormalClosedForm) {
  auto s = small_spec();
  s.contraction_amplitude = 0.25;
  const double closed = 1.0 - (1.0 - 0.25) * (1.0 - 0.25);
  EXPECT_NEAR(analytic_lv_ef(s), closed, 1e-9);
  EXPECT_NEAR(1.0 - rasterized_area_ratio(s), closed, 0.02);
}

TEST(PhantomEf, DilatedClosedFormBelowForty) {
  auto s = small_spec(Category::kDCM);
  s.contraction_amplitude = 0.05;
  s.thickening_amplitude = 0.1;
  const double closed = 1.0 - 0.95 * 0.95;
  EXPECT_NEAR(analytic_lv_ef(s), closed, 1e-9);
  EXPECT_NEAR(1.0 - rasterized_area_ratio(s), closed, 0.02);
  EXPECT_LT(analytic_lv_ef(s), 0.40);
  EXPECT_NO_THROW(s.validate());
}

TEST(PhantomSpecValidation, NamesTheField) {
  auto s = small_spec();
  s.n_frames = 40;
  try {
    s.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "n_frames");
  }
  auto d = small_spec(Category::kDCM);  // default contraction is too strong for DCM
  try {
    d.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "contraction_amplitude");
  }
  auto h = small_spec(Category::kHCM);  // default wall is too thin for HCM
  try {
    h.validate();
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "epi_radius_ed");
  }
}

TEST(Phantom, DeterministicGivenSeed) {
  auto s = small_spec();
  s.rng_seed = 77;
  const auto a = generate_case(s);
  const auto b = generate_case(s);
  for (int k = 0; k < s.n_slices; ++k) {
    for (int t = 0; t < s.n_frames; ++t) {
      EXPECT_EQ(a.slices[k].frames[t], b.slices[k].frames[t]);
      EXPECT_EQ(a.slices[k].masks[t], b.slices[k].masks[t]);
    }
  }
  s.rng_seed = 78;
  const auto c = generate_case(s);
  EXPECT_NE(a.slices[0].frames[3], c.slices[0].frames[3]);
}

TEST(Phantom, EsIsMinimalCavityFrame) {
  auto s = small_spec();
  const auto c = generate_case(s);
  std::size_t best = SIZE_MAX;
  int arg = -1;
  for (int t = 0; t < s.n_frames; ++t) {
    const auto n = c.slices[0].masks[t].count(anatomy::Label::kLVC);
    if (n < best) {
      best = n;
      arg = t;
    }
  }
  EXPECT_NEAR(c.es_frame_index, arg, 1);
  EXPECT_EQ(c.ed_frame_index, 0);
}

TEST(Phantom, GroundTruthWarpReproducesMasks) {
  auto s = small_spec();
  const auto c = generate_case(s);
  for (int t : {3, c.es_frame_index, 10}) {
    const auto f = c.gt_flow(1, t);
    // The mask at t pulled back to ED coordinates should match the ED mask.
    const auto warped = cftest::warp_mask_nearest(c.slices[1].masks[t], f);
    // Nearest-neighbour pull-back flips boundary pixels; the thin LVM ring has
    // the largest boundary share.
    for (auto l : anatomy::kStructures) {
      const double bound = l == anatomy::Label::kLVM ? 0.95 : 0.97;
      EXPECT_GE(cftest::hard_dice(c.slices[1].masks[0], warped, l), bound) << "t=" << t << " label " << anatomy::label_name(l);
    }
  }
}

TEST(Phantom, GroundTruthEqualsAnalyticDisplacement) {
  auto s = small_spec();
  const auto c = generate_case(s);
  const int t = c.es_frame_index;
  const auto f = c.gt_flow(0, t);
  const double prof = motion_profile(t, s.n_frames, s.es_phase);
  // Independent radial formula for LV-interior pixels: r -> r (1 - c p).
  const double scale = 1.0 - s.contraction_amplitude * prof;
  for (int y = 0; y < s.image_size; y += 3) {
    for (int x = 0; x < s.image_size; x += 3) {
      const double dx = x - s.lv_center.x, dy = y - s.lv_center.y;
      if (std::hypot(dx, dy) >= s.endo_radius_ed * slice_scale(0, s.n_slices) - 0.5) continue;
      EXPECT_NEAR(f.fx(x, y), (scale - 1) * dx, 1e-9);
      EXPECT_NEAR(f.fy(x, y), (scale - 1) * dy, 1e-9);
    }
  }
}

TEST(PhantomCohort, CountsAndProportions) {
  const auto specs = sample_cohort_specs(20, 1);
  ASSERT_EQ(specs.size(), 100u);
  std::array<int, 5> n{};
  for (const auto& s : specs) ++n[static_cast<std::size_t>(category_index(s.category))];
  for (int v : n) EXPECT_EQ(v, 20);
  EXPECT_THROW(sample_cohort_specs(0, 1), ValidationError);
}

TEST(PhantomCohort, AnalyticSeparability) {
  const auto specs = sample_cohort_specs(20, 3);
  double dcm_ef_max = 0, nor_ef_min = 1, hcm_wall_min = 1e9, other_wall_max = 0, minf_spread_min = 1, other_spread_max = 0;
  for (const auto& s : specs) {
    const double ef = analytic_lv_ef(s);
    const auto [lo, hi] = std::minmax_element(s.per_segment_activity.begin(), s.per_segment_activity.end());
    if (s.category == Category::kDCM) dcm_ef_max = std::max(dcm_ef_max, ef);
    if (s.category == Category::kNOR) nor_ef_min = std::min(nor_ef_min, ef);
    if (s.category == Category::kHCM) hcm_wall_min = std::min(hcm_wall_min, s.wall_mm());
    else other_wall_max = std::max(other_wall_max, s.wall_mm());
    if (s.category == Category::kMINF) minf_spread_min = std::min(minf_spread_min, *hi - *lo);
    else other_spread_max = std::max(other_spread_max, *hi - *lo);
  }
  EXPECT_LT(dcm_ef_max, 0.40);
  EXPECT_GT(nor_ef_min, dcm_ef_max);
  EXPECT_GT(hcm_wall_min, 15.0);
  EXPECT_LT(other_wall_max, hcm_wall_min);
  EXPECT_GE(minf_spread_min, 0.4);
  EXPECT_EQ(other_spread_max, 0.0);
}
