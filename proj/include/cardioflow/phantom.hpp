#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/category.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::phantom {

// Geometry model
// --------------
// Each slice holds an LV ring (cavity radius Rn, wall W) around lv_center and
// an RV crescent: the disc of radius Rrv around rv_center minus the disc of
// radius Rn + W + kLvRvGap around lv_center. Radii taper toward the apex by
// slice_scale(); the wall keeps its thickness.
//
// Motion from ED to a frame with profile value p in [0, 1] is radial about
// lv_center for everything that is not RVC:
//   cavity   r -> r * rn'/Rn                     rn' = Rn (1 - a(theta) c p)
//   wall     r -> rn' + (r - Rn) w'/W             w'  = W (1 + a(theta) tau p)
//   outside  r -> r + (rn' + w' - Rp) exp(-(r - Rp)/kDecay)
// where a(theta) is the per-segment activity. RVC pixels are scaled toward
// rv_center by 1 - c_rv p. Masks at every frame are the exact image of the
// ED masks under this map, evaluated at pixel centres.
//
// Intensity is the label constant plus a smooth texture attached to the
// tissue: a point carries the texture value of its ED position. Without it a
// circular ring leaves tangential motion unobservable.

inline constexpr double kLvRvGap = 3.0;   // px of background between LV and RV at ED
inline constexpr double kDecay = 6.0;     // px, decay of the exterior displacement
inline constexpr double kBlendHalfWidth = std::numbers::pi / 18.0;

struct Intensities {
  static constexpr double kBackground = 0.1;
  static constexpr double kCavity = 0.4;
  static constexpr double kMyocardium = 0.8;
  static constexpr double kRightCavity = 0.5;
};

struct PhantomSpec {
  Category category = Category::kNOR;
  int image_size = 128;
  int n_slices = 8;
  int n_frames = 25;
  double pixel_spacing_mm = 1.25;
  double slice_gap_mm = 10.0;
  Vec2 lv_center{50.0, 64.0};
  Vec2 rv_center{95.0, 64.0};
  double endo_radius_ed = 21.0;  // px, basal slice
  double epi_radius_ed = 27.5;
  double rv_radius_ed = 24.0;
  double contraction_amplitude = 0.35;  // fraction of the cavity radius
  double thickening_amplitude = 0.4;    // fraction of the wall thickness
  double rv_contraction = 0.3;
  std::array<double, 6> per_segment_activity{1, 1, 1, 1, 1, 1};
  double es_phase = 0.38;  // ES instant as a fraction of the cycle
  double height_cm = 175.0;
  double weight_kg = 70.0;
  double noise_sigma = 0.03;
  double texture_sigma = 0.08;  // std of the tissue texture carried by the motion
  std::uint64_t rng_seed = 0;

  double wall_px() const { return epi_radius_ed - endo_radius_ed; }
  double wall_mm() const { return wall_px() * pixel_spacing_mm; }

  void validate() const;
};

/// Radius multiplier of slice s; 1 at the base.
inline double slice_scale(int s, int n_slices) {
  const double u = static_cast<double>(s) / n_slices;
  return std::sqrt(1.0 - 0.75 * u * u);
}

/// Contraction profile: 0 at ED (frame 0), 1 at the continuous ES instant.
inline double motion_profile(double t, int n_frames, double es_phase) {
  const double f = n_frames;
  const double t_es = es_phase * f;
  t = std::fmod(std::fmod(t, f) + f, f);
  const double half_pi = std::numbers::pi / 2.0;
  const double s = t <= t_es ? std::sin(half_pi * t / t_es) : std::sin(half_pi * (f - t) / (f - t_es));
  return s * s;
}

/// Activity at angle theta (measured from the LV->RV direction), piecewise
/// constant per segment with raised-cosine transitions across segment borders.
inline double activity_at(const std::array<double, 6>& act, double theta) {
  const double seg = std::numbers::pi / 3.0;
  const double th = std::fmod(std::fmod(theta, 2 * std::numbers::pi) + 2 * std::numbers::pi, 2 * std::numbers::pi);
  const int k = std::clamp(static_cast<int>(std::floor(th / seg)), 0, 5);
  const double from_lo = th - k * seg;
  const double to_hi = (k + 1) * seg - th;
  const double h = kBlendHalfWidth;
  auto blend = [h](double a_from, double a_to, double u) {  // u in [-h, h]
    const double w = 0.5 * (1.0 - std::cos(std::numbers::pi * (u + h) / (2.0 * h)));
    return a_from + (a_to - a_from) * w;
  };
  if (from_lo < h) return blend(act[(k + 5) % 6], act[k], from_lo);
  if (to_hi < h) return blend(act[k], act[(k + 1) % 6], -to_hi);
  return act[k];
}

/// Analytic ratio of LVC area at profile p to LVC area at ED (slice independent).
inline double lvc_area_ratio(const PhantomSpec& spec, double p) {
  constexpr int kSamples = 3600;
  double acc = 0.0;
  for (int i = 0; i < kSamples; ++i) {
    const double th = (i + 0.5) * 2.0 * std::numbers::pi / kSamples;
    const double s = 1.0 - activity_at(spec.per_segment_activity, th) * spec.contraction_amplitude * p;
    acc += s * s;
  }
  return acc / kSamples;
}

/// Closed-form LVC ejection fraction of the ring model at profile p (1 = continuous ES).
inline double analytic_lv_ef(const PhantomSpec& spec, double p = 1.0) { return 1.0 - lvc_area_ratio(spec, p); }

inline double analytic_rv_ef(const PhantomSpec& spec, double p = 1.0) {
  const double s = 1.0 - spec.rv_contraction * p;
  return 1.0 - s * s;
}

struct MaterialPoint {
  anatomy::Label label;
  Vec2 origin;  // position at ED
};

/// Analytic motion model of one slice.
class SliceModel {
 public:
  SliceModel(const PhantomSpec& spec, int slice) : spec_(spec) {
    const double k = slice_scale(slice, spec.n_slices);
    rn_ = spec.endo_radius_ed * k;
    w_ = spec.wall_px();
    rrv_ = spec.rv_radius_ed * k;
  }

  double endo_radius() const { return rn_; }
  double wall() const { return w_; }
  double rv_radius() const { return rrv_; }

  double theta(Vec2 p) const { return anatomy::angle_from(spec_.rv_center - spec_.lv_center, p - spec_.lv_center); }

  double endo_at(double th, double prof) const {
    return rn_ * (1.0 - activity_at(spec_.per_segment_activity, th) * spec_.contraction_amplitude * prof);
  }
  double wall_at(double th, double prof) const {
    return w_ * (1.0 + activity_at(spec_.per_segment_activity, th) * spec_.thickening_amplitude * prof);
  }

  double forward_radius(double r, double th, double prof) const {
    const double rn2 = endo_at(th, prof);
    const double w2 = wall_at(th, prof);
    const double rp = rn_ + w_;
    if (r <= rn_) return r * rn2 / rn_;
    if (r <= rp) return rn2 + (r - rn_) * w2 / w_;
    return r + (rn2 + w2 - rp) * std::exp(-(r - rp) / kDecay);
  }

  double inverse_radius(double q, double th, double prof) const {
    const double rn2 = endo_at(th, prof);
    const double w2 = wall_at(th, prof);
    const double rp = rn_ + w_;
    if (q <= rn2) return q * rn_ / rn2;
    if (q <= rn2 + w2) return rn_ + (q - rn2) * w_ / w2;
    const double d = rn2 + w2 - rp;
    double r = std::max(rp, q - d);
    for (int i = 0; i < 50; ++i) {
      const double e = std::exp(-(r - rp) / kDecay);
      const double f = r + d * e - q;
      const double df = 1.0 - d * e / kDecay;
      const double next = std::max(rp, r - f / df);
      if (std::abs(next - r) < 1e-12) return next;
      r = next;
    }
    return r;
  }

  anatomy::Label label_ed(Vec2 p) const { return label_at(p, 0.0); }

  /// Label of the continuous point q at profile value prof, and the ED point
  /// that moved there.
  MaterialPoint material_at(Vec2 q, double prof) const {
    const Vec2 v = q - spec_.lv_center;
    const double rq = v.norm();
    const double r = inverse_radius(rq, theta(q), prof);
    const Vec2 lv_origin = rq > 0.0 ? spec_.lv_center + (r / rq) * v : q;
    if (r < rn_) return {anatomy::Label::kLVC, lv_origin};
    if (r < rn_ + w_) return {anatomy::Label::kLVM, lv_origin};
    const double s = 1.0 - spec_.rv_contraction * prof;
    const Vec2 q0 = spec_.rv_center + (1.0 / s) * (q - spec_.rv_center);
    if ((q0 - spec_.rv_center).norm() < rrv_ && (q0 - spec_.lv_center).norm() >= rn_ + w_ + kLvRvGap) {
      return {anatomy::Label::kRVC, q0};
    }
    return {anatomy::Label::kBackground, lv_origin};
  }

  anatomy::Label label_at(Vec2 q, double prof) const { return material_at(q, prof).label; }

  /// Analytic displacement of the ED point p at profile value prof.
  Vec2 displacement(Vec2 p, double prof) const {
    if (label_ed(p) == anatomy::Label::kRVC) {
      const double s = 1.0 - spec_.rv_contraction * prof;
      return (s - 1.0) * (p - spec_.rv_center);
    }
    const Vec2 v = p - spec_.lv_center;
    const double r = v.norm();
    if (r == 0.0) return {};
    const double r2 = forward_radius(r, theta(p), prof);
    return (r2 / r - 1.0) * v;
  }

 private:
  const PhantomSpec& spec_;
  double rn_ = 0.0;
  double w_ = 0.0;
  double rrv_ = 0.0;
};

inline void PhantomSpec::validate() const {
  if (image_size < 32) throw ValidationError("image_size", "must be >= 32");
  if (n_slices < 2) throw ValidationError("n_slices", "must be >= 2");
  if (n_frames < 12 || n_frames > 35) throw ValidationError("n_frames", "must be in [12, 35]");
  if (!(pixel_spacing_mm > 0.0)) throw ValidationError("pixel_spacing_mm", "must be > 0");
  if (!(slice_gap_mm > 0.0)) throw ValidationError("slice_gap_mm", "must be > 0");
  if (!(endo_radius_ed > 2.0)) throw ValidationError("endo_radius_ed", "must be > 2 px");
  if (!(endo_radius_ed < epi_radius_ed)) throw ValidationError("epi_radius_ed", "must exceed endo_radius_ed");
  if (!(rv_radius_ed > 0.0)) throw ValidationError("rv_radius_ed", "must be > 0");
  if (!(contraction_amplitude >= 0.0 && contraction_amplitude < 0.9)) {
    throw ValidationError("contraction_amplitude", "must be in [0, 0.9)");
  }
  if (!(thickening_amplitude >= 0.0 && thickening_amplitude <= 1.5)) {
    throw ValidationError("thickening_amplitude", "must be in [0, 1.5]");
  }
  if (!(rv_contraction >= 0.0 && rv_contraction < 0.9)) throw ValidationError("rv_contraction", "must be in [0, 0.9)");
  for (double a : per_segment_activity) {
    if (!(a >= 0.0 && a <= 1.0)) throw ValidationError("per_segment_activity", "values must be in [0, 1]");
  }
  if (!(es_phase > 0.1 && es_phase < 0.9)) throw ValidationError("es_phase", "must be in (0.1, 0.9)");
  if (!(height_cm > 0.0)) throw ValidationError("height_cm", "must be > 0");
  if (!(weight_kg > 0.0)) throw ValidationError("weight_kg", "must be > 0");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma", "must be >= 0");
  if (!(texture_sigma >= 0.0 && texture_sigma <= 0.1)) throw ValidationError("texture_sigma", "must be in [0, 0.1]");

  const auto [amin, amax] = std::minmax_element(per_segment_activity.begin(), per_segment_activity.end());
  if (category == Category::kMINF) {
    if (*amax - *amin < 0.4) throw ValidationError("per_segment_activity", "MINF needs a segment pair differing by >= 0.4");
  } else if (*amax != *amin) {
    throw ValidationError("per_segment_activity", "must be uniform outside MINF");
  }
  if (category == Category::kDCM && !(analytic_lv_ef(*this) < 0.40)) {
    throw ValidationError("contraction_amplitude", "DCM requires LVC ejection fraction < 0.40");
  }
  if (category == Category::kHCM) {
    if (!(wall_mm() > 15.0)) throw ValidationError("epi_radius_ed", "HCM requires ED wall thickness > 15 mm");
    if (!(analytic_lv_ef(*this) >= 0.5)) throw ValidationError("contraction_amplitude", "HCM requires a normal ejection fraction");
  }
  if (category == Category::kRVA && !(analytic_rv_ef(*this) < 0.40 || rv_radius_ed * pixel_spacing_mm > 40.0)) {
    throw ValidationError("rv_contraction", "RVA requires a low RVC ejection fraction or an enlarged RV");
  }

  // The epicardium may not grow into the LV/RV gap, and the exterior map must stay monotone.
  // Epicardial displacement is a * (W tau - Rn c), linear in the activity a.
  const double per_activity = wall_px() * thickening_amplitude - endo_radius_ed * contraction_amplitude;
  const double expansion = std::max(*amin * per_activity, *amax * per_activity);
  if (expansion >= kLvRvGap) throw ValidationError("thickening_amplitude", "epicardium would expand into the RV");

  const double rp = epi_radius_ed;
  const double n = image_size;
  const double margin = 2.0;
  if (lv_center.x - rp < margin || lv_center.y - rp < margin || lv_center.x + rp > n - 1 - margin ||
      lv_center.y + rp > n - 1 - margin) {
    throw ValidationError("lv_center", "LV does not fit inside the image");
  }
  if (rv_center.x - rv_radius_ed < margin || rv_center.y - rv_radius_ed < margin ||
      rv_center.x + rv_radius_ed > n - 1 - margin || rv_center.y + rv_radius_ed > n - 1 - margin) {
    throw ValidationError("rv_center", "RV does not fit inside the image");
  }
  const double d = (rv_center - lv_center).norm();
  if (d <= rp + kLvRvGap) throw ValidationError("rv_center", "must lie outside the LV");
  if (d - rv_radius_ed >= rp + kLvRvGap) throw ValidationError("rv_center", "RV crescent must wrap the LV");
}

struct PhantomSlice {
  std::vector<Image> frames;               // intensity in [0, 1]
  std::vector<anatomy::LabelMask> masks;   // analytic labels per frame
};

struct PhantomCase {
  PhantomSpec spec;
  std::vector<PhantomSlice> slices;
  int ed_frame_index = 0;
  int es_frame_index = 0;

  /// Analytic ED -> frame displacement on the pixel grid.
  flow::FlowField gt_flow(int slice, int frame) const {
    const SliceModel model(spec, slice);
    const double prof = motion_profile(frame, spec.n_frames, spec.es_phase);
    flow::FlowField f(spec.image_size, spec.image_size);
    if (frame == ed_frame_index) return f;
    for (int y = 0; y < spec.image_size; ++y) {
      for (int x = 0; x < spec.image_size; ++x) {
        const Vec2 d = model.displacement({static_cast<double>(x), static_cast<double>(y)}, prof);
        f.fx(x, y) = d.x;
        f.fy(x, y) = d.y;
      }
    }
    return f;
  }

  std::vector<double> slice_positions_mm() const {
    std::vector<double> pos(static_cast<std::size_t>(spec.n_slices));
    for (int s = 0; s < spec.n_slices; ++s) pos[static_cast<std::size_t>(s)] = s * spec.slice_gap_mm;
    return pos;
  }
};

/// Frame index of minimal analytic LVC area.
inline int es_frame_index(const PhantomSpec& spec) {
  int best = 0;
  double best_area = lvc_area_ratio(spec, 0.0);
  for (int t = 1; t < spec.n_frames; ++t) {
    const double a = lvc_area_ratio(spec, motion_profile(t, spec.n_frames, spec.es_phase));
    if (a < best_area) {
      best_area = a;
      best = t;
    }
  }
  return best;
}

inline double label_intensity(anatomy::Label l) {
  switch (l) {
    case anatomy::Label::kLVC: return Intensities::kCavity;
    case anatomy::Label::kLVM: return Intensities::kMyocardium;
    case anatomy::Label::kRVC: return Intensities::kRightCavity;
    case anatomy::Label::kBackground: break;
  }
  return Intensities::kBackground;
}

/// Smooth zero-mean texture with unit variance, defined in ED coordinates:
/// a sum of plane waves with wavelengths 8 to 16 px, tabulated on a half-pixel
/// grid and read back bilinearly.
class Texture {
 public:
  Texture(int image_size, std::uint64_t seed) : table_(2 * image_size + 1, 2 * image_size + 1) {
    constexpr int kWaves = 32;
    std::mt19937_64 rng(seed);
    std::array<double, kWaves> kx{}, ky{}, phase{};
    for (int j = 0; j < kWaves; ++j) {
      const double dir = 2.0 * std::numbers::pi * uniform01(rng);
      const double k = 2.0 * std::numbers::pi / (8.0 + 8.0 * uniform01(rng));
      kx[j] = k * std::cos(dir);
      ky[j] = k * std::sin(dir);
      phase[j] = 2.0 * std::numbers::pi * uniform01(rng);
    }
    const double norm = std::sqrt(2.0 / kWaves);
    for (int y = 0; y < table_.height(); ++y) {
      for (int x = 0; x < table_.width(); ++x) {
        double acc = 0.0;
        for (int j = 0; j < kWaves; ++j) acc += std::cos(kx[j] * 0.5 * x + ky[j] * 0.5 * y + phase[j]);
        table_(x, y) = norm * acc;
      }
    }
  }

  double at(Vec2 p) const { return sample_bilinear(table_, 2.0 * p.x, 2.0 * p.y).value; }

 private:
  static double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
  Image table_;
};

inline std::uint64_t texture_seed(std::uint64_t rng_seed, int slice) {
  // splitmix64 step, so texture draws never overlap the noise stream
  std::uint64_t z = rng_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(slice) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Labels at pixel centres and the noise-free intensity at profile value prof.
/// Pixels on a label boundary average a 4x4 grid of sub-samples.
inline std::pair<anatomy::LabelMask, Image> render_frame(const SliceModel& model, const Texture& texture,
                                                         double texture_sigma, int n, double prof) {
  anatomy::LabelMask mask(n, n);
  Image out(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto m = model.material_at({static_cast<double>(x), static_cast<double>(y)}, prof);
      mask.set(x, y, m.label);
      out(x, y) = label_intensity(m.label) + texture_sigma * texture.at(m.origin);
    }
  }
  constexpr int kSub = 4;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const auto l = mask(x, y);
      bool boundary = false;
      for (auto [dx, dy] : anatomy::detail::kNeighbors4) {
        if (mask.contains(x + dx, y + dy) && mask(x + dx, y + dy) != l) boundary = true;
      }
      if (!boundary) continue;
      double acc = 0.0;
      for (int j = 0; j < kSub; ++j) {
        for (int i = 0; i < kSub; ++i) {
          const auto m = model.material_at({x + (i + 0.5) / kSub - 0.5, y + (j + 0.5) / kSub - 0.5}, prof);
          acc += label_intensity(m.label) + texture_sigma * texture.at(m.origin);
        }
      }
      out(x, y) = acc / (kSub * kSub);
    }
  }
  return {std::move(mask), std::move(out)};
}

inline PhantomCase generate_case(const PhantomSpec& spec) {
  spec.validate();
  PhantomCase c;
  c.spec = spec;
  c.es_frame_index = es_frame_index(spec);
  std::mt19937_64 rng(spec.rng_seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const int n = spec.image_size;
  for (int s = 0; s < spec.n_slices; ++s) {
    const SliceModel model(c.spec, s);
    const Texture texture(n, texture_seed(spec.rng_seed, s));
    PhantomSlice slice;
    for (int t = 0; t < spec.n_frames; ++t) {
      auto [mask, clean] = render_frame(model, texture, spec.texture_sigma, n, motion_profile(t, spec.n_frames, spec.es_phase));
      Image frame = gaussian_blur(clean, 1.0);
      for (auto& v : frame.values()) {
        const double drawn = noise(rng);
        v = std::clamp(v + spec.noise_sigma * drawn, 0.0, 1.0);
      }
      slice.frames.push_back(std::move(frame));
      slice.masks.push_back(std::move(mask));
    }
    c.slices.push_back(std::move(slice));
  }
  return c;
}

// Cohort sampling
// ---------------

namespace detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  // Fixed mapping from the raw 64-bit draw keeps cohorts identical across standard libraries.
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace detail

/// Draws a spec from the category's parameter ranges. Pixel spacing 1.25 mm.
inline PhantomSpec sample_spec(Category category, std::uint64_t seed, int image_size = 128) {
  std::mt19937_64 rng(seed);
  auto U = [&rng](double lo, double hi) { return detail::uniform(rng, lo, hi); };
  PhantomSpec s;
  s.category = category;
  s.image_size = image_size;
  s.rng_seed = seed;
  s.n_frames = detail::uniform_int(rng, 20, 30);
  s.es_phase = U(0.32, 0.42);
  s.height_cm = U(155.0, 190.0);
  s.weight_kg = U(55.0, 95.0);
  s.noise_sigma = 0.03;

  double rn = U(19.0, 23.0), wall = U(5.6, 7.2), rv = U(22.0, 26.0);
  s.contraction_amplitude = U(0.33, 0.40);
  s.thickening_amplitude = U(0.35, 0.5);
  s.rv_contraction = U(0.28, 0.36);
  switch (category) {
    case Category::kNOR: break;
    case Category::kHCM:
      rn = U(15.0, 19.0);
      wall = U(13.0, 15.2);
      s.contraction_amplitude = U(0.36, 0.44);
      s.thickening_amplitude = U(0.25, 0.4);
      break;
    case Category::kDCM:
      rn = U(27.0, 31.0);
      wall = U(5.2, 6.4);
      s.contraction_amplitude = U(0.05, 0.12);
      s.thickening_amplitude = U(0.05, 0.15);
      break;
    case Category::kMINF: {
      rn = U(23.0, 27.0);
      s.contraction_amplitude = U(0.30, 0.38);
      const int start = detail::uniform_int(rng, 0, 5);
      for (int k = 0; k < 6; ++k) {
        const bool infarct = ((k - start + 6) % 6) < 3;
        s.per_segment_activity[static_cast<std::size_t>(k)] = infarct ? U(0.0, 0.2) : U(0.85, 1.0);
      }
      break;
    }
    case Category::kRVA:
      rv = U(32.0, 36.0);
      s.rv_contraction = U(0.10, 0.18);
      break;
  }
  s.endo_radius_ed = rn;
  s.epi_radius_ed = rn + wall;
  s.rv_radius_ed = rv;

  // Centre the LV+RV union horizontally; RV centre half an RV radius beyond the gap.
  const double rp = s.epi_radius_ed;
  const double extent = 2.0 * rp + kLvRvGap + 1.5 * rv;
  const double cy = image_size / 2.0 + U(-2.0, 2.0);
  s.lv_center = {(image_size - extent) / 2.0 + rp, cy};
  s.rv_center = {s.lv_center.x + rp + kLvRvGap + 0.5 * rv, cy};
  return s;
}

/// 5 * n_per_category specs, categories interleaved, seeds base_seed + index.
inline std::vector<PhantomSpec> sample_cohort_specs(int n_per_category, std::uint64_t base_seed, int image_size = 128) {
  if (n_per_category < 1) throw ValidationError("n_per_category", "must be >= 1");
  std::vector<PhantomSpec> specs;
  for (int i = 0; i < n_per_category * kCategoryCount; ++i) {
    const auto cat = kAllCategories[static_cast<std::size_t>(i % kCategoryCount)];
    specs.push_back(sample_spec(cat, base_seed + static_cast<std::uint64_t>(i), image_size));
    specs.back().validate();
  }
  return specs;
}

inline std::vector<PhantomCase> sample_cohort(int n_per_category, std::uint64_t base_seed, int image_size = 128) {
  std::vector<PhantomCase> cases;
  for (const auto& spec : sample_cohort_specs(n_per_category, base_seed, image_size)) cases.push_back(generate_case(spec));
  return cases;
}

}  // namespace cardioflow::phantom
