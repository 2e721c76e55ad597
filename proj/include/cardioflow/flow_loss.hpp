#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::flow {

/// Ground-truth masks at ED and ES, only available for the (ED, ES) pair.
struct Supervision {
  anatomy::LabelMask mask_ed;
  anatomy::LabelMask mask_es;
};

/// The ED frame, the frame at instant t, and optional mask supervision.
struct FramePair {
  Image i_ed;
  Image i_t;
  std::optional<Supervision> supervision;

  void validate() const {
    if (!i_ed.same_shape(i_t)) throw DomainError("frame pair: ED and t frames differ in size");
    if (supervision) {
      if (!i_ed.same_shape(supervision->mask_ed.codes()) || !i_ed.same_shape(supervision->mask_es.codes())) {
        throw DomainError("frame pair: supervision masks differ in size from the frames");
      }
    }
  }
};

struct FlowLossParams {
  double p1 = 1e3;  // weight of the crossing penalty
  double p2 = 1e5;  // weight of the Dice supervision
  double epsilon_dice = 1.0;

  void validate() const {
    if (!(p1 >= 0.0)) throw ValidationError("p1", "must be >= 0");
    if (!(p2 >= 0.0)) throw ValidationError("p2", "must be >= 0");
    if (!(epsilon_dice > 0.0)) throw ValidationError("epsilon_dice", "must be > 0");
  }
};

/// Individual energy terms; `total` already carries the weights.
struct LossTerms {
  double img = 0.0;
  double cross = 0.0;
  double gt = 0.0;
  bool supervised = false;
  double total = 0.0;
};

/// Negative-signed soft Dice: -(2 sum UV + eps) / (sum U + sum V + eps).
inline double dice(const Image& u, const Image& v, double epsilon) {
  if (!u.same_shape(v)) throw DomainError("dice: mask dimensions differ");
  double su = 0.0, sv = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    su += u[i];
    sv += v[i];
    suv += u[i] * v[i];
  }
  return -(2.0 * suv + epsilon) / (su + sv + epsilon);
}

/// Crossing penalty with forward differences; border pixels without a right
/// (lower) neighbour contribute no x (y) term.
inline double loss_cross(const FlowField& flow) {
  double acc = 0.0;
  const int w = flow.width();
  const int h = flow.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        const double d = 1.0 + flow.fx(x + 1, y) - flow.fx(x, y);
        if (d < 0.0) acc += d * d;
      }
      if (y + 1 < h) {
        const double d = 1.0 + flow.fy(x, y + 1) - flow.fy(x, y);
        if (d < 0.0) acc += d * d;
      }
    }
  }
  return acc;
}

/// Flow energy for one frame pair at one resolution. Holds the frames and the
/// per-structure binary masks so repeated evaluations skip the conversion.
class FlowObjective {
 public:
  FlowObjective(const FramePair& pair, const FlowLossParams& params) : params_(params) {
    pair.validate();
    params.validate();
    i_ed_ = pair.i_ed;
    i_t_ = pair.i_t;
    if (pair.supervision) {
      Masks ed, es;
      for (std::size_t s = 0; s < anatomy::kStructures.size(); ++s) {
        ed[s] = pair.supervision->mask_ed.binary(anatomy::kStructures[s]);
        es[s] = pair.supervision->mask_es.binary(anatomy::kStructures[s]);
      }
      masks_ed_ = std::move(ed);
      masks_es_ = std::move(es);
    }
  }

  int width() const noexcept { return i_ed_.width(); }
  int height() const noexcept { return i_ed_.height(); }
  bool supervised() const noexcept { return masks_ed_.has_value(); }
  const FlowLossParams& params() const noexcept { return params_; }
  const Image& frame_ed() const noexcept { return i_ed_; }
  const Image& frame_t() const noexcept { return i_t_; }

  /// Same energy on 2x box-downsampled frames and (soft) masks.
  FlowObjective downsampled() const {
    FlowObjective out(*this);
    out.i_ed_ = downsample2(i_ed_);
    out.i_t_ = downsample2(i_t_);
    if (masks_ed_) {
      for (std::size_t s = 0; s < masks_ed_->size(); ++s) {
        (*out.masks_ed_)[s] = downsample2((*masks_ed_)[s]);
        (*out.masks_es_)[s] = downsample2((*masks_es_)[s]);
      }
    }
    return out;
  }

  LossTerms evaluate(const FlowField& flow) const { return evaluate_impl(flow, nullptr); }

  /// Energy and its analytic gradient with respect to every flow component.
  LossTerms evaluate(const FlowField& flow, FlowField& grad) const {
    grad = FlowField(width(), height());
    return evaluate_impl(flow, &grad);
  }

  /// Per-structure Dice of ED masks against ES masks warped by `flow`.
  std::array<double, 3> structure_dice(const FlowField& flow) const {
    if (!masks_ed_) throw DomainError("structure_dice: pair has no supervision");
    std::array<double, 3> out{};
    for (std::size_t s = 0; s < out.size(); ++s) {
      out[s] = dice((*masks_ed_)[s], warp_image((*masks_es_)[s], flow), params_.epsilon_dice);
    }
    return out;
  }

 private:
  using Masks = std::array<Image, 3>;

  void check_flow(const FlowField& flow) const {
    if (!flow.fx.same_shape(i_ed_) || !flow.fy.same_shape(i_ed_)) {
      throw DomainError("flow dimensions do not match the frame pair");
    }
  }

  LossTerms evaluate_impl(const FlowField& flow, FlowField* grad) const {
    check_flow(flow);
    LossTerms terms;
    const int w = width();
    const int h = height();

    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto s = sample_bilinear(i_t_, x + flow.fx(x, y), y + flow.fy(x, y));
        const double r = i_ed_(x, y) - s.value;
        terms.img += r * r;
        if (grad) {
          grad->fx(x, y) += -2.0 * r * s.dx;
          grad->fy(x, y) += -2.0 * r * s.dy;
        }
      }
    }

    const double p1 = params_.p1;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (x + 1 < w) {
          const double d = 1.0 + flow.fx(x + 1, y) - flow.fx(x, y);
          if (d < 0.0) {
            terms.cross += d * d;
            if (grad) {
              grad->fx(x + 1, y) += p1 * 2.0 * d;
              grad->fx(x, y) -= p1 * 2.0 * d;
            }
          }
        }
        if (y + 1 < h) {
          const double d = 1.0 + flow.fy(x, y + 1) - flow.fy(x, y);
          if (d < 0.0) {
            terms.cross += d * d;
            if (grad) {
              grad->fy(x, y + 1) += p1 * 2.0 * d;
              grad->fy(x, y) -= p1 * 2.0 * d;
            }
          }
        }
      }
    }

    if (masks_ed_) {
      terms.supervised = true;
      const double eps = params_.epsilon_dice;
      std::vector<BilinearSample> warped(static_cast<std::size_t>(w) * h);
      for (std::size_t s = 0; s < masks_ed_->size(); ++s) {
        const Image& u = (*masks_ed_)[s];
        const Image& es = (*masks_es_)[s];
        double su = 0.0, sv = 0.0, suv = 0.0;
        for (int y = 0; y < h; ++y) {
          for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            warped[i] = sample_bilinear(es, x + flow.fx[i], y + flow.fy[i]);
            su += u[i];
            sv += warped[i].value;
            suv += u[i] * warped[i].value;
          }
        }
        const double a = 2.0 * suv + eps;
        const double b = su + sv + eps;
        terms.gt += -a / b;
        if (grad && params_.p2 != 0.0) {
          const double p2 = params_.p2;
          for (std::size_t i = 0; i < warped.size(); ++i) {
            const double d_dv = -(2.0 * u[i] * b - a) / (b * b);
            grad->fx[i] += p2 * d_dv * warped[i].dx;
            grad->fy[i] += p2 * d_dv * warped[i].dy;
          }
        }
      }
    }

    terms.total = terms.img + p1 * terms.cross + (terms.supervised ? params_.p2 * terms.gt : 0.0);
    return terms;
  }

  FlowLossParams params_;
  Image i_ed_;
  Image i_t_;
  std::optional<Masks> masks_ed_;
  std::optional<Masks> masks_es_;
};

/// Sum over pixels of (I_ED(P) - I_t(P + F(P)))^2.
inline double loss_img(const FramePair& pair, const FlowField& flow) {
  pair.validate();
  if (!flow.fx.same_shape(pair.i_ed)) throw DomainError("loss_img: flow dimensions do not match the frames");
  double acc = 0.0;
  for (int y = 0; y < pair.i_ed.height(); ++y) {
    for (int x = 0; x < pair.i_ed.width(); ++x) {
      const double r = pair.i_ed(x, y) - warp_sample(pair.i_t, flow, x, y);
      acc += r * r;
    }
  }
  return acc;
}

/// Sum over LVC, LVM, RVC of Dice(M_ED, M_ES o W_F); range (-3, 0].
inline double loss_gt(const FramePair& pair, const FlowField& flow, double epsilon) {
  if (!pair.supervision) throw DomainError("loss_gt: frame pair carries no ground-truth masks");
  pair.validate();
  double acc = 0.0;
  for (auto s : anatomy::kStructures) {
    acc += dice(pair.supervision->mask_ed.binary(s), warp_image(pair.supervision->mask_es.binary(s), flow), epsilon);
  }
  return acc;
}

inline LossTerms loss_terms(const FramePair& pair, const FlowField& flow, const FlowLossParams& params) {
  return FlowObjective(pair, params).evaluate(flow);
}

/// L_IMG + p1 L_CROSS (+ p2 L_GT when the pair is supervised).
inline double loss_total(const FramePair& pair, const FlowField& flow, const FlowLossParams& params) {
  return loss_terms(pair, flow, params).total;
}

inline FlowField loss_gradient(const FramePair& pair, const FlowField& flow, const FlowLossParams& params) {
  FlowField grad;
  FlowObjective(pair, params).evaluate(flow, grad);
  return grad;
}

}  // namespace cardioflow::flow
