#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "cardioflow/errors.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/flow_loss.hpp"
#include "cardioflow/grid.hpp"

namespace cardioflow::flow {

/// Coarse-to-fine descent settings.
///
/// Each level runs momentum descent on the flow energy. The descent direction
/// is the analytic gradient smoothed by a Gaussian of `smoothing_sigma`
/// pixels (a Sobolev-type preconditioner); the energy itself is unchanged.
/// With `adaptive_step` the step is normalized so that the first update moves
/// no pixel by more than `step` pixels, then grown by 5% after accepted
/// updates and halved (momentum reset) after rejected ones. Without it,
/// `step` is a fixed multiplier on the direction.
struct OptimizerConfig {
  int levels = 3;
  int iterations = 40;  // per level
  double step = 0.25;
  double momentum = 0.9;
  double tol = 1e-6;
  double smoothing_sigma = 4.0;
  bool adaptive_step = true;

  void validate() const {
    if (levels < 1) throw ValidationError("levels", "must be >= 1");
    if (iterations < 0) throw ValidationError("iterations", "must be >= 0");
    if (!(step > 0.0)) throw ValidationError("step", "must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum", "must be in [0, 1)");
    if (!(tol >= 0.0)) throw ValidationError("tol", "must be >= 0");
    if (!(smoothing_sigma >= 0.0)) throw ValidationError("smoothing_sigma", "must be >= 0");
  }
};

struct EstimateResult {
  FlowField flow;
  LossTerms terms;                          // at the returned flow, full resolution
  int iterations = 0;                       // summed over levels
  std::vector<std::vector<double>> traces;  // accepted energies per level, coarsest first
};

/// Resamples a flow onto a grid twice as fine and doubles its magnitude.
inline FlowField upsample_flow(const FlowField& coarse, int width, int height) {
  FlowField fine(width, height);
  const double sx = static_cast<double>(coarse.width()) / width;
  const double sy = static_cast<double>(coarse.height()) / height;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double cx = (x + 0.5) * sx - 0.5;
      const double cy = (y + 0.5) * sy - 0.5;
      fine.fx(x, y) = sample_bilinear(coarse.fx, cx, cy).value / sx;
      fine.fy(x, y) = sample_bilinear(coarse.fy, cx, cy).value / sy;
    }
  }
  return fine;
}

namespace detail {

inline double max_abs(const FlowField& f) {
  double m = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max({m, std::abs(f.fx[i]), std::abs(f.fy[i])});
  return m;
}

inline void descend_level(const FlowObjective& objective, FlowField& flow, const OptimizerConfig& opt,
                          EstimateResult& result) {
  FlowField grad;
  LossTerms current = objective.evaluate(flow, grad);
  if (!std::isfinite(current.total)) throw NumericalFailure(result.iterations, "non-finite flow energy");
  auto& trace = result.traces.emplace_back();
  trace.push_back(current.total);

  FlowField velocity(flow.width(), flow.height());
  double alpha = opt.step;
  bool alpha_initialized = !opt.adaptive_step;
  constexpr int kWindow = 10;

  for (int it = 0; it < opt.iterations; ++it) {
    ++result.iterations;
    FlowField direction = grad;
    if (opt.smoothing_sigma > 0.0) {
      direction.fx = gaussian_blur(grad.fx, opt.smoothing_sigma);
      direction.fy = gaussian_blur(grad.fy, opt.smoothing_sigma);
    }
    if (!alpha_initialized) {
      const double m = max_abs(direction);
      if (m == 0.0) break;
      alpha = opt.step / m;
      alpha_initialized = true;
    }
    FlowField trial = flow;
    for (std::size_t i = 0; i < flow.size(); ++i) {
      velocity.fx[i] = opt.momentum * velocity.fx[i] - alpha * direction.fx[i];
      velocity.fy[i] = opt.momentum * velocity.fy[i] - alpha * direction.fy[i];
      trial.fx[i] += velocity.fx[i];
      trial.fy[i] += velocity.fy[i];
    }
    FlowField trial_grad;
    const LossTerms next = objective.evaluate(trial, trial_grad);
    if (!std::isfinite(next.total)) throw NumericalFailure(result.iterations, "non-finite flow energy");

    if (opt.adaptive_step && next.total > current.total) {
      alpha *= 0.5;
      velocity = FlowField(flow.width(), flow.height());
      if (alpha * max_abs(direction) < 1e-9) break;
      continue;
    }
    if (opt.adaptive_step) alpha *= 1.05;
    flow = std::move(trial);
    grad = std::move(trial_grad);
    current = next;
    trace.push_back(current.total);

    if (trace.size() > kWindow) {
      const double before = trace[trace.size() - 1 - kWindow];
      const double decrease = (before - current.total) / std::max(std::abs(before), 1e-300);
      if (decrease < opt.tol * kWindow) break;
    }
  }
}

}  // namespace detail

/// Minimizes the flow energy for one frame pair, coarse to fine from zero flow.
inline EstimateResult estimate_flow_detailed(const FramePair& pair, const FlowLossParams& params,
                                             const OptimizerConfig& opt) {
  opt.validate();
  std::vector<FlowObjective> pyramid;
  pyramid.emplace_back(pair, params);
  for (int l = 1; l < opt.levels; ++l) {
    const auto& prev = pyramid.back();
    if (prev.width() < 8 || prev.height() < 8) break;
    pyramid.push_back(prev.downsampled());
  }

  EstimateResult result;
  FlowField flow(pyramid.back().width(), pyramid.back().height());
  for (auto level = pyramid.rbegin(); level != pyramid.rend(); ++level) {
    if (flow.width() != level->width() || flow.height() != level->height()) {
      flow = upsample_flow(flow, level->width(), level->height());
    }
    detail::descend_level(*level, flow, opt, result);
  }
  result.terms = pyramid.front().evaluate(flow);
  result.flow = std::move(flow);
  return result;
}

inline FlowField estimate_flow(const FramePair& pair, const FlowLossParams& params, const OptimizerConfig& opt) {
  return estimate_flow_detailed(pair, params, opt).flow;
}

}  // namespace cardioflow::flow
