#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "cardioflow/category.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/features.hpp"

namespace cardioflow::classify {

inline constexpr double kDefaultC = 50.0;

/// Ridge logistic regression on a bound subset of the features.
struct BinaryClassifier {
  std::vector<Feature> binding;
  std::vector<double> weights;
  double bias = 0.0;
  double c = kDefaultC;

  void validate() const {
    if (binding.empty() || binding.size() > 3) throw ValidationError("binding", "must bind 1 to 3 features");
    if (weights.size() != binding.size()) throw ValidationError("weights", "must match the binding length");
    if (!(c > 0.0)) throw ValidationError("c", "must be > 0");
  }

  /// sum_i p_i f_i + b
  double margin(const FeatureVector& fv) const {
    double m = bias;
    for (std::size_t i = 0; i < binding.size(); ++i) m += weights[i] * fv.bound(binding[i]);
    return m;
  }

  bool predict(const FeatureVector& fv) const { return margin(fv) >= 0.0; }

  friend bool operator==(const BinaryClassifier&, const BinaryClassifier&) = default;
};

/// Optional starting point for the solver (weights then bias); zero when absent.
struct StartPoint {
  std::vector<double> weights;
  double bias = 0.0;
};

struct TrainingReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  double objective = 0.0;
};

namespace detail {

/// log(1 + exp(-z)) without overflow.
inline double softplus_neg(double z) { return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

/// 1 / (1 + exp(z))
inline double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

struct Sample {
  std::vector<double> x;
  int y;
};

}  // namespace detail

/// Objective: 0.5 |p|^2 + C sum_m log(1 + exp(-y_m (p.f_m + b))); the bias is not penalized.
inline double training_objective(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                 const std::vector<double>& p, double b, double c) {
  double obj = 0.0;
  for (double w : p) obj += 0.5 * w * w;
  for (std::size_t m = 0; m < x.size(); ++m) {
    double z = b;
    for (std::size_t i = 0; i < p.size(); ++i) z += p[i] * x[m][i];
    obj += c * detail::softplus_neg(y[m] * z);
  }
  return obj;
}

/// Newton iteration with backtracking line search, from zero by default. Samples are
/// summed in a canonical order so any permutation of the input gives
/// bit-identical parameters.
inline BinaryClassifier train_binary(const std::vector<FeatureVector>& features, const std::vector<int>& labels,
                                     const std::vector<Feature>& binding, double c = kDefaultC,
                                     TrainingReport* report = nullptr, const StartPoint* start = nullptr) {
  if (features.size() != labels.size()) throw DomainError("train_binary: features and labels differ in length");
  BinaryClassifier clf;
  clf.binding = binding;
  clf.weights.assign(binding.size(), 0.0);
  clf.c = c;
  clf.validate();

  std::vector<detail::Sample> samples;
  bool pos = false, neg = false;
  for (std::size_t m = 0; m < features.size(); ++m) {
    if (labels[m] != 1 && labels[m] != -1) throw DomainError("train_binary: labels must be +1 or -1");
    detail::Sample s{{}, labels[m]};
    for (auto f : binding) s.x.push_back(features[m].bound(f));
    samples.push_back(std::move(s));
    (labels[m] > 0 ? pos : neg) = true;
  }
  if (!pos || !neg) throw DegenerateTrainingError("training set has a single class");
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); });

  const int d = static_cast<int>(binding.size());
  const int n = d + 1;  // weights then bias
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
  if (start) {
    if (start->weights.size() != binding.size()) throw DomainError("train_binary: start point has the wrong size");
    for (int i = 0; i < d; ++i) theta[i] = start->weights[static_cast<std::size_t>(i)];
    theta[d] = start->bias;
  }

  auto objective = [&](const Eigen::VectorXd& t) {
    double obj = 0.5 * t.head(d).squaredNorm();
    for (const auto& s : samples) {
      double z = t[d];
      for (int i = 0; i < d; ++i) z += t[i] * s.x[static_cast<std::size_t>(i)];
      obj += c * detail::softplus_neg(s.y * z);
    }
    return obj;
  };

  constexpr int kMaxIterations = 200;
  constexpr double kTolerance = 1e-8;
  double f = objective(theta);
  int it = 0;
  double gnorm = 0.0;
  for (;; ++it) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    g.head(d) = theta.head(d);
    for (int i = 0; i < d; ++i) hess(i, i) = 1.0;
    for (const auto& s : samples) {
      Eigen::VectorXd xv(n);
      for (int i = 0; i < d; ++i) xv[i] = s.x[static_cast<std::size_t>(i)];
      xv[d] = 1.0;
      const double z = theta.dot(xv);
      const double q = detail::sigmoid_neg(s.y * z);  // 1 - sigma(y z)
      g -= c * s.y * q * xv;
      hess += c * q * (1.0 - q) * xv * xv.transpose();
    }
    gnorm = g.norm();
    // The summed gradient carries rounding of order eps * f.
    if (gnorm < kTolerance * std::max(1.0, f)) break;
    if (it >= kMaxIterations) throw NumericalFailure(it, "logistic regression did not reach gradient norm 1e-8 * max(1, f)");

    Eigen::VectorXd step = hess.ldlt().solve(-g);
    if (!step.allFinite() || step.dot(g) >= 0.0) step = -g;
    // Saturated samples leave the Hessian near singular; cap the step length.
    const double cap = 10.0 * (1.0 + theta.norm());
    if (step.norm() > cap) step *= cap / step.norm();
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = theta + alpha * step;
      const double ft = objective(trial);
      if (ft <= f + 1e-4 * alpha * g.dot(step)) {
        theta = trial;
        f = ft;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // Rounding floor: the objective no longer resolves the step.
      if (gnorm < 1e-6 * std::max(1.0, std::abs(f))) break;
      throw NumericalFailure(it, "logistic regression line search failed");
    }
  }
  for (int i = 0; i < d; ++i) clf.weights[static_cast<std::size_t>(i)] = theta[i];
  clf.bias = theta[d];
  if (report) *report = {it, gnorm, f};
  return clf;
}

// ---------------------------------------------------------------------------
// Cascade

struct Stage {
  Category target;
  BinaryClassifier classifier;
  friend bool operator==(const Stage&, const Stage&) = default;
};

enum class CascadeOrder { kDefault, kInverted };

inline std::array<Category, 4> stage_order(CascadeOrder order) {
  if (order == CascadeOrder::kInverted) return {Category::kMINF, Category::kDCM, Category::kHCM, Category::kRVA};
  return {Category::kRVA, Category::kHCM, Category::kDCM, Category::kMINF};
}

inline std::vector<Feature> default_binding(Category target) {
  switch (target) {
    case Category::kRVA: return {Feature::kV_RVC_ED, Feature::kEF_RVC, Feature::kR_RVCLV_ED};
    case Category::kHCM: return {Feature::kEF_LVC, Feature::kR_LVMLVC_ED, Feature::kMT_LVM_ED};
    case Category::kDCM: return {Feature::kV_LVC_ES, Feature::kRMD, Feature::kTMD};
    case Category::kMINF: return {Feature::kEF_LVC};
    case Category::kNOR: break;
  }
  throw DomainError("NOR has no classifier");
}

struct CascadeModel {
  std::vector<Stage> stages;  // applied in order; all "no" gives NOR
  friend bool operator==(const CascadeModel&, const CascadeModel&) = default;
};

struct StageExplanation {
  Category target;
  double margin = 0.0;
  bool yes = false;
  std::vector<std::pair<Feature, double>> contributions;  // p_i f_i
  double bias = 0.0;
};

struct CascadePrediction {
  Category category = Category::kNOR;
  std::vector<StageExplanation> stages;  // evaluated stages only
};

inline CascadePrediction predict_cascade(const CascadeModel& model, const FeatureVector& fv) {
  CascadePrediction out;
  for (const auto& st : model.stages) {
    StageExplanation e;
    e.target = st.target;
    e.bias = st.classifier.bias;
    for (std::size_t i = 0; i < st.classifier.binding.size(); ++i) {
      e.contributions.emplace_back(st.classifier.binding[i], st.classifier.weights[i] * fv.bound(st.classifier.binding[i]));
    }
    e.margin = st.classifier.margin(fv);
    e.yes = e.margin >= 0.0;
    out.stages.push_back(e);
    if (e.yes) {
      out.category = st.target;
      return out;
    }
  }
  out.category = Category::kNOR;
  return out;
}

/// Categories a stage is trained on: its target, every later stage's target, and NOR.
inline std::vector<Category> training_subset(const std::vector<Category>& order, std::size_t stage) {
  std::vector<Category> cats(order.begin() + static_cast<std::ptrdiff_t>(stage), order.end());
  cats.push_back(Category::kNOR);
  return cats;
}

struct LabeledCase {
  FeatureVector features;
  Category category;
};

struct CascadeConfig {
  double c = kDefaultC;
  CascadeOrder order = CascadeOrder::kDefault;
  std::array<std::vector<Feature>, kCategoryCount> bindings{};  // empty entry = default binding

  std::vector<Feature> binding_for(Category target) const {
    const auto& b = bindings[static_cast<std::size_t>(category_index(target))];
    return b.empty() ? default_binding(target) : b;
  }
};

inline CascadeModel train_cascade(const std::vector<LabeledCase>& cases, const CascadeConfig& cfg = {}) {
  std::array<int, kCategoryCount> counts{};
  for (const auto& c : cases) ++counts[static_cast<std::size_t>(category_index(c.category))];
  for (auto cat : kAllCategories) {
    if (counts[static_cast<std::size_t>(category_index(cat))] == 0) {
      throw DegenerateTrainingError("no training case of category " + std::string(category_name(cat)));
    }
  }
  const auto order_arr = stage_order(cfg.order);
  const std::vector<Category> order(order_arr.begin(), order_arr.end());
  CascadeModel model;
  for (std::size_t s = 0; s < order.size(); ++s) {
    const auto subset = training_subset(order, s);
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (const auto& c : cases) {
      if (std::find(subset.begin(), subset.end(), c.category) == subset.end()) continue;
      x.push_back(c.features);
      y.push_back(c.category == order[s] ? 1 : -1);
    }
    model.stages.push_back({order[s], train_binary(x, y, cfg.binding_for(order[s]), cfg.c)});
  }
  return model;
}

// ---------------------------------------------------------------------------
// Evaluation

/// Rows: truth, columns: prediction, both in reporting order NOR, RVA, HCM, DCM, MINF.
using ConfusionMatrix = std::array<std::array<int, kCategoryCount>, kCategoryCount>;

struct ClassMetrics {
  std::array<double, kCategoryCount> precision{};
  std::array<double, kCategoryCount> recall{};
  double accuracy = 0.0;
};

/// Precision and recall per category; an empty column or row yields 0.
inline ClassMetrics metrics_from_confusion(const ConfusionMatrix& m) {
  ClassMetrics out;
  int total = 0, correct = 0;
  for (int i = 0; i < kCategoryCount; ++i) {
    int row = 0, col = 0;
    for (int j = 0; j < kCategoryCount; ++j) {
      row += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      col += m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    }
    const int tp = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    out.precision[static_cast<std::size_t>(i)] = col > 0 ? static_cast<double>(tp) / col : 0.0;
    out.recall[static_cast<std::size_t>(i)] = row > 0 ? static_cast<double>(tp) / row : 0.0;
    total += row;
    correct += tp;
  }
  out.accuracy = total > 0 ? static_cast<double>(correct) / total : 0.0;
  return out;
}

struct CrossValidationResult {
  double accuracy = 0.0;
  ConfusionMatrix confusion{};
  ClassMetrics metrics;
  std::vector<int> fold_of;         // fold index per input case
  std::vector<Category> predicted;  // per input case
};

/// Deterministic shuffle: Fisher-Yates driven by raw mt19937_64 draws.
inline void shuffle_indices(std::vector<std::size_t>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

/// Fold index per case. Stratified: each category is shuffled and dealt
/// round-robin, which requires every category count to be divisible by k.
inline std::vector<int> assign_folds(const std::vector<LabeledCase>& cases, int k, bool stratified, std::uint64_t seed) {
  if (k < 2) throw ConfigurationError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(k) > cases.size()) throw ConfigurationError("more folds than cases");
  std::mt19937_64 rng(seed);
  std::vector<int> fold(cases.size(), -1);
  if (!stratified) {
    std::vector<std::size_t> idx(cases.size());
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_indices(idx, rng);
    for (std::size_t p = 0; p < idx.size(); ++p) fold[idx[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
    return fold;
  }
  for (auto cat : kAllCategories) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (cases[i].category == cat) idx.push_back(i);
    }
    if (idx.size() % static_cast<std::size_t>(k) != 0) {
      throw ConfigurationError("category " + std::string(category_name(cat)) + " has " + std::to_string(idx.size()) +
                               " cases, not divisible into " + std::to_string(k) + " stratified folds");
    }
    shuffle_indices(idx, rng);
    for (std::size_t p = 0; p < idx.size(); ++p) fold[idx[p]] = static_cast<int>(p % static_cast<std::size_t>(k));
  }
  return fold;
}

inline CrossValidationResult cross_validate(const std::vector<LabeledCase>& cases, int k, const CascadeConfig& cfg = {},
                                            bool stratified = true, std::uint64_t seed = 0) {
  CrossValidationResult r;
  r.fold_of = assign_folds(cases, k, stratified, seed);
  r.predicted.assign(cases.size(), Category::kNOR);
  for (int f = 0; f < k; ++f) {
    std::vector<LabeledCase> train;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (r.fold_of[i] != f) train.push_back(cases[i]);
    }
    const auto model = train_cascade(train, cfg);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      if (r.fold_of[i] == f) r.predicted[i] = predict_cascade(model, cases[i].features).category;
    }
  }
  for (std::size_t i = 0; i < cases.size(); ++i) {
    ++r.confusion[static_cast<std::size_t>(category_index(cases[i].category))]
                 [static_cast<std::size_t>(category_index(r.predicted[i]))];
  }
  r.metrics = metrics_from_confusion(r.confusion);
  r.accuracy = r.metrics.accuracy;
  return r;
}

/// Errors of one binary classifier under k-fold cross-validation on the cases of `subset`.
inline int binary_cv_errors(const std::vector<LabeledCase>& cases, Category target, const std::vector<Category>& subset,
                            const std::vector<Feature>& binding, int k, double c, std::uint64_t seed) {
  std::vector<LabeledCase> sel;
  for (const auto& cs : cases) {
    if (std::find(subset.begin(), subset.end(), cs.category) != subset.end()) sel.push_back(cs);
  }
  const auto fold = assign_folds(sel, k, true, seed);
  int errors = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<FeatureVector> x;
    std::vector<int> y;
    for (std::size_t i = 0; i < sel.size(); ++i) {
      if (fold[i] == f) continue;
      x.push_back(sel[i].features);
      y.push_back(sel[i].category == target ? 1 : -1);
    }
    const auto clf = train_binary(x, y, binding, c);
    for (std::size_t i = 0; i < sel.size(); ++i) {
      if (fold[i] == f && clf.predict(sel[i].features) != (sel[i].category == target)) ++errors;
    }
  }
  return errors;
}

inline const std::vector<double>& default_c_sweep() {
  static const std::vector<double> cs = {1, 5, 10, 50, 100, 500, 1000, 5000};
  return cs;
}

}  // namespace cardioflow::classify
