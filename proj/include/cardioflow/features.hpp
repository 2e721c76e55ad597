#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "cardioflow/errors.hpp"

namespace cardioflow {

/// The nine classifier inputs, in canonical column order.
enum class Feature : int {
  kV_RVC_ED = 0,
  kV_LVC_ES,
  kEF_RVC,
  kEF_LVC,
  kR_RVCLV_ED,
  kR_LVMLVC_ED,
  kMT_LVM_ED,
  kRMD,
  kTMD,
};

inline constexpr int kFeatureCount = 9;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "V_RVC_ED", "V_LVC_ES", "EF_RVC", "EF_LVC", "R_RVCLV_ED", "R_LVMLVC_ED", "MT_LVM_ED", "RMD", "TMD"};

inline std::string_view feature_name(Feature f) { return kFeatureNames[static_cast<std::size_t>(f)]; }

inline std::optional<Feature> try_parse_feature(std::string_view name) {
  for (int i = 0; i < kFeatureCount; ++i) {
    if (kFeatureNames[static_cast<std::size_t>(i)] == name) return static_cast<Feature>(i);
  }
  return std::nullopt;
}

inline Feature parse_feature(std::string_view name) {
  if (auto f = try_parse_feature(name)) return *f;
  throw BindingError(std::string(name));
}

struct FeatureVector {
  std::array<double, kFeatureCount> values{};

  double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
  double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }

  /// Value of a bound feature; throws BindingError when it is not finite.
  double bound(Feature f) const {
    const double v = (*this)[f];
    if (!std::isfinite(v)) throw BindingError(std::string(feature_name(f)));
    return v;
  }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

}  // namespace cardioflow
