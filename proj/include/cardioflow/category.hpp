#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "cardioflow/errors.hpp"

namespace cardioflow {

/// Diagnostic groups, in reporting order.
enum class Category : int { kNOR = 0, kRVA = 1, kHCM = 2, kDCM = 3, kMINF = 4 };

inline constexpr int kCategoryCount = 5;
inline constexpr std::array<Category, kCategoryCount> kAllCategories = {
    Category::kNOR, Category::kRVA, Category::kHCM, Category::kDCM, Category::kMINF};

inline std::string_view category_name(Category c) {
  static constexpr std::array<std::string_view, kCategoryCount> names = {"NOR", "RVA", "HCM", "DCM", "MINF"};
  return names[static_cast<std::size_t>(c)];
}

inline std::optional<Category> try_parse_category(std::string_view s) {
  for (auto c : kAllCategories) {
    if (category_name(c) == s) return c;
  }
  return std::nullopt;
}

inline Category parse_category(std::string_view s) {
  if (auto c = try_parse_category(s)) return *c;
  throw FormatError("unknown category '" + std::string(s) + "'");
}

inline int category_index(Category c) { return static_cast<int>(c); }

}  // namespace cardioflow
