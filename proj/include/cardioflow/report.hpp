#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "cardioflow/category.hpp"
#include "cardioflow/classifier.hpp"
#include "cardioflow/motion_features.hpp"

namespace cardioflow::report {

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline constexpr std::array<const char*, 6> kSegmentColors = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
inline constexpr std::array<const char*, kCategoryCount> kCategoryColors = {"#2ca02c", "#9467bd", "#ff7f0e", "#1f77b4", "#d62728"};

struct Frame {
  double x0 = 60, y0 = 20, w = 420, h = 260;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

inline std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel) {
  std::string s;
  s += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) + "\" height=\"" + num(f.h) +
       "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double yv = f.ymin + (f.ymax - f.ymin) * t / 4.0;
    s += "<text x=\"" + num(f.x0 - 6) + "\" y=\"" + num(f.py(yv) + 4) + "\" font-size=\"10\" text-anchor=\"end\">" + num(yv) + "</text>\n";
    const double xv = f.xmin + (f.xmax - f.xmin) * t / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(f.y0 + f.h + 14) + "\" font-size=\"10\" text-anchor=\"middle\">" + num(xv) + "</text>\n";
  }
  s += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 32) + "\" font-size=\"12\" text-anchor=\"middle\">" + xlabel + "</text>\n";
  s += "<text x=\"14\" y=\"" + num(f.y0 + f.h / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
       num(f.y0 + f.h / 2) + ")\">" + ylabel + "</text>\n";
  return s;
}

inline std::string open_svg(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
         num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace detail

/// Radius (solid) and thickness (dotted) of each segment over the 10 instants of one slice.
inline std::string series_svg(const motion::SegmentSeries& s, const std::string& title) {
  detail::Frame f;
  f.xmin = 0;
  f.xmax = motion::kInstants - 1;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
    for (std::size_t i = 0; i < motion::kInstants; ++i) {
      lo = std::min({lo, s.ra[k][i], s.th[k][i]});
      hi = std::max({hi, s.ra[k][i], s.th[k][i]});
    }
  }
  f.ymin = std::min(0.0, lo);
  f.ymax = hi > f.ymin ? hi * 1.05 : f.ymin + 1.0;
  std::string out = detail::open_svg(620, 330);
  out += "<text x=\"270\" y=\"14\" font-size=\"13\" text-anchor=\"middle\">" + title + "</text>\n";
  out += detail::axes(f, "instant i", "mm/m^2");
  for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
    for (int which = 0; which < 2; ++which) {
      const auto& v = which == 0 ? s.ra[k] : s.th[k];
      std::string pts;
      for (std::size_t i = 0; i < motion::kInstants; ++i) pts += detail::num(f.px(static_cast<double>(i))) + "," + detail::num(f.py(v[i])) + " ";
      out += "<polyline fill=\"none\" stroke=\"" + std::string(detail::kSegmentColors[k]) + "\" stroke-width=\"1.5\"" +
             (which == 1 ? " stroke-dasharray=\"2,3\"" : "") + " points=\"" + pts + "\"/>\n";
    }
    const double ly = 30 + 16.0 * static_cast<double>(k);
    out += "<line x1=\"500\" y1=\"" + detail::num(ly) + "\" x2=\"520\" y2=\"" + detail::num(ly) + "\" stroke=\"" +
           detail::kSegmentColors[k] + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"526\" y=\"" + detail::num(ly + 4) + "\" font-size=\"11\">segment " + std::to_string(k) + "</text>\n";
  }
  out += "<text x=\"500\" y=\"140\" font-size=\"10\">solid: radius</text>\n<text x=\"500\" y=\"154\" font-size=\"10\">dotted: thickness</text>\n";
  out += "</svg>\n";
  return out;
}

struct ScatterPoint {
  double rmd = 0.0;
  double tmd = 0.0;
  Category category = Category::kNOR;
};

/// RMD against TMD, one colour per category.
inline std::string motion_scatter_svg(const std::vector<ScatterPoint>& pts) {
  detail::Frame f;
  double xmax = 0.0, ymax = 0.0;
  for (const auto& p : pts) {
    xmax = std::max(xmax, p.rmd);
    ymax = std::max(ymax, p.tmd);
  }
  f.xmax = xmax > 0 ? xmax * 1.1 : 1.0;
  f.ymax = ymax > 0 ? ymax * 1.1 : 1.0;
  std::string out = detail::open_svg(620, 330);
  out += detail::axes(f, "RMD", "TMD");
  for (const auto& p : pts) {
    out += "<circle cx=\"" + detail::num(f.px(p.rmd)) + "\" cy=\"" + detail::num(f.py(p.tmd)) + "\" r=\"3.5\" fill=\"" +
           detail::kCategoryColors[static_cast<std::size_t>(category_index(p.category))] + "\" fill-opacity=\"0.8\"/>\n";
  }
  for (auto c : kAllCategories) {
    const double ly = 30 + 16.0 * category_index(c);
    out += "<circle cx=\"508\" cy=\"" + detail::num(ly) + "\" r=\"4\" fill=\"" + detail::kCategoryColors[static_cast<std::size_t>(category_index(c))] +
           "\"/>\n<text x=\"518\" y=\"" + detail::num(ly + 4) + "\" font-size=\"11\">" + std::string(category_name(c)) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

inline std::string confusion_text(const classify::ConfusionMatrix& m) {
  std::string out = "truth\\pred";
  for (auto c : kAllCategories) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%6s", std::string(category_name(c)).c_str());
    out += buf;
  }
  out += "\n";
  for (auto r : kAllCategories) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%-10s", std::string(category_name(r)).c_str());
    out += buf;
    for (auto c : kAllCategories) {
      std::snprintf(buf, sizeof buf, "%6d", m[static_cast<std::size_t>(category_index(r))][static_cast<std::size_t>(category_index(c))]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::string metrics_text(const classify::ClassMetrics& m) {
  std::string out = "category  precision  recall\n";
  for (auto c : kAllCategories) {
    char buf[64];
    const auto i = static_cast<std::size_t>(category_index(c));
    std::snprintf(buf, sizeof buf, "%-9s %9.2f %7.2f\n", std::string(category_name(c)).c_str(), m.precision[i], m.recall[i]);
    out += buf;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "accuracy  %.4f\n", m.accuracy);
  return out + buf;
}

}  // namespace cardioflow::report
