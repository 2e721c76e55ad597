#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "cardioflow/anatomy.hpp"
#include "cardioflow/case_pipeline.hpp"
#include "cardioflow/category.hpp"
#include "cardioflow/classifier.hpp"
#include "cardioflow/errors.hpp"
#include "cardioflow/features.hpp"
#include "cardioflow/flow_field.hpp"
#include "cardioflow/motion_features.hpp"
#include "cardioflow/phantom.hpp"

namespace cardioflow::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Files

inline std::vector<char> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string read_text(const fs::path& path) {
  const auto b = read_file(path);
  return {b.begin(), b.end()};
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_file_atomic(const fs::path& path, const char* data, std::size_t size) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(data, static_cast<std::streamsize>(size));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void write_file_atomic(const fs::path& path, const std::vector<char>& bytes) {
  write_file_atomic(path, bytes.data(), bytes.size());
}

inline void write_file_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

inline void write_json(const fs::path& path, const json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

inline json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Numbers: shortest round-trip text.

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

inline double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end) throw FormatError(what + ": '" + s + "' is not a number");
  return v;
}

// ---------------------------------------------------------------------------
// PGM (binary P5, maxval <= 255)

inline std::vector<char> encode_pgm(const Grid<std::uint8_t>& g) {
  std::string header = "P5\n" + std::to_string(g.width()) + " " + std::to_string(g.height()) + "\n255\n";
  std::vector<char> out(header.begin(), header.end());
  for (auto v : g.values()) out.push_back(static_cast<char>(v));
  return out;
}

inline Grid<std::uint8_t> decode_pgm(const std::vector<char>& bytes, const std::string& name = "pgm") {
  std::size_t pos = 0;
  auto token = [&]() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    std::string t;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) t += bytes[pos++];
    return t;
  };
  if (token() != "P5") throw FormatError(name + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(token());
    h = std::stoi(token());
    maxval = std::stoi(token());
  } catch (const std::exception&) {
    throw FormatError(name + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || w > 1 << 15 || h > 1 << 15) throw FormatError(name + ": bad PGM dimensions");
  if (maxval <= 0 || maxval > 255) throw FormatError(name + ": only 8-bit PGM is supported");
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() < pos + n) throw FormatError(name + ": truncated PGM data");
  Grid<std::uint8_t> g(w, h, 0);
  for (std::size_t i = 0; i < n; ++i) g[i] = static_cast<std::uint8_t>(bytes[pos + i]);
  return g;
}

inline Grid<std::uint8_t> quantize(const Image& img) {
  Grid<std::uint8_t> g(img.width(), img.height(), 0);
  for (std::size_t i = 0; i < img.size(); ++i) {
    g[i] = static_cast<std::uint8_t>(std::lround(std::clamp(img[i], 0.0, 1.0) * 255.0));
  }
  return g;
}

inline Image dequantize(const Grid<std::uint8_t>& g) {
  Image img(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) img[i] = g[i] / 255.0;
  return img;
}

inline void write_image_pgm(const fs::path& path, const Image& img) { write_file_atomic(path, encode_pgm(quantize(img))); }

inline Image read_image_pgm(const fs::path& path) { return dequantize(decode_pgm(read_file(path), path.string())); }

inline void write_mask_pgm(const fs::path& path, const anatomy::LabelMask& m) { write_file_atomic(path, encode_pgm(m.codes())); }

inline anatomy::LabelMask read_mask_pgm(const fs::path& path) {
  try {
    return anatomy::LabelMask::from_codes(decode_pgm(read_file(path), path.string()));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_flow_file(const fs::path& path, const flow::FlowField& f) { write_file_atomic(path, flow::encode_flow(f)); }

inline flow::FlowField read_flow_file(const fs::path& path) {
  try {
    return flow::decode_flow(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Phantom spec JSON

inline json spec_to_json(const phantom::PhantomSpec& s) {
  return {
      {"category", category_name(s.category)},
      {"image_size", s.image_size},
      {"n_slices", s.n_slices},
      {"n_frames", s.n_frames},
      {"pixel_spacing_mm", s.pixel_spacing_mm},
      {"slice_gap_mm", s.slice_gap_mm},
      {"lv_center", {s.lv_center.x, s.lv_center.y}},
      {"rv_center", {s.rv_center.x, s.rv_center.y}},
      {"endo_radius_ed", s.endo_radius_ed},
      {"epi_radius_ed", s.epi_radius_ed},
      {"rv_radius_ed", s.rv_radius_ed},
      {"contraction_amplitude", s.contraction_amplitude},
      {"thickening_amplitude", s.thickening_amplitude},
      {"rv_contraction", s.rv_contraction},
      {"per_segment_activity", s.per_segment_activity},
      {"es_phase", s.es_phase},
      {"height_cm", s.height_cm},
      {"weight_kg", s.weight_kg},
      {"noise_sigma", s.noise_sigma},
      {"texture_sigma", s.texture_sigma},
      {"rng_seed", s.rng_seed},
  };
}

/// Missing keys keep their defaults; unknown keys are rejected.
inline phantom::PhantomSpec spec_from_json(const json& j) {
  phantom::PhantomSpec s;
  if (!j.is_object()) throw FormatError("phantom spec must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "category") s.category = parse_category(v.get<std::string>());
      else if (key == "image_size") s.image_size = v.get<int>();
      else if (key == "n_slices") s.n_slices = v.get<int>();
      else if (key == "n_frames") s.n_frames = v.get<int>();
      else if (key == "pixel_spacing_mm") s.pixel_spacing_mm = v.get<double>();
      else if (key == "slice_gap_mm") s.slice_gap_mm = v.get<double>();
      else if (key == "lv_center") s.lv_center = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "rv_center") s.rv_center = {v.at(0).get<double>(), v.at(1).get<double>()};
      else if (key == "endo_radius_ed") s.endo_radius_ed = v.get<double>();
      else if (key == "epi_radius_ed") s.epi_radius_ed = v.get<double>();
      else if (key == "rv_radius_ed") s.rv_radius_ed = v.get<double>();
      else if (key == "contraction_amplitude") s.contraction_amplitude = v.get<double>();
      else if (key == "thickening_amplitude") s.thickening_amplitude = v.get<double>();
      else if (key == "rv_contraction") s.rv_contraction = v.get<double>();
      else if (key == "per_segment_activity") s.per_segment_activity = v.get<std::array<double, 6>>();
      else if (key == "es_phase") s.es_phase = v.get<double>();
      else if (key == "height_cm") s.height_cm = v.get<double>();
      else if (key == "weight_kg") s.weight_kg = v.get<double>();
      else if (key == "noise_sigma") s.noise_sigma = v.get<double>();
      else if (key == "texture_sigma") s.texture_sigma = v.get<double>();
      else if (key == "rng_seed") s.rng_seed = v.get<std::uint64_t>();
      else throw ValidationError(key, "unknown phantom spec field");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("phantom spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Case directories
//
//   manifest.json
//   slice_SS/frame_TT.pgm   cine frames
//   slice_SS/mask_TT.pgm    label masks (at least ED and ES)
//   slice_SS/gt_flow_TT.cfl analytic ED -> TT displacement (phantom only)
//   flows/                  estimated flows, written by the flow step

inline constexpr const char* kCaseFormat = "cardioflow-case/1";

inline std::string two_digits(int v) {
  std::string s = std::to_string(v);
  return s.size() < 2 ? "0" + s : s;
}

inline fs::path slice_dir(const fs::path& case_dir, int s) { return case_dir / ("slice_" + two_digits(s)); }
inline fs::path frame_path(const fs::path& case_dir, int s, int t) { return slice_dir(case_dir, s) / ("frame_" + two_digits(t) + ".pgm"); }
inline fs::path mask_path(const fs::path& case_dir, int s, int t) { return slice_dir(case_dir, s) / ("mask_" + two_digits(t) + ".pgm"); }
inline fs::path gt_flow_path(const fs::path& case_dir, int s, int t) {
  return slice_dir(case_dir, s) / ("gt_flow_" + two_digits(t) + ".cfl");
}
inline fs::path flows_dir(const fs::path& case_dir) { return case_dir / "flows"; }
inline fs::path flow_path(const fs::path& case_dir, int s, int i) {
  return flows_dir(case_dir) / ("slice_" + two_digits(s) + "_i" + std::to_string(i) + ".cfl");
}

enum class GtFlowPolicy { kNone, kSampled, kAll };

struct CaseWriteOptions {
  bool all_masks = true;  // false: ED and ES only
  GtFlowPolicy gt_flow = GtFlowPolicy::kSampled;
};

inline json case_manifest(const pipeline::CaseData& c, const std::vector<int>& mask_frames) {
  json j;
  j["format"] = kCaseFormat;
  j["case_id"] = c.case_id;
  j["category"] = c.category ? json(category_name(*c.category)) : json(nullptr);
  j["image_width"] = c.masks_ed.empty() ? 0 : c.masks_ed[0].width();
  j["image_height"] = c.masks_ed.empty() ? 0 : c.masks_ed[0].height();
  j["n_slices"] = c.n_slices();
  j["n_frames"] = c.n_frames;
  j["ed_frame_index"] = c.ed_index;
  j["es_frame_index"] = c.es_index;
  j["pixel_spacing_mm"] = c.pixel_spacing;
  j["slice_positions_mm"] = c.slice_positions;
  j["height_cm"] = c.height_cm;
  j["weight_kg"] = c.weight_kg;
  j["mask_frames"] = mask_frames;
  return j;
}

/// Writes frames, masks and optional ground-truth flows of a phantom case.
inline void write_phantom_case(const fs::path& dir, const phantom::PhantomCase& pc, const std::string& case_id,
                               const CaseWriteOptions& opt = {}) {
  const auto data = pipeline::case_from_phantom(pc, case_id);
  std::vector<int> mask_frames;
  if (opt.all_masks) {
    for (int t = 0; t < pc.spec.n_frames; ++t) mask_frames.push_back(t);
  } else {
    mask_frames = {pc.ed_frame_index};
    if (pc.es_frame_index != pc.ed_frame_index) mask_frames.push_back(pc.es_frame_index);
    std::sort(mask_frames.begin(), mask_frames.end());
  }
  std::vector<int> gt_frames;
  if (opt.gt_flow == GtFlowPolicy::kAll) {
    for (int t = 0; t < pc.spec.n_frames; ++t) gt_frames.push_back(t);
  } else if (opt.gt_flow == GtFlowPolicy::kSampled) {
    const auto ts = motion::sample_frames(pc.spec.n_frames, pc.ed_frame_index);
    gt_frames.assign(ts.begin() + 1, ts.end());
    std::sort(gt_frames.begin(), gt_frames.end());
    gt_frames.erase(std::unique(gt_frames.begin(), gt_frames.end()), gt_frames.end());
  }
  for (int s = 0; s < pc.spec.n_slices; ++s) {
    const auto& sl = pc.slices[static_cast<std::size_t>(s)];
    for (int t = 0; t < pc.spec.n_frames; ++t) write_image_pgm(frame_path(dir, s, t), sl.frames[static_cast<std::size_t>(t)]);
    for (int t : mask_frames) write_mask_pgm(mask_path(dir, s, t), sl.masks[static_cast<std::size_t>(t)]);
    for (int t : gt_frames) write_flow_file(gt_flow_path(dir, s, t), pc.gt_flow(s, t));
  }
  json m = case_manifest(data, mask_frames);
  m["gt_flow_frames"] = gt_frames;
  m["phantom_spec"] = spec_to_json(pc.spec);
  write_json(dir / "manifest.json", m);
}

/// Writes a case from in-memory data (frames and ED/ES masks).
inline void write_case(const fs::path& dir, const pipeline::CaseData& c, const json& extra = json::object()) {
  c.validate();
  std::vector<int> mask_frames = {c.ed_index};
  if (c.es_index != c.ed_index) mask_frames.push_back(c.es_index);
  std::sort(mask_frames.begin(), mask_frames.end());
  for (int s = 0; s < c.n_slices(); ++s) {
    const auto su = static_cast<std::size_t>(s);
    for (int t = 0; t < static_cast<int>(c.frames.at(su).size()); ++t) {
      write_image_pgm(frame_path(dir, s, t), c.frames[su][static_cast<std::size_t>(t)]);
    }
    write_mask_pgm(mask_path(dir, s, c.ed_index), c.masks_ed[su]);
    write_mask_pgm(mask_path(dir, s, c.es_index), c.masks_es[su]);
  }
  json m = case_manifest(c, mask_frames);
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_json(dir / "manifest.json", m);
}

inline bool is_case_dir(const fs::path& dir) { return fs::is_regular_file(dir / "manifest.json"); }

/// Case directories directly below `root`, sorted by name; `root` itself when it is a case.
inline std::vector<fs::path> list_case_dirs(const fs::path& root) {
  if (is_case_dir(root)) return {root};
  if (!fs::is_directory(root)) throw FormatError(root.string() + " is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && is_case_dir(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class T>
T manifest_get(const json& m, const char* key, const fs::path& dir) {
  if (!m.contains(key)) throw FormatError(dir.string() + "/manifest.json: missing '" + key + "'");
  try {
    return m.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(dir.string() + "/manifest.json: bad '" + key + "': " + e.what());
  }
}

/// Loads a case; `load_frames` = false reads only the manifest and the ED/ES masks.
inline pipeline::CaseData read_case(const fs::path& dir, bool load_frames = true) {
  const json m = read_json(dir / "manifest.json");
  if (m.value("format", std::string()) != kCaseFormat) throw FormatError(dir.string() + ": unsupported case format");
  pipeline::CaseData c;
  c.case_id = manifest_get<std::string>(m, "case_id", dir);
  if (m.contains("category") && !m["category"].is_null()) c.category = parse_category(m["category"].get<std::string>());
  const int n_slices = manifest_get<int>(m, "n_slices", dir);
  c.n_frames = manifest_get<int>(m, "n_frames", dir);
  c.ed_index = manifest_get<int>(m, "ed_frame_index", dir);
  c.es_index = manifest_get<int>(m, "es_frame_index", dir);
  c.pixel_spacing = manifest_get<double>(m, "pixel_spacing_mm", dir);
  c.slice_positions = manifest_get<std::vector<double>>(m, "slice_positions_mm", dir);
  c.height_cm = manifest_get<double>(m, "height_cm", dir);
  c.weight_kg = manifest_get<double>(m, "weight_kg", dir);
  if (n_slices < 1) throw FormatError(dir.string() + ": n_slices must be >= 1");
  for (int s = 0; s < n_slices; ++s) {
    for (int t : {c.ed_index, c.es_index}) {
      const auto p = mask_path(dir, s, t);
      if (!fs::exists(p)) {
        throw FormatError(dir.string() + ": slice " + std::to_string(s) + " has no mask for frame " + std::to_string(t) +
                          " (" + p.filename().string() + ")");
      }
    }
    c.masks_ed.push_back(read_mask_pgm(mask_path(dir, s, c.ed_index)));
    c.masks_es.push_back(read_mask_pgm(mask_path(dir, s, c.es_index)));
    if (load_frames) {
      std::vector<Image> frames;
      for (int t = 0; t < c.n_frames; ++t) {
        const auto p = frame_path(dir, s, t);
        if (!fs::exists(p)) throw FormatError(dir.string() + ": slice " + std::to_string(s) + " lacks frame " + std::to_string(t));
        frames.push_back(read_image_pgm(p));
      }
      c.frames.push_back(std::move(frames));
    }
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Estimated flows of a case

inline void write_case_flows(const fs::path& case_dir, const std::vector<pipeline::SliceFlows>& flows) {
  json log = json::array();
  for (const auto& sf : flows) {
    for (int i = 1; i < motion::kInstants; ++i) write_flow_file(flow_path(case_dir, sf.slice, i), sf.flows[static_cast<std::size_t>(i)]);
    for (const auto& r : sf.records) {
      json e = {{"slice", r.slice},       {"instant", r.instant},       {"frame", r.frame},
                {"supervised", r.supervised}, {"iterations", r.iterations}, {"loss_img", r.terms.img},
                {"loss_cross", r.terms.cross}};
      e["loss_gt"] = r.supervised ? json(r.terms.gt) : json(nullptr);
      e["loss_total"] = r.terms.total;
      log.push_back(e);
    }
  }
  write_json(flows_dir(case_dir) / "flow_log.json", {{"pairs", log}});
}

/// Reads the flows of the selected slices back.
inline std::vector<pipeline::SliceFlows> read_case_flows(const fs::path& case_dir, const pipeline::CaseData& c,
                                                         motion::SliceMode mode) {
  const auto sel = pipeline::select_slices(c, mode);
  const auto frames = motion::sample_frames(c.n_frames, c.ed_index);
  std::vector<pipeline::SliceFlows> out;
  for (int s : sel.indices()) {
    pipeline::SliceFlows sf;
    sf.slice = s;
    sf.frames = frames;
    const auto& m = c.masks_ed[static_cast<std::size_t>(s)];
    sf.flows.emplace_back(m.width(), m.height());
    for (int i = 1; i < motion::kInstants; ++i) {
      const auto p = flow_path(case_dir, s, i);
      if (!fs::exists(p)) {
        throw FormatError(c.case_id + ": missing flow for slice " + std::to_string(s) + ", instant " + std::to_string(i) +
                          " (" + p.string() + ")");
      }
      sf.flows.push_back(read_flow_file(p));
    }
    out.push_back(std::move(sf));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features CSV

inline constexpr const char* kFeaturesHeaderComment = "# cardioflow-features v1";

struct FeatureRow {
  std::string case_id;
  std::optional<Category> category;
  FeatureVector features;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string features_header() {
  std::string h = "case_id,category";
  for (auto n : kFeatureNames) h += "," + std::string(n);
  return h;
}

inline std::string format_features_csv(const std::vector<FeatureRow>& rows) {
  std::string out = std::string(kFeaturesHeaderComment) + "\n" + features_header() + "\n";
  for (const auto& r : rows) {
    if (r.case_id.find(',') != std::string::npos) throw FormatError("case id '" + r.case_id + "' contains a comma");
    out += r.case_id + "," + (r.category ? std::string(category_name(*r.category)) : std::string());
    for (double v : r.features.values) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

inline std::vector<FeatureRow> parse_features_csv(const std::string& text, const std::string& name = "features.csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kFeaturesHeaderComment) {
    throw FormatError(name + ": expected header comment '" + std::string(kFeaturesHeaderComment) + "'");
  }
  if (!std::getline(in, line)) throw FormatError(name + ": missing column header");
  const auto cols = split_csv_line(line);
  const auto expected = split_csv_line(features_header());
  for (std::size_t i = 0; i < std::max(cols.size(), expected.size()); ++i) {
    const std::string got = i < cols.size() ? cols[i] : "<missing>";
    const std::string want = i < expected.size() ? expected[i] : "<none>";
    if (got != want) {
      throw FormatError(name + ": column " + std::to_string(i + 1) + " is '" + got + "', expected '" + want + "'");
    }
  }
  std::vector<FeatureRow> rows;
  int line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv_line(line);
    if (f.size() != expected.size()) {
      throw FormatError(name + ": line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " columns, expected " +
                        std::to_string(expected.size()));
    }
    FeatureRow r;
    r.case_id = f[0];
    if (!f[1].empty()) r.category = parse_category(f[1]);
    for (int k = 0; k < kFeatureCount; ++k) {
      r.features.values[static_cast<std::size_t>(k)] =
          parse_double(f[static_cast<std::size_t>(k + 2)], name + ": line " + std::to_string(line_no) + ", column " +
                                                               std::string(kFeatureNames[static_cast<std::size_t>(k)]));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline void write_features_csv(const fs::path& path, const std::vector<FeatureRow>& rows) {
  write_file_atomic(path, format_features_csv(rows));
}

inline std::vector<FeatureRow> read_features_csv(const fs::path& path) { return parse_features_csv(read_text(path), path.string()); }

// ---------------------------------------------------------------------------
// Segment series CSV and segment map JSON

inline std::string format_series_csv(const std::vector<motion::SegmentSeries>& series) {
  std::string out = "slice,k,i,RA,T\n";
  for (const auto& s : series) {
    for (std::size_t k = 0; k < anatomy::kSegmentCount; ++k) {
      for (std::size_t i = 0; i < motion::kInstants; ++i) {
        out += std::to_string(s.slice_index) + "," + std::to_string(k) + "," + std::to_string(i) + "," + format_double(s.ra[k][i]) +
               "," + format_double(s.th[k][i]) + "\n";
      }
    }
  }
  return out;
}

inline json segment_map_to_json(const anatomy::SegmentMap& seg) {
  json rows = json::array();
  for (int y = 0; y < seg.assignment.height(); ++y) {
    json row = json::array();
    for (int x = 0; x < seg.assignment.width(); ++x) row.push_back(static_cast<int>(seg.assignment(x, y)));
    rows.push_back(row);
  }
  const auto counts = seg.counts();
  return {{"b_l", {seg.b_l.x, seg.b_l.y}}, {"b_r", {seg.b_r.x, seg.b_r.y}}, {"counts", counts}, {"assignment", rows}};
}

// ---------------------------------------------------------------------------
// Model JSON

inline constexpr const char* kModelFormat = "cardioflow-model/1";

inline json classifier_to_json(const classify::BinaryClassifier& c) {
  json names = json::array();
  for (auto f : c.binding) names.push_back(feature_name(f));
  return {{"binding", names}, {"weights", c.weights}, {"bias", c.bias}, {"c", c.c}};
}

inline classify::BinaryClassifier classifier_from_json(const json& j) {
  classify::BinaryClassifier c;
  try {
    for (const auto& n : j.at("binding")) c.binding.push_back(parse_feature(n.get<std::string>()));
    c.weights = j.at("weights").get<std::vector<double>>();
    c.bias = j.at("bias").get<double>();
    c.c = j.value("c", classify::kDefaultC);
  } catch (const json::exception& e) {
    throw FormatError(std::string("classifier: ") + e.what());
  }
  c.validate();
  return c;
}

inline json model_to_json(const classify::CascadeModel& m, classify::CascadeOrder order = classify::CascadeOrder::kDefault) {
  json stages = json::array();
  for (const auto& st : m.stages) {
    json s = {{"target", category_name(st.target)}};
    const json c = classifier_to_json(st.classifier);
    for (const auto& [k, v] : c.items()) s[k] = v;
    stages.push_back(s);
  }
  return {{"format", kModelFormat}, {"order", order == classify::CascadeOrder::kInverted ? "inverted" : "default"}, {"stages", stages}};
}

inline classify::CascadeModel model_from_json(const json& j) {
  if (j.value("format", std::string()) != kModelFormat) throw FormatError("model: unsupported format");
  classify::CascadeModel m;
  try {
    for (const auto& s : j.at("stages")) {
      m.stages.push_back({parse_category(s.at("target").get<std::string>()), classifier_from_json(s)});
      if (m.stages.back().target == Category::kNOR) throw FormatError("model: NOR cannot be a stage target");
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
  if (m.stages.empty()) throw FormatError("model: no stages");
  return m;
}

inline void write_model(const fs::path& path, const classify::CascadeModel& m, classify::CascadeOrder order) {
  write_json(path, model_to_json(m, order));
}

inline classify::CascadeModel read_model(const fs::path& path) {
  try {
    return model_from_json(read_json(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline json explanation_to_json(const std::string& case_id, const classify::CascadePrediction& p) {
  json stages = json::array();
  for (const auto& s : p.stages) {
    json contrib = json::object();
    for (const auto& [f, v] : s.contributions) contrib[std::string(feature_name(f))] = v;
    stages.push_back({{"stage", category_name(s.target)}, {"margin", s.margin}, {"yes", s.yes}, {"bias", s.bias}, {"contributions", contrib}});
  }
  return {{"case_id", case_id}, {"predicted", category_name(p.category)}, {"stages", stages}};
}

// ---------------------------------------------------------------------------
// Predictions CSV

struct PredictionRow {
  std::string case_id;
  std::optional<Category> truth;
  Category predicted = Category::kNOR;
};

inline std::string format_predictions_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "# cardioflow-predictions v1\ncase_id,category,predicted\n";
  for (const auto& r : rows) {
    out += r.case_id + "," + (r.truth ? std::string(category_name(*r.truth)) : std::string()) + "," +
           std::string(category_name(r.predicted)) + "\n";
  }
  return out;
}

inline std::vector<PredictionRow> parse_predictions_csv(const std::string& text, const std::string& name = "predictions.csv") {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "# cardioflow-predictions v1") throw FormatError(name + ": bad header comment");
  if (!std::getline(in, line) || line != "case_id,category,predicted") throw FormatError(name + ": bad column header");
  std::vector<PredictionRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw FormatError(name + ": expected 3 columns in '" + line + "'");
    PredictionRow r{f[0], std::nullopt, parse_category(f[2])};
    if (!f[1].empty()) r.truth = parse_category(f[1]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cardioflow::io
