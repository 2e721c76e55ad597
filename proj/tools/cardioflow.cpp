// cardioflow command line tool.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cardioflow/cardioflow.hpp"

namespace fs = std::filesystem;
using namespace cardioflow;
using json = nlohmann::json;

namespace {

struct FlowOptions {
  flow::FlowLossParams loss;
  flow::OptimizerConfig opt;
  bool unsupervised = false;
  std::string slice_mode = "apply";
};

void add_flow_options(CLI::App* cmd, FlowOptions& o) {
  cmd->add_option("--p1", o.loss.p1, "crossing penalty weight")->capture_default_str();
  cmd->add_option("--p2", o.loss.p2, "Dice supervision weight")->capture_default_str();
  cmd->add_option("--epsilon", o.loss.epsilon_dice, "Dice stabilizer")->capture_default_str();
  cmd->add_option("--levels", o.opt.levels, "pyramid levels")->capture_default_str();
  cmd->add_option("--iterations", o.opt.iterations, "iterations per level")->capture_default_str();
  cmd->add_option("--step", o.opt.step, "initial step")->capture_default_str();
  cmd->add_option("--momentum", o.opt.momentum)->capture_default_str();
  cmd->add_option("--tol", o.opt.tol, "relative decrease tolerance")->capture_default_str();
  cmd->add_option("--smoothing-sigma", o.opt.smoothing_sigma, "gradient smoothing (px)")->capture_default_str();
  cmd->add_flag("--unsupervised", o.unsupervised, "never use the ED/ES masks in the flow energy");
  cmd->add_option("--slice-mode", o.slice_mode, "mid-stack selection")->check(CLI::IsMember({"apply", "train"}))->capture_default_str();
}

motion::SliceMode parse_slice_mode(const std::string& s) { return s == "train" ? motion::SliceMode::kTrain : motion::SliceMode::kApply; }

classify::CascadeOrder parse_order(const std::string& s) {
  return s == "inverted" ? classify::CascadeOrder::kInverted : classify::CascadeOrder::kDefault;
}

pipeline::FeatureConfig feature_config(const FlowOptions& o) {
  o.loss.validate();
  o.opt.validate();
  pipeline::FeatureConfig cfg;
  cfg.loss = o.loss;
  cfg.optimizer = o.opt;
  cfg.supervised_es = !o.unsupervised;
  cfg.slice_mode = parse_slice_mode(o.slice_mode);
  cfg.threads = 1;
  return cfg;
}

std::vector<classify::LabeledCase> labeled(const std::vector<io::FeatureRow>& rows, const std::string& what) {
  std::vector<classify::LabeledCase> out;
  for (const auto& r : rows) {
    if (!r.category) throw FormatError(what + ": case " + r.case_id + " has no category label");
    out.push_back({r.features, *r.category});
  }
  return out;
}

void require_distinct(const fs::path& a, const fs::path& b) {
  if (fs::weakly_canonical(a) == fs::weakly_canonical(b)) throw ConfigurationError("input and output locations must differ");
}

// ---------------------------------------------------------------------------

int cmd_gen_phantom(int per_category, std::uint64_t seed, int image_size, int n_slices, const std::string& gt_flow,
                    const std::string& masks, const fs::path& out, const std::string& spec_file, int threads) {
  std::vector<phantom::PhantomSpec> specs;
  if (!spec_file.empty()) {
    specs.push_back(io::spec_from_json(io::read_json(spec_file)));
  } else {
    if (per_category < 1) throw ValidationError("per-category", "must be >= 1");
    specs = phantom::sample_cohort_specs(per_category, seed, image_size);
    for (auto& s : specs) {
      s.n_slices = n_slices;
    }
  }
  for (auto& s : specs) s.validate();
  io::CaseWriteOptions opt;
  opt.all_masks = masks == "all";
  opt.gt_flow = gt_flow == "none" ? io::GtFlowPolicy::kNone : gt_flow == "all" ? io::GtFlowPolicy::kAll : io::GtFlowPolicy::kSampled;
  fs::create_directories(out);
  parallel_for(static_cast<int>(specs.size()), threads, [&](int i) {
    char id[32];
    std::snprintf(id, sizeof id, "case_%03d", i);
    const auto pc = phantom::generate_case(specs[static_cast<std::size_t>(i)]);
    io::write_phantom_case(out / id, pc, id, opt);
  });
  std::cout << "wrote " << specs.size() << " cases to " << out.string() << "\n";
  return 0;
}

int cmd_flow(const fs::path& cases_root, const FlowOptions& fo, int threads) {
  const auto cfg = feature_config(fo);
  const auto dirs = io::list_case_dirs(cases_root);
  if (dirs.empty()) throw FormatError("no case directories under " + cases_root.string());
  parallel_for(static_cast<int>(dirs.size()), threads, [&](int i) {
    const auto& dir = dirs[static_cast<std::size_t>(i)];
    const auto c = io::read_case(dir);
    io::write_case_flows(dir, pipeline::estimate_case_flows(c, cfg));
  });
  std::cout << "estimated flows for " << dirs.size() << " cases\n";
  return 0;
}

int cmd_features(const fs::path& cases_root, const fs::path& out, bool compute_flows, const FlowOptions& fo,
                 const fs::path& series_dir, int threads) {
  const auto cfg = feature_config(fo);
  const auto dirs = io::list_case_dirs(cases_root);
  if (dirs.empty()) throw FormatError("no case directories under " + cases_root.string());
  std::vector<io::FeatureRow> rows(dirs.size());
  parallel_for(static_cast<int>(dirs.size()), threads, [&](int i) {
    const auto& dir = dirs[static_cast<std::size_t>(i)];
    const auto c = io::read_case(dir, compute_flows);
    try {
      const auto flows = compute_flows ? pipeline::estimate_case_flows(c, cfg) : io::read_case_flows(dir, c, cfg.slice_mode);
      const auto f = pipeline::features_from_flows(c, flows);
      rows[static_cast<std::size_t>(i)] = {c.case_id, c.category, f.features};
      if (!series_dir.empty()) {
        io::write_file_atomic(series_dir / (c.case_id + "_series.csv"), io::format_series_csv(f.series));
        for (const auto& s : f.series) {
          const std::string name = c.case_id + "_slice_" + io::two_digits(s.slice_index);
          io::write_file_atomic(series_dir / (name + ".svg"), report::series_svg(s, name));
        }
      }
    } catch (const NumericalFailure&) {
      throw;
    } catch (const Error& e) {
      throw Error(c.case_id + ": " + e.what(), e.exit_code());
    }
  });
  io::write_features_csv(out, rows);
  std::cout << "wrote features of " << rows.size() << " cases to " << out.string() << "\n";
  return 0;
}

int cmd_train(const fs::path& features, const fs::path& out, double c, const std::string& order) {
  require_distinct(features, out);
  classify::CascadeConfig cfg;
  cfg.c = c;
  cfg.order = parse_order(order);
  const auto model = classify::train_cascade(labeled(io::read_features_csv(features), features.string()), cfg);
  io::write_model(out, model, cfg.order);
  for (const auto& st : model.stages) {
    std::cout << category_name(st.target) << ":";
    for (std::size_t i = 0; i < st.classifier.binding.size(); ++i) {
      const double w = st.classifier.weights[i];
      std::cout << (i == 0 ? (w < 0 ? " -" : " ") : (w < 0 ? " - " : " + ")) << std::abs(w) << "*"
                << feature_name(st.classifier.binding[i]);
    }
    const double b = st.classifier.bias;
    std::cout << (b < 0 ? " - " : " + ") << std::abs(b) << "\n";
  }
  return 0;
}

int cmd_predict(const fs::path& model_path, const fs::path& features, const fs::path& out, const fs::path& explain) {
  require_distinct(features, out);
  const auto model = io::read_model(model_path);
  const auto rows = io::read_features_csv(features);
  std::vector<io::PredictionRow> preds;
  json expl = json::array();
  int labeled_n = 0, correct = 0;
  for (const auto& r : rows) {
    classify::CascadePrediction p;
    try {
      p = classify::predict_cascade(model, r.features);
    } catch (const BindingError& e) {
      throw BindingError(e.feature() + "' of case '" + r.case_id);
    }
    preds.push_back({r.case_id, r.category, p.category});
    expl.push_back(io::explanation_to_json(r.case_id, p));
    std::cout << r.case_id << " " << category_name(p.category) << "\n";
    if (r.category) {
      ++labeled_n;
      correct += *r.category == p.category;
    }
  }
  io::write_file_atomic(out, io::format_predictions_csv(preds));
  if (!explain.empty()) io::write_json(explain, expl);
  if (labeled_n > 0) std::printf("accuracy %.4f (%d/%d)\n", static_cast<double>(correct) / labeled_n, correct, labeled_n);
  return 0;
}

int cmd_cross_validate(const fs::path& features, int folds, double c, const std::string& order, std::uint64_t seed, bool no_stratify,
                       const fs::path& predictions, const fs::path& out_json) {
  const auto rows = io::read_features_csv(features);
  classify::CascadeConfig cfg;
  cfg.c = c;
  cfg.order = parse_order(order);
  const auto r = classify::cross_validate(labeled(rows, features.string()), folds, cfg, !no_stratify, seed);
  std::printf("accuracy %.4f\n", r.accuracy);
  std::cout << report::confusion_text(r.confusion) << report::metrics_text(r.metrics);
  if (!predictions.empty()) {
    std::vector<io::PredictionRow> preds;
    for (std::size_t i = 0; i < rows.size(); ++i) preds.push_back({rows[i].case_id, rows[i].category, r.predicted[i]});
    io::write_file_atomic(predictions, io::format_predictions_csv(preds));
  }
  if (!out_json.empty()) {
    io::write_json(out_json, {{"accuracy", r.accuracy}, {"confusion", r.confusion}, {"precision", r.metrics.precision},
                              {"recall", r.metrics.recall}, {"fold_of", r.fold_of}});
  }
  return 0;
}

int cmd_report(const fs::path& predictions, const fs::path& features, const fs::path& model_path, const fs::path& cases_root,
               const std::string& slice_mode, const fs::path& out) {
  fs::create_directories(out);
  const auto preds = io::parse_predictions_csv(io::read_text(predictions), predictions.string());
  std::string text = "cardioflow report\n\n";
  classify::ConfusionMatrix m{};
  int labeled_n = 0;
  for (const auto& p : preds) {
    if (!p.truth) continue;
    ++labeled_n;
    ++m[static_cast<std::size_t>(category_index(*p.truth))][static_cast<std::size_t>(category_index(p.predicted))];
  }
  if (labeled_n > 0) {
    text += "confusion matrix (rows: truth, columns: prediction)\n" + report::confusion_text(m) + "\n";
    text += report::metrics_text(classify::metrics_from_confusion(m)) + "\n";
  }
  if (!features.empty()) {
    const auto rows = io::read_features_csv(features);
    std::vector<report::ScatterPoint> pts;
    for (const auto& r : rows) {
      if (r.category) pts.push_back({r.features[Feature::kRMD], r.features[Feature::kTMD], *r.category});
    }
    io::write_file_atomic(out / "rmd_tmd_scatter.svg", report::motion_scatter_svg(pts));
    if (!model_path.empty()) {
      const auto model = io::read_model(model_path);
      text += "stage explanations\n";
      for (const auto& r : rows) {
        const auto p = classify::predict_cascade(model, r.features);
        text += r.case_id + " -> " + std::string(category_name(p.category)) + "\n";
        for (const auto& s : p.stages) {
          char buf[96];
          std::snprintf(buf, sizeof buf, "  %-4s margin %+9.3f  bias %+8.3f ", std::string(category_name(s.target)).c_str(), s.margin, s.bias);
          text += buf;
          for (const auto& [f, v] : s.contributions) {
            std::snprintf(buf, sizeof buf, " %s %+8.3f", std::string(feature_name(f)).c_str(), v);
            text += buf;
          }
          text += s.yes ? "  yes\n" : "  no\n";
        }
      }
    }
  }
  if (!cases_root.empty()) {
    for (const auto& dir : io::list_case_dirs(cases_root)) {
      const auto c = io::read_case(dir, false);
      const auto flows = io::read_case_flows(dir, c, parse_slice_mode(slice_mode));
      const auto f = pipeline::features_from_flows(c, flows);
      for (const auto& s : f.series) {
        const std::string name = c.case_id + "_slice_" + io::two_digits(s.slice_index);
        io::write_file_atomic(out / (name + ".svg"), report::series_svg(s, name));
      }
    }
  }
  io::write_file_atomic(out / "report.txt", text);
  std::cout << text;
  return 0;
}

int cmd_sweep_c(const fs::path& features, std::vector<double> cs, int folds, const std::string& order, std::uint64_t seed) {
  if (cs.empty()) cs = classify::default_c_sweep();
  const auto cases = labeled(io::read_features_csv(features), features.string());
  std::printf("%10s %9s\n", "C", "accuracy");
  for (double c : cs) {
    if (!(c > 0.0)) throw ValidationError("c", "must be > 0");
    classify::CascadeConfig cfg;
    cfg.c = c;
    cfg.order = parse_order(order);
    const auto r = classify::cross_validate(cases, folds, cfg, true, seed);
    std::printf("%10g %9.4f\n", c, r.accuracy);
  }
  return 0;
}

/// Metadata: case_id, optional category, pixel_spacing_mm, slice_positions_mm,
/// height_cm, weight_kg, ed_frame_index, es_frame_index, and "slices": a list
/// of {"frames": [pgm paths], "mask_ed": path, "mask_es": path}. Relative
/// paths resolve against the metadata file.
int cmd_ingest(const fs::path& meta_path, const fs::path& out) {
  const json m = io::read_json(meta_path);
  const fs::path base = meta_path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  pipeline::CaseData c;
  try {
    c.case_id = m.at("case_id").get<std::string>();
    if (m.contains("category") && !m["category"].is_null()) c.category = parse_category(m["category"].get<std::string>());
    c.pixel_spacing = m.at("pixel_spacing_mm").get<double>();
    c.slice_positions = m.at("slice_positions_mm").get<std::vector<double>>();
    c.height_cm = m.at("height_cm").get<double>();
    c.weight_kg = m.at("weight_kg").get<double>();
    c.ed_index = m.at("ed_frame_index").get<int>();
    c.es_index = m.at("es_frame_index").get<int>();
    int n_frames = -1;
    for (const auto& s : m.at("slices")) {
      std::vector<Image> frames;
      for (const auto& f : s.at("frames")) frames.push_back(io::read_image_pgm(resolve(f.get<std::string>())));
      if (n_frames >= 0 && static_cast<int>(frames.size()) != n_frames) throw FormatError("slices differ in frame count");
      n_frames = static_cast<int>(frames.size());
      c.frames.push_back(std::move(frames));
      c.masks_ed.push_back(io::read_mask_pgm(resolve(s.at("mask_ed").get<std::string>())));
      c.masks_es.push_back(io::read_mask_pgm(resolve(s.at("mask_es").get<std::string>())));
    }
    c.n_frames = n_frames;
  } catch (const json::exception& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
  io::write_case(out, c);
  std::cout << "ingested " << c.case_id << " into " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cardiac motion features and explainable pathology classification"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: CARDIOFLOW_THREADS or hardware)");

  // gen-phantom
  auto* gen = app.add_subcommand("gen-phantom", "write a synthetic cohort");
  int per_category = 20, image_size = 128, n_slices = 8;
  std::uint64_t seed = 0;
  std::string gt_flow = "sampled", masks = "all", spec_file;
  fs::path out;
  gen->add_option("--per-category", per_category, "cases per category")->capture_default_str();
  gen->add_option("--seed", seed, "base seed")->capture_default_str();
  gen->add_option("--image-size", image_size)->capture_default_str();
  gen->add_option("--n-slices", n_slices)->capture_default_str();
  gen->add_option("--gt-flow", gt_flow, "ground-truth flows to write")->check(CLI::IsMember({"none", "sampled", "all"}))->capture_default_str();
  gen->add_option("--masks", masks, "mask frames to write")->check(CLI::IsMember({"all", "ed-es"}))->capture_default_str();
  gen->add_option("--spec", spec_file, "single case from a phantom spec JSON");
  gen->add_option("--out", out, "output directory")->required();

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "estimate (ED, t_i) flows for every case");
  fs::path cases;
  FlowOptions fo;
  flow_cmd->add_option("--cases", cases, "case directory or directory of cases")->required();
  add_flow_options(flow_cmd, fo);

  // features
  auto* feat = app.add_subcommand("features", "compute the nine features per case");
  bool compute_flows = false;
  fs::path series_dir;
  feat->add_option("--cases", cases, "case directory or directory of cases")->required();
  feat->add_option("--out", out, "features CSV")->required();
  feat->add_flag("--compute-flows", compute_flows, "estimate flows in memory instead of reading them");
  feat->add_option("--series-dir", series_dir, "write segment series CSV and SVG plots here");
  add_flow_options(feat, fo);

  // train
  auto* train = app.add_subcommand("train", "train the cascade");
  fs::path features, model;
  double c = classify::kDefaultC;
  std::string order = "default";
  train->add_option("--features", features)->required();
  train->add_option("--out", out, "model JSON")->required();
  train->add_option("--c", c, "inverse regularization strength")->capture_default_str();
  train->add_option("--order", order)->check(CLI::IsMember({"default", "inverted"}))->capture_default_str();

  // predict
  auto* pred = app.add_subcommand("predict", "apply a cascade model");
  fs::path explain;
  pred->add_option("--model", model)->required();
  pred->add_option("--features", features)->required();
  pred->add_option("--out", out, "predictions CSV")->required();
  pred->add_option("--explain", explain, "per-case explanation JSON");

  // cross-validate
  auto* cv = app.add_subcommand("cross-validate", "k-fold cross-validation of the cascade");
  int folds = 5;
  bool no_stratify = false;
  fs::path predictions, out_json;
  cv->add_option("--features", features)->required();
  cv->add_option("--folds", folds)->capture_default_str();
  cv->add_option("--c", c)->capture_default_str();
  cv->add_option("--order", order)->check(CLI::IsMember({"default", "inverted"}))->capture_default_str();
  cv->add_option("--seed", seed)->capture_default_str();
  cv->add_flag("--no-stratify", no_stratify);
  cv->add_option("--predictions", predictions, "write out-of-fold predictions CSV");
  cv->add_option("--json", out_json, "write the result as JSON");

  // report
  auto* rep = app.add_subcommand("report", "text report and SVG plots");
  std::string slice_mode = "apply";
  rep->add_option("--predictions", predictions)->required();
  rep->add_option("--features", features, "adds the RMD/TMD scatter");
  rep->add_option("--model", model, "adds per-case stage explanations (needs --features)");
  rep->add_option("--cases", cases, "adds segment series plots from estimated flows");
  rep->add_option("--slice-mode", slice_mode)->check(CLI::IsMember({"apply", "train"}));
  rep->add_option("--out", out, "report directory")->required();

  // sweep-c
  auto* sweep = app.add_subcommand("sweep-c", "cross-validated accuracy over C values");
  std::vector<double> cs;
  sweep->add_option("--features", features)->required();
  sweep->add_option("--c-values", cs, "C values (default 1 5 10 50 100 500 1000 5000)");
  sweep->add_option("--folds", folds)->capture_default_str();
  sweep->add_option("--order", order)->check(CLI::IsMember({"default", "inverted"}));
  sweep->add_option("--seed", seed);

  // ingest
  auto* ing = app.add_subcommand("ingest", "import external frames and masks as a case directory");
  fs::path meta;
  ing->add_option("--metadata", meta, "metadata JSON")->required();
  ing->add_option("--out", out, "case directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    if (threads == 0) threads = default_threads();
    if (threads < 0) throw ValidationError("threads", "must be >= 1");
    if (*gen) return cmd_gen_phantom(per_category, seed, image_size, n_slices, gt_flow, masks, out, spec_file, threads);
    if (*flow_cmd) return cmd_flow(cases, fo, threads);
    if (*feat) return cmd_features(cases, out, compute_flows, fo, series_dir, threads);
    if (*train) return cmd_train(features, out, c, order);
    if (*pred) return cmd_predict(model, features, out, explain);
    if (*cv) return cmd_cross_validate(features, folds, c, order, seed, no_stratify, predictions, out_json);
    if (*rep) return cmd_report(predictions, features, model, cases, slice_mode, out);
    if (*sweep) return cmd_sweep_c(features, cs, folds, order, seed);
    if (*ing) return cmd_ingest(meta, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::kData);
  }
  return static_cast<int>(ExitCode::kUsage);
}
