#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace cardioflow;
namespace fs = std::filesystem;

namespace {

phantom::PhantomSpec tiny_spec() {
  phantom::PhantomSpec s;
  s.n_slices = 3;
  s.n_frames = 12;
  return s;
}

std::vector<io::FeatureRow> random_rows(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<io::FeatureRow> rows;
  for (int i = 0; i < n; ++i) {
    io::FeatureRow r;
    r.case_id = "case_" + std::to_string(i);
    if (i % 3) r.category = kAllCategories[static_cast<std::size_t>(i % 5)];
    for (auto& v : r.features.values) v = cftest::uniform(rng, -1e3, 1e3) * std::pow(10.0, cftest::uniform(rng, -8, 3));
    rows.push_back(r);
  }
  return rows;
}

// Flow files store float32.
flow::FlowField as_float(flow::FlowField f) {
  for (Image* g : {&f.fx, &f.fy})
    for (auto& v : g->values()) v = static_cast<float>(v);
  return f;
}

}  // namespace

TEST(Pgm, ImageRoundTripWithinQuantization) {
  cftest::TempDir d("pgm");
  std::mt19937_64 rng(1);
  const auto img = cftest::random_image(17, 11, rng);
  io::write_image_pgm(d.path / "a.pgm", img);
  const auto back = io::read_image_pgm(d.path / "a.pgm");
  ASSERT_EQ(back.width(), 17);
  ASSERT_EQ(back.height(), 11);
  for (std::size_t i = 0; i < img.size(); ++i) EXPECT_LE(std::abs(back[i] - img[i]), 0.5 / 255 + 1e-12);
  // Second pass is lossless.
  io::write_image_pgm(d.path / "b.pgm", back);
  EXPECT_EQ(io::read_file(d.path / "a.pgm"), io::read_file(d.path / "b.pgm"));
}

TEST(Pgm, MaskRoundTripExact) {
  cftest::TempDir d("mask");
  std::mt19937_64 rng(2);
  const auto m = cftest::random_mask(9, 13, rng);
  io::write_mask_pgm(d.path / "m.pgm", m);
  EXPECT_EQ(io::read_mask_pgm(d.path / "m.pgm").codes(), m.codes());
}

TEST(Pgm, CommentsAndBadCodes) {
  const std::string txt = "P5\n# a comment\n2 1\n255\n";
  std::vector<char> bytes(txt.begin(), txt.end());
  bytes.push_back(1);
  bytes.push_back(7);
  const auto g = io::decode_pgm(bytes);
  EXPECT_EQ(g(1, 0), 7);
  EXPECT_THROW(anatomy::LabelMask::from_codes(g), FormatError);
  std::vector<char> truncated(bytes.begin(), bytes.end() - 1);
  EXPECT_THROW(io::decode_pgm(truncated), FormatError);
  std::vector<char> p2 = bytes;
  p2[1] = '2';
  EXPECT_THROW(io::decode_pgm(p2), FormatError);
}

TEST(FlowFile, CorruptMagicRejected) {
  cftest::TempDir d("flow");
  flow::FlowField f(4, 3);
  f.fx(1, 2) = 0.125;
  f.fy(3, 0) = -7.5;  // exact in float32
  io::write_flow_file(d.path / "f.cfl", f);
  EXPECT_EQ(io::read_flow_file(d.path / "f.cfl"), f);
  auto bytes = io::read_file(d.path / "f.cfl");
  bytes[0] = 'X';
  io::write_file_atomic(d.path / "g.cfl", bytes);
  EXPECT_THROW(io::read_flow_file(d.path / "g.cfl"), FormatError);
}

TEST(FeaturesCsv, WriteReadWriteIsByteIdentical) {
  cftest::TempDir d("csv");
  const auto rows = random_rows(23, 3);
  io::write_features_csv(d.path / "a.csv", rows);
  const auto back = io::read_features_csv(d.path / "a.csv");
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].case_id, rows[i].case_id);
    EXPECT_EQ(back[i].category, rows[i].category);
    EXPECT_EQ(back[i].features.values, rows[i].features.values);  // shortest round-trip is exact
  }
  io::write_features_csv(d.path / "b.csv", back);
  EXPECT_EQ(io::read_text(d.path / "a.csv"), io::read_text(d.path / "b.csv"));
}

TEST(FeaturesCsv, SchemaMismatchNamesTheColumn) {
  auto text = io::format_features_csv(random_rows(2, 4));
  const auto pos = text.find("TMD");
  text.replace(pos, 3, "XMD");
  try {
    io::parse_features_csv(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("column 11 is 'XMD', expected 'TMD'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(io::parse_features_csv("case_id,category\n"), FormatError);
}

TEST(FeaturesCsv, BadNumberNamesColumn) {
  auto text = io::format_features_csv(random_rows(1, 5));
  const auto last = text.rfind(',');
  text = text.substr(0, last + 1) + "abc\n";
  try {
    io::parse_features_csv(text);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("TMD"), std::string::npos) << e.what();
  }
}

TEST(PredictionsCsv, RoundTrip) {
  std::vector<io::PredictionRow> rows = {{"a", Category::kDCM, Category::kMINF}, {"b", std::nullopt, Category::kNOR}};
  const auto text = io::format_predictions_csv(rows);
  const auto back = io::parse_predictions_csv(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].truth, Category::kDCM);
  EXPECT_EQ(back[0].predicted, Category::kMINF);
  EXPECT_FALSE(back[1].truth.has_value());
  EXPECT_EQ(io::format_predictions_csv(back), text);
}

TEST(ModelJson, ByteIdenticalRewrite) {
  cftest::TempDir d("model");
  const auto m = io::read_model(CARDIOFLOW_SOURCE_DIR "/fixtures/reference_model.json");
  io::write_model(d.path / "a.json", m, classify::CascadeOrder::kDefault);
  const auto back = io::read_model(d.path / "a.json");
  io::write_model(d.path / "b.json", back, classify::CascadeOrder::kDefault);
  EXPECT_EQ(io::read_text(d.path / "a.json"), io::read_text(d.path / "b.json"));
  EXPECT_EQ(back, m);
}

TEST(ModelJson, RejectsWrongFormatAndFeature) {
  auto j = io::model_to_json(io::read_model(CARDIOFLOW_SOURCE_DIR "/fixtures/reference_model.json"));
  auto bad = j;
  bad["format"] = "other/1";
  EXPECT_THROW(io::model_from_json(bad), FormatError);
  bad = j;
  bad["stages"][0]["binding"][0] = "NOPE";
  EXPECT_ANY_THROW(io::model_from_json(bad));
}

TEST(SpecJson, RoundTripAndUnknownKey) {
  auto s = tiny_spec();
  s.per_segment_activity = {1, 0.5, 1, 1, 0.7, 1};
  s.category = Category::kMINF;
  const auto j = io::spec_to_json(s);
  EXPECT_EQ(io::spec_to_json(io::spec_from_json(j)), j);
  auto bad = j;
  bad["wobble"] = 1;
  try {
    io::spec_from_json(bad);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "wobble");
  }
}

TEST(CaseDir, PhantomRoundTrip) {
  cftest::TempDir d("case");
  const auto pc = phantom::generate_case(tiny_spec());
  io::write_phantom_case(d.path / "c0", pc, "c0");
  ASSERT_TRUE(io::is_case_dir(d.path / "c0"));
  EXPECT_EQ(io::list_case_dirs(d.path), std::vector<fs::path>{d.path / "c0"});
  const auto c = io::read_case(d.path / "c0");
  const auto ref = pipeline::case_from_phantom(pc, "c0");
  EXPECT_EQ(c.case_id, "c0");
  EXPECT_EQ(c.category, Category::kNOR);
  EXPECT_EQ(c.n_frames, 12);
  EXPECT_EQ(c.es_index, pc.es_frame_index);
  EXPECT_EQ(c.slice_positions, ref.slice_positions);
  for (int s = 0; s < 3; ++s) {
    EXPECT_EQ(c.masks_ed[static_cast<std::size_t>(s)], ref.masks_ed[static_cast<std::size_t>(s)]);
    EXPECT_EQ(c.masks_es[static_cast<std::size_t>(s)], ref.masks_es[static_cast<std::size_t>(s)]);
    for (int t = 0; t < 12; ++t) {
      const auto& a = c.frames[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      const auto& b = ref.frames[static_cast<std::size_t>(s)][static_cast<std::size_t>(t)];
      for (std::size_t i = 0; i < a.size(); ++i) ASSERT_LE(std::abs(a[i] - std::clamp(b[i], 0.0, 1.0)), 0.5 / 255 + 1e-12);
    }
  }
  // Sampled ground-truth flows exist at the sampled instants.
  for (int t : motion::sample_frames(12, pc.ed_frame_index)) {
    if (t == pc.ed_frame_index) continue;
    EXPECT_EQ(io::read_flow_file(io::gt_flow_path(d.path / "c0", 1, t)), as_float(pc.gt_flow(1, t)));
  }
}

TEST(CaseDir, MissingMaskNamesTheSlice) {
  cftest::TempDir d("missing");
  const auto pc = phantom::generate_case(tiny_spec());
  io::write_phantom_case(d.path / "c", pc, "c", {false, io::GtFlowPolicy::kNone});
  fs::remove(io::mask_path(d.path / "c", 2, pc.es_frame_index));
  try {
    io::read_case(d.path / "c");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("slice 2"), std::string::npos) << e.what();
  }
}

TEST(CaseDir, WriteCaseFromMemory) {
  cftest::TempDir d("mem");
  const auto pc = phantom::generate_case(tiny_spec());
  auto c = pipeline::case_from_phantom(pc, "m");
  io::write_case(d.path / "m", c);
  const auto back = io::read_case(d.path / "m", false);
  EXPECT_TRUE(back.frames.empty());
  EXPECT_EQ(back.masks_ed, c.masks_ed);
  EXPECT_EQ(back.masks_es, c.masks_es);
}

TEST(CaseFlows, WriteThenRead) {
  cftest::TempDir d("flows");
  auto spec = tiny_spec();
  spec.n_slices = 8;
  const auto pc = phantom::generate_case(spec);
  io::write_phantom_case(d.path / "c", pc, "c", {false, io::GtFlowPolicy::kNone});
  const auto c = io::read_case(d.path / "c", false);
  const auto sel = pipeline::select_slices(c, motion::SliceMode::kApply);
  std::vector<pipeline::SliceFlows> flows;
  for (int s : sel.indices()) {
    pipeline::SliceFlows sf;
    sf.slice = s;
    sf.frames = motion::sample_frames(c.n_frames, c.ed_index);
    for (int i = 0; i < motion::kInstants; ++i) sf.flows.push_back(i == 0 ? flow::FlowField(128, 128) : pc.gt_flow(s, sf.frames[static_cast<std::size_t>(i)]));
    flows.push_back(sf);
  }
  io::write_case_flows(d.path / "c", flows);
  const auto back = io::read_case_flows(d.path / "c", c, motion::SliceMode::kApply);
  ASSERT_EQ(back.size(), flows.size());
  for (std::size_t k = 0; k < back.size(); ++k) {
    ASSERT_EQ(back[k].flows.size(), flows[k].flows.size());
    for (std::size_t i = 0; i < flows[k].flows.size(); ++i) EXPECT_EQ(back[k].flows[i], as_float(flows[k].flows[i]));
  }
}

TEST(Atomic, NoTempFileLeft) {
  cftest::TempDir d("atomic");
  io::write_file_atomic(d.path / "x" / "y.txt", std::string("hello"));
  EXPECT_EQ(io::read_text(d.path / "x" / "y.txt"), "hello");
  int n = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(d.path / "x")) ++n;
  EXPECT_EQ(n, 1);
}

TEST(FormatDouble, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3, 1e-300, -2.5e17, 123456789.125}) EXPECT_EQ(io::parse_double(io::format_double(v), "v"), v);
  EXPECT_EQ(io::format_double(0.5), "0.5");
}
