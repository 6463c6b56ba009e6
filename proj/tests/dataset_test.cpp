#include "flame/dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <nlohmann/json.hpp>

#include "flame/error.hpp"
#include "support/fixtures.hpp"

namespace flame {
namespace {

using nlohmann::json;

// Cityscapes-style sequence: 30 frames, ground truth only on frame 20.
json cityscapes_sequence(const std::string& id) {
  json frames = json::array();
  for (int i = 0; i < 30; ++i) {
    json f{{"index", i}, {"image", id + "/img_" + std::to_string(i) + ".png"}};
    if (i == 20) f["gt"] = id + "/gt_20.pgm";
    frames.push_back(f);
  }
  return {{"sequence_id", id}, {"interval_ms", 60}, {"frames", frames}};
}

json fully_annotated_sequence(const std::string& id, int n) {
  json frames = json::array();
  for (int i = 0; i < n; ++i) frames.push_back({{"index", i}, {"gt", "gt_" + std::to_string(i)}});
  return {{"sequence_id", id}, {"interval_ms", 60}, {"frames", frames}};
}

PredictionRecord prediction(const std::string& seq, std::int64_t input, double latency) {
  return {seq, input, latency, "pred_" + seq + "_" + std::to_string(input)};
}

TEST(LoadManifest, CityscapesLayout) {
  testing::TempDir dir("manifest");
  const json doc{{"num_classes", 19}, {"sequences", json::array({cityscapes_sequence("aachen_0")})}};
  testing::write_bytes(dir / "dataset.json", doc.dump());

  const auto dataset = load_dataset_manifest(dir / "dataset.json");
  EXPECT_EQ(dataset.num_classes, 19);
  ASSERT_EQ(dataset.sequences.size(), 1u);
  const auto& seq = dataset.sequences[0];
  EXPECT_EQ(seq.timing.interval_ms(), 60.0);
  EXPECT_FALSE(seq.timing.has_timestamps());
  ASSERT_EQ(seq.frames.size(), 30u);
  EXPECT_EQ(seq.frames[20].gt, dir.path() / "aachen_0/gt_20.pgm");
  EXPECT_EQ(seq.frames[19].gt, std::nullopt);
  EXPECT_EQ(seq.frames[3].image, dir.path() / "aachen_0/img_3.png");
  EXPECT_EQ(seq.position_of(20), 20u);
  EXPECT_EQ(seq.position_of(30), std::nullopt);
}

TEST(LoadManifest, InvariantViolations) {
  const auto parse = [](json doc) { return parse_dataset_manifest(doc, "/data"); };
  json base{{"num_classes", 3}, {"sequences", json::array({fully_annotated_sequence("s", 10)})}};
  EXPECT_NO_THROW(parse(base));

  json dup = base;
  dup["sequences"][0]["frames"][8]["index"] = 7;
  EXPECT_THROW(parse(dup), Error);

  json unannotated = base;
  for (auto& f : unannotated["sequences"][0]["frames"]) f.erase("gt");
  EXPECT_THROW(parse(unannotated), Error);

  json bad_interval = base;
  bad_interval["sequences"][0]["interval_ms"] = 0;
  EXPECT_THROW(parse(bad_interval), Error);

  json bad_classes = base;
  bad_classes["num_classes"] = 256;
  EXPECT_THROW(parse(bad_classes), Error);

  json string_index = base;
  string_index["sequences"][0]["frames"][0]["index"] = "0";
  EXPECT_THROW(parse(string_index), Error);

  json missing_frames = base;
  missing_frames["sequences"][0].erase("frames");
  EXPECT_THROW(parse(missing_frames), Error);

  json duplicate_sequence = base;
  duplicate_sequence["sequences"].push_back(fully_annotated_sequence("s", 3));
  EXPECT_THROW(parse(duplicate_sequence), Error);

  json short_timestamps = base;
  short_timestamps["sequences"][0]["timestamps_ms"] = {0, 60};
  EXPECT_THROW(parse(short_timestamps), Error);

  json decreasing_timestamps = base;
  decreasing_timestamps["sequences"][0]["timestamps_ms"] = {0, 60, 120, 100, 240, 300, 360, 420, 480, 540};
  EXPECT_THROW(parse(decreasing_timestamps), Error);

  EXPECT_THROW(parse(json::array()), Error);
  EXPECT_THROW(load_dataset_manifest("/nonexistent/flame.json"), Error);
}

TEST(LoadManifest, InvalidJsonIsAnInputError) {
  testing::TempDir dir("manifest");
  testing::write_bytes(dir / "broken.json", "{\"sequences\": [");
  EXPECT_THROW(load_dataset_manifest(dir / "broken.json"), Error);
  EXPECT_THROW(load_prediction_manifest(dir / "broken.json"), Error);
}

TEST(LoadPredictions, ParsesAndResolvesPaths) {
  const json doc{{"predictions",
                  json::array({{{"sequence_id", "s"},
                                {"input_frame_index", 16},
                                {"latency_ms", 195},
                                {"pred", "p/16.pgm"}}})}};
  const auto records = parse_prediction_manifest(doc, "/base");
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].pred_path, std::filesystem::path("/base/p/16.pgm"));
  EXPECT_EQ(records[0].latency_ms, 195.0);

  json negative = doc;
  negative["predictions"][0]["latency_ms"] = -1;
  EXPECT_THROW(parse_prediction_manifest(negative, "/base"), Error);
  json fractional_index = doc;
  fractional_index["predictions"][0]["input_frame_index"] = 1.5;
  EXPECT_THROW(parse_prediction_manifest(fractional_index, "/base"), Error);
  EXPECT_THROW(parse_prediction_manifest(json::object(), "/base"), Error);
}

TEST(EvalModeText, RoundTrip) {
  EXPECT_EQ(parse_eval_mode("static"), EvalMode::kStatic);
  EXPECT_EQ(parse_eval_mode(to_string(EvalMode::kFlame)), EvalMode::kFlame);
  EXPECT_THROW(parse_eval_mode("Flame"), Error);
}

class PairingTest : public ::testing::Test {
 protected:
  DatasetManifest cityscapes = parse_dataset_manifest(
      json{{"num_classes", 19}, {"sequences", json::array({cityscapes_sequence("a")})}}, "/d");
  DatasetManifest full = parse_dataset_manifest(
      json{{"num_classes", 4}, {"sequences", json::array({fully_annotated_sequence("a", 30)})}},
      "/d");
};

TEST_F(PairingTest, SparseAnnotationFlameVersusStatic) {
  const std::vector<PredictionRecord> preds{prediction("a", 16, 195)};
  const auto flame_mode = pair_predictions(cityscapes, preds, EvalMode::kFlame);
  ASSERT_EQ(flame_mode.pairs.size(), 1u);
  EXPECT_EQ(flame_mode.pairs[0].input_index, 16);
  EXPECT_EQ(flame_mode.pairs[0].target_index, 20);
  EXPECT_EQ(flame_mode.pairs[0].offset_used, 4);
  EXPECT_EQ(flame_mode.pairs[0].gt_path, std::filesystem::path("/d/a/gt_20.pgm"));

  const auto static_mode = pair_predictions(cityscapes, preds, EvalMode::kStatic);
  EXPECT_TRUE(static_mode.pairs.empty());
  EXPECT_EQ(static_mode.exclusions.at("missing_gt"), 1u);
}

TEST_F(PairingTest, ZeroLatencyGivesIdenticalPairs) {
  const std::vector<PredictionRecord> preds{prediction("a", 20, 0)};
  const auto a = pair_predictions(cityscapes, preds, EvalMode::kFlame);
  const auto b = pair_predictions(cityscapes, preds, EvalMode::kStatic);
  ASSERT_EQ(a.pairs.size(), 1u);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.pairs[0].offset_used, 0);
}

TEST_F(PairingTest, ExclusionReasons) {
  const std::vector<PredictionRecord> preds{
      prediction("a", 28, 195),  // 28 + 4 = 32 is past frame 29
      prediction("a", 17, 195),  // target 21 has no gt
      prediction("zz", 1, 0),    // unknown sequence
      prediction("a", 40, 0),    // unknown frame
  };
  const auto p = pair_predictions(cityscapes, preds, EvalMode::kFlame);
  EXPECT_TRUE(p.pairs.empty());
  EXPECT_EQ(p.exclusions.at("out_of_sequence"), 1u);
  EXPECT_EQ(p.exclusions.at("missing_gt"), 1u);
  EXPECT_EQ(p.exclusions.at("unknown_sequence"), 1u);
  EXPECT_EQ(p.exclusions.at("unknown_frame"), 1u);
  EXPECT_EQ(p.excluded(), 4u);
}

TEST_F(PairingTest, ExplicitTimestampsOverListedFrames) {
  // Frames 0, 2, 5 listed with irregular timestamps; the uniform interval is
  // not used.
  const json doc{{"num_classes", 2},
                 {"sequences",
                  json::array({{{"sequence_id", "t"},
                                {"interval_ms", 60},
                                {"timestamps_ms", {0, 100, 130}},
                                {"frames",
                                 {{{"index", 0}, {"gt", "g0"}},
                                  {{"index", 2}, {"gt", "g2"}},
                                  {{"index", 5}, {"gt", "g5"}}}}}})}};
  const auto dataset = parse_dataset_manifest(doc, "/d");
  const std::vector<PredictionRecord> preds{prediction("t", 0, 100), prediction("t", 2, 20),
                                            prediction("t", 2, 31)};
  const auto p = pair_predictions(dataset, preds, EvalMode::kFlame);
  ASSERT_EQ(p.pairs.size(), 2u);
  EXPECT_EQ(p.pairs[0].target_index, 2);
  EXPECT_EQ(p.pairs[0].offset_used, 2);
  EXPECT_EQ(p.pairs[1].target_index, 5);
  EXPECT_EQ(p.exclusions.at("out_of_sequence"), 1u);
}

TEST_F(PairingTest, PropertiesOverRandomPredictionSets) {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> frame(0, 35);
  std::uniform_real_distribution<double> latency(0.0, 400.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PredictionRecord> preds;
    const int n = 1 + trial % 25;
    for (int i = 0; i < n; ++i) {
      preds.push_back(prediction(i % 7 == 0 ? "b" : "a", frame(rng), latency(rng)));
    }
    for (const auto& dataset : {cityscapes, full}) {
      for (auto mode : {EvalMode::kStatic, EvalMode::kFlame}) {
        const auto p = pair_predictions(dataset, preds, mode);
        ASSERT_EQ(p.pairs.size() + p.excluded(), preds.size());
        ASSERT_TRUE(std::is_sorted(p.pairs.begin(), p.pairs.end(), [](const auto& x, const auto& y) {
          return std::tie(x.sequence_id, x.input_index) < std::tie(y.sequence_id, y.input_index);
        }));
        auto shuffled = preds;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto q = pair_predictions(dataset, shuffled, mode);
        ASSERT_EQ(q.pairs, p.pairs);
        ASSERT_EQ(q.exclusions, p.exclusions);
      }
    }
    // With full annotation and zero latency, flame pairing is static pairing.
    for (auto& r : preds) r.latency_ms = 0.0;
    const auto s = pair_predictions(full, preds, EvalMode::kStatic);
    const auto f = pair_predictions(full, preds, EvalMode::kFlame);
    ASSERT_EQ(s.pairs, f.pairs);
    ASSERT_EQ(s.exclusions, f.exclusions);
  }
}

TEST(CityscapesInputIndex, AnnotatedFrameTwenty) {
  EXPECT_EQ(cityscapes_input_index(20, 26, 60), 19);
  EXPECT_EQ(cityscapes_input_index(20, 38, 60), 19);
  EXPECT_EQ(cityscapes_input_index(20, 76, 60), 18);
  EXPECT_EQ(cityscapes_input_index(20, 195, 60), 16);
  EXPECT_EQ(cityscapes_input_index(20, 0, 60), 20);
  EXPECT_EQ(cityscapes_input_index(4, 195, 60), 0);
  EXPECT_THROW(cityscapes_input_index(3, 195, 60), std::invalid_argument);
}

TEST(CityscapesInputIndex, InvertsFlamePairing) {
  const auto dataset = parse_dataset_manifest(
      json{{"num_classes", 19}, {"sequences", json::array({cityscapes_sequence("a")})}}, "/d");
  for (double latency : {0.0, 26.0, 38.0, 76.0, 195.0, 600.0}) {
    const auto input = cityscapes_input_index(20, latency, 60);
    const std::vector<PredictionRecord> preds{prediction("a", input, latency)};
    const auto p = pair_predictions(dataset, preds, EvalMode::kFlame);
    ASSERT_EQ(p.pairs.size(), 1u) << latency;
    EXPECT_EQ(p.pairs[0].target_index, 20);
  }
}

}  // namespace
}  // namespace flame
