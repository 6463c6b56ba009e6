#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flame/dataset.hpp"
#include "flame/labelmap.hpp"
#include "flame/latency.hpp"
#include "flame/report.hpp"

namespace flame::synth {

struct Vec2 {
  std::int64_t x = 0;
  std::int64_t y = 0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned rectangle moving at a constant integer velocity (pixels per
/// frame). A missing position is drawn from the scene seed.
struct ObjectSpec {
  int class_id = 1;
  int width = 1;
  int height = 1;
  std::optional<Vec2> position;
  Vec2 velocity;
};

/// Scene of moving rectangles over background class 0. Later objects are drawn
/// over earlier ones.
struct SceneSpec {
  int width = 64;
  int height = 64;
  int num_frames = 30;
  int num_classes = 2;
  std::uint64_t seed = 0;
  std::vector<ObjectSpec> objects;
};

struct PlacedObject {
  int class_id = 1;
  int width = 1;
  int height = 1;
  Vec2 position;
  Vec2 velocity;

  /// Top-left corner at frame t.
  Vec2 position_at(std::int64_t t) const noexcept {
    return {position.x + t * velocity.x, position.y + t * velocity.y};
  }
};

/// Ground truth for every frame plus the object states that produced it.
struct Scene {
  SceneSpec spec;
  std::vector<PlacedObject> objects;
  std::vector<LabelMap> frames;
};

/// Checks the spec and resolves random placements. Throws flame::Error, e.g.
/// "object larger than frame".
std::vector<PlacedObject> place_objects(const SceneSpec& spec);

/// Rasterises objects at the given per-object positions, clipping at borders.
LabelMap rasterize(int width, int height, const std::vector<PlacedObject>& objects,
                   const std::vector<Vec2>& positions);

Scene render_scene(const SceneSpec& spec);

enum class PredictorKind { kOracle, kDelayedOracle, kExtrapolatingOracle };

std::string_view to_string(PredictorKind kind) noexcept;
PredictorKind parse_predictor_kind(std::string_view text);

/// Simulated model with a fixed latency.
///
/// oracle returns the ground truth of the target frame (the upper bound).
/// delayed_oracle returns the ground truth of its input frame: perfect but
/// stale, the behaviour of a model trained on matching input and target.
/// extrapolating_oracle moves every object by its last per-frame displacement
/// times the frame offset, the best a two-frame model could do.
struct SimPredictor {
  PredictorKind kind = PredictorKind::kDelayedOracle;
  double latency_ms = 0.0;
};

/// Output of `predictor` when fed frame `input_index`. Throws
/// std::out_of_range for an invalid input index, for extrapolation from frame
/// 0, or for an oracle whose target frame is past the end.
LabelMap run_predictor(const SimPredictor& predictor, const Scene& scene,
                       std::int64_t input_index, const FrameTiming& timing);

/// Input frames every predictor is run on for a given frame offset: 1 through
/// num_frames - 1 - k. Frame 0 is skipped for all kinds so the predictors are
/// compared on the same frames.
std::vector<std::int64_t> admissible_inputs(const Scene& scene, const FrameTiming& timing,
                                            double latency_ms);

/// Renders the scene, runs the predictor on every admissible frame and scores
/// the outputs through the regular pairing and accumulation path.
EvalReport simulate_experiment(const SceneSpec& spec, const SimPredictor& predictor,
                               const FrameTiming& timing, EvalMode mode = EvalMode::kFlame);

/// Contents of a scene spec file: the scene plus the frame interval and the
/// predictors to materialise.
struct SynthSpec {
  SceneSpec scene;
  double interval_ms = 60.0;
  std::vector<SimPredictor> predictors;
};

SynthSpec parse_synth_spec(const nlohmann::json& doc);
SynthSpec load_synth_spec(const std::filesystem::path& path);
nlohmann::json synth_spec_to_json(const SynthSpec& spec);

/// Stable file-name stem for a predictor, e.g. "delayed_oracle_195ms".
std::string predictor_name(const SimPredictor& predictor);

struct SynthOutput {
  std::filesystem::path dataset_manifest;
  std::vector<std::filesystem::path> prediction_manifests;
};

/// Writes gt/frame_NNNN.pgm, dataset.json, and per predictor
/// pred/<name>/frame_NNNN.pgm plus predictions_<name>.json. Output bytes are
/// a pure function of the spec.
SynthOutput write_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

}  // namespace flame::synth
