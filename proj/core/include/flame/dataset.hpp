#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flame/latency.hpp"

namespace flame {

struct FrameEntry {
  std::int64_t index = 0;
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> gt;
};

/// One video sequence. Frame indices are strictly increasing and at least one
/// frame carries ground truth. When the timing holds explicit timestamps they
/// are aligned with `frames`, one per entry.
struct SequenceManifest {
  std::string sequence_id;
  FrameTiming timing{1.0};
  std::vector<FrameEntry> frames;

  /// Position of `index` in `frames`, if listed.
  std::optional<std::size_t> position_of(std::int64_t index) const;
};

/// Whole dataset manifest. Paths are resolved against the manifest's
/// directory at load time; label maps are not opened here.
struct DatasetManifest {
  int num_classes = 0;
  std::vector<SequenceManifest> sequences;

  const SequenceManifest* find(std::string_view sequence_id) const;
};

struct PredictionRecord {
  std::string sequence_id;
  std::int64_t input_frame_index = 0;
  double latency_ms = 0.0;
  std::filesystem::path pred_path;
};

/// Schema and invariant checks raise flame::Error.
DatasetManifest parse_dataset_manifest(const nlohmann::json& doc,
                                       const std::filesystem::path& base_dir);
DatasetManifest load_dataset_manifest(const std::filesystem::path& path);

std::vector<PredictionRecord> parse_prediction_manifest(
    const nlohmann::json& doc, const std::filesystem::path& base_dir);
std::vector<PredictionRecord> load_prediction_manifest(const std::filesystem::path& path);

enum class EvalMode { kStatic, kFlame };

std::string_view to_string(EvalMode mode) noexcept;
/// Accepts "static" or "flame"; throws flame::Error otherwise.
EvalMode parse_eval_mode(std::string_view text);

namespace exclusion {
inline constexpr std::string_view kMissingGt = "missing_gt";
inline constexpr std::string_view kOutOfSequence = "out_of_sequence";
inline constexpr std::string_view kUnknownSequence = "unknown_sequence";
inline constexpr std::string_view kUnknownFrame = "unknown_frame";
}  // namespace exclusion

struct EvalPair {
  std::string sequence_id;
  std::filesystem::path pred_path;
  std::filesystem::path gt_path;
  std::int64_t input_index = 0;
  std::int64_t target_index = 0;
  std::int64_t offset_used = 0;
  double latency_ms = 0.0;

  friend bool operator==(const EvalPair&, const EvalPair&) = default;
};

struct Pairing {
  std::vector<EvalPair> pairs;
  std::map<std::string, std::uint64_t, std::less<>> exclusions;

  std::uint64_t excluded() const noexcept;
};

/// Matches each prediction with the ground truth it is scored against.
///
/// Static mode uses the prediction's own input frame. Flame mode uses the frame
/// current when processing finishes (see resolve_target_frame). Predictions
/// whose target has no ground truth, or falls past the end of the sequence,
/// are counted under an exclusion reason instead of being scored. Output is
/// sorted by (sequence_id, input index) regardless of input order.
Pairing pair_predictions(const DatasetManifest& dataset,
                         std::span<const PredictionRecord> predictions, EvalMode mode);

/// Input frame to feed a model when only `annotated_index` has ground truth:
/// annotated_index - frame_offset(latency, interval). Throws
/// std::invalid_argument when the offset exceeds the annotated index.
std::int64_t cityscapes_input_index(std::int64_t annotated_index, double latency_ms,
                                    double interval_ms);

}  // namespace flame
