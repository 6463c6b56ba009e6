#include "flame/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "flame/error.hpp"
#include "flame/labelmap.hpp"

namespace flame {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": invalid JSON: " + e.what());
  }
}

const json& field(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(where + ": missing \"" + key + "\"");
  return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw Error(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::int64_t integer_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw Error(where + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

double number_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number()) throw Error(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(where + "." + key + ": expected a finite number");
  return d;
}

const json& array_field(const json& obj, const char* key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw Error(where + "." + key + ": expected an array");
  return v;
}

std::optional<std::filesystem::path> optional_path(const json& obj, const char* key,
                                                   const std::string& where,
                                                   const std::filesystem::path& base_dir) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(where + "." + key + ": expected a string path");
  return base_dir / it->get<std::string>();
}

SequenceManifest parse_sequence(const json& doc, const std::string& where,
                                const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error(where + ": expected an object");
  SequenceManifest seq;
  seq.sequence_id = string_field(doc, "sequence_id", where);
  const double interval = number_field(doc, "interval_ms", where);
  if (interval <= 0.0) throw Error(where + ".interval_ms: must be positive");

  const json& frames = array_field(doc, "frames", where);
  bool any_gt = false;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string at = where + ".frames[" + std::to_string(i) + "]";
    if (!frames[i].is_object()) throw Error(at + ": expected an object");
    FrameEntry entry;
    entry.index = integer_field(frames[i], "index", at);
    if (entry.index < 0) throw Error(at + ".index: must be non-negative");
    if (!seq.frames.empty() && entry.index <= seq.frames.back().index) {
      throw Error(at + ".index: frame indices must be strictly increasing (" +
                  std::to_string(entry.index) + " after " +
                  std::to_string(seq.frames.back().index) + ")");
    }
    entry.image = optional_path(frames[i], "image", at, base_dir);
    entry.gt = optional_path(frames[i], "gt", at, base_dir);
    any_gt = any_gt || entry.gt.has_value();
    seq.frames.push_back(std::move(entry));
  }
  if (!any_gt) throw Error(where + ": no annotated frame (at least one \"gt\" is required)");

  std::vector<double> timestamps;
  if (const auto it = doc.find("timestamps_ms"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(where + ".timestamps_ms: expected an array");
    if (it->size() != seq.frames.size()) {
      throw Error(where + ".timestamps_ms: expected one timestamp per frame");
    }
    for (const auto& t : *it) {
      if (!t.is_number()) throw Error(where + ".timestamps_ms: expected numbers");
      timestamps.push_back(t.get<double>());
    }
  }
  try {
    seq.timing = FrameTiming(interval, std::move(timestamps));
  } catch (const std::invalid_argument& e) {
    throw Error(where + ": " + e.what());
  }
  return seq;
}

}  // namespace

std::optional<std::size_t> SequenceManifest::position_of(std::int64_t index) const {
  const auto it = std::lower_bound(frames.begin(), frames.end(), index,
                                   [](const FrameEntry& f, std::int64_t i) { return f.index < i; });
  if (it == frames.end() || it->index != index) return std::nullopt;
  return static_cast<std::size_t>(it - frames.begin());
}

const SequenceManifest* DatasetManifest::find(std::string_view sequence_id) const {
  const auto it = std::find_if(sequences.begin(), sequences.end(),
                               [&](const SequenceManifest& s) { return s.sequence_id == sequence_id; });
  return it == sequences.end() ? nullptr : &*it;
}

DatasetManifest parse_dataset_manifest(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error("dataset manifest: expected a JSON object");
  DatasetManifest dataset;
  const std::int64_t k = integer_field(doc, "num_classes", "dataset manifest");
  if (k < 1 || k > 255) throw Error("dataset manifest.num_classes: must be in [1, 255]");
  dataset.num_classes = static_cast<int>(k);

  const json& sequences = array_field(doc, "sequences", "dataset manifest");
  if (sequences.empty()) throw Error("dataset manifest.sequences: no sequences");
  std::set<std::string, std::less<>> seen;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    auto seq = parse_sequence(sequences[i], "sequences[" + std::to_string(i) + "]", base_dir);
    if (!seen.insert(seq.sequence_id).second) {
      throw Error("duplicate sequence_id \"" + seq.sequence_id + "\"");
    }
    dataset.sequences.push_back(std::move(seq));
  }
  return dataset;
}

DatasetManifest load_dataset_manifest(const std::filesystem::path& path) {
  try {
    return parse_dataset_manifest(read_json_file(path), path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::vector<PredictionRecord> parse_prediction_manifest(const json& doc,
                                                        const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw Error("prediction manifest: expected a JSON object");
  const json& list = array_field(doc, "predictions", "prediction manifest");
  std::vector<PredictionRecord> records;
  records.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string at = "predictions[" + std::to_string(i) + "]";
    if (!list[i].is_object()) throw Error(at + ": expected an object");
    PredictionRecord r;
    r.sequence_id = string_field(list[i], "sequence_id", at);
    r.input_frame_index = integer_field(list[i], "input_frame_index", at);
    r.latency_ms = number_field(list[i], "latency_ms", at);
    if (r.latency_ms < 0.0) throw Error(at + ".latency_ms: must be non-negative");
    r.pred_path = base_dir / string_field(list[i], "pred", at);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<PredictionRecord> load_prediction_manifest(const std::filesystem::path& path) {
  try {
    return parse_prediction_manifest(read_json_file(path), path.parent_path());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::string_view to_string(EvalMode mode) noexcept {
  return mode == EvalMode::kStatic ? "static" : "flame";
}

EvalMode parse_eval_mode(std::string_view text) {
  if (text == "static") return EvalMode::kStatic;
  if (text == "flame") return EvalMode::kFlame;
  throw Error("unknown evaluation mode \"" + std::string(text) + "\" (expected static or flame)");
}

std::uint64_t Pairing::excluded() const noexcept {
  std::uint64_t n = 0;
  for (const auto& [reason, count] : exclusions) n += count;
  return n;
}

namespace {

// Target frame index for one prediction, or nullopt past the sequence end.
std::optional<std::int64_t> target_index(const SequenceManifest& seq, std::size_t input_pos,
                                         double latency_ms, EvalMode mode) {
  const std::int64_t input = seq.frames[input_pos].index;
  if (mode == EvalMode::kStatic) return input;
  if (!seq.timing.has_timestamps()) {
    return resolve_target_frame(input, latency_ms, seq.timing, seq.frames.back().index + 1);
  }
  // Timestamps are aligned with listed frames, so resolve in position space.
  const auto pos = resolve_target_frame(static_cast<std::int64_t>(input_pos), latency_ms,
                                        seq.timing, static_cast<std::int64_t>(seq.frames.size()));
  if (!pos) return std::nullopt;
  return seq.frames[static_cast<std::size_t>(*pos)].index;
}

}  // namespace

Pairing pair_predictions(const DatasetManifest& dataset,
                         std::span<const PredictionRecord> predictions, EvalMode mode) {
  std::vector<const PredictionRecord*> order;
  order.reserve(predictions.size());
  for (const auto& p : predictions) order.push_back(&p);
  std::sort(order.begin(), order.end(), [](const PredictionRecord* a, const PredictionRecord* b) {
    return std::tie(a->sequence_id, a->input_frame_index, a->latency_ms, a->pred_path) <
           std::tie(b->sequence_id, b->input_frame_index, b->latency_ms, b->pred_path);
  });

  Pairing result;
  const auto exclude = [&](std::string_view reason) { ++result.exclusions[std::string(reason)]; };
  for (const PredictionRecord* p : order) {
    const SequenceManifest* seq = dataset.find(p->sequence_id);
    if (seq == nullptr) {
      exclude(exclusion::kUnknownSequence);
      continue;
    }
    const auto input_pos = seq->position_of(p->input_frame_index);
    if (!input_pos) {
      exclude(exclusion::kUnknownFrame);
      continue;
    }
    const auto target = target_index(*seq, *input_pos, p->latency_ms, mode);
    if (!target) {
      exclude(exclusion::kOutOfSequence);
      continue;
    }
    const auto target_pos = seq->position_of(*target);
    if (!target_pos || !seq->frames[*target_pos].gt) {
      exclude(exclusion::kMissingGt);
      continue;
    }
    result.pairs.push_back(EvalPair{p->sequence_id, p->pred_path, *seq->frames[*target_pos].gt,
                                    p->input_frame_index, *target,
                                    *target - p->input_frame_index, p->latency_ms});
  }
  return result;
}

std::int64_t cityscapes_input_index(std::int64_t annotated_index, double latency_ms,
                                    double interval_ms) {
  const std::int64_t k = frame_offset(latency_ms, interval_ms);
  if (k > annotated_index) {
    throw std::invalid_argument("frame offset " + std::to_string(k) +
                                " exceeds annotated index " + std::to_string(annotated_index));
  }
  return annotated_index - k;
}

}  // namespace flame
