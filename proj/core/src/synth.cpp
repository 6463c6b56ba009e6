#include "flame/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "flame/error.hpp"
#include "flame/evaluate.hpp"

namespace flame::synth {

using nlohmann::json;

std::vector<PlacedObject> place_objects(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw Error("scene dimensions must be positive");
  if (spec.num_frames < 1) throw Error("scene needs at least one frame");
  if (spec.num_classes < 1 || spec.num_classes > 255) {
    throw Error("num_classes must be in [1, 255]");
  }

  // Placement draws raw 64-bit words so the layout does not depend on the
  // standard library's distribution implementations.
  std::mt19937_64 rng(spec.seed);
  std::vector<PlacedObject> placed;
  placed.reserve(spec.objects.size());
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const ObjectSpec& o = spec.objects[i];
    const std::string which = "object " + std::to_string(i);
    if (o.class_id < 1 || o.class_id >= spec.num_classes) {
      throw Error(which + ": class_id must be in [1, " + std::to_string(spec.num_classes) + ")");
    }
    if (o.width < 1 || o.height < 1) throw Error(which + ": shape must be positive");
    if (o.width > spec.width || o.height > spec.height) {
      throw Error(which + ": object larger than frame");
    }
    Vec2 position;
    if (o.position) {
      position = *o.position;
      if (position.x < 0 || position.y < 0 || position.x + o.width > spec.width ||
          position.y + o.height > spec.height) {
        throw Error(which + ": object does not fit in the frame at frame 0");
      }
    } else {
      position.x = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(spec.width - o.width + 1));
      position.y = static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(spec.height - o.height + 1));
    }
    placed.push_back(PlacedObject{o.class_id, o.width, o.height, position, o.velocity});
  }
  return placed;
}

LabelMap rasterize(int width, int height, const std::vector<PlacedObject>& objects,
                   const std::vector<Vec2>& positions) {
  if (positions.size() != objects.size()) {
    throw std::invalid_argument("one position per object required");
  }
  std::vector<std::uint8_t> values(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::int64_t x0 = std::max<std::int64_t>(positions[i].x, 0);
    const std::int64_t y0 = std::max<std::int64_t>(positions[i].y, 0);
    const std::int64_t x1 = std::min<std::int64_t>(positions[i].x + o.width, width);
    const std::int64_t y1 = std::min<std::int64_t>(positions[i].y + o.height, height);
    if (x1 <= x0 || y1 <= y0) continue;
    for (std::int64_t y = y0; y < y1; ++y) {
      auto* line = values.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
      std::fill(line + x0, line + x1, static_cast<std::uint8_t>(o.class_id));
    }
  }
  return LabelMap(width, height, std::move(values));
}

namespace {

LabelMap rasterize_at(const SceneSpec& spec, const std::vector<PlacedObject>& objects,
                      std::int64_t t) {
  std::vector<Vec2> positions;
  positions.reserve(objects.size());
  for (const auto& o : objects) positions.push_back(o.position_at(t));
  return rasterize(spec.width, spec.height, objects, positions);
}

}  // namespace

Scene render_scene(const SceneSpec& spec) {
  Scene scene{spec, place_objects(spec), {}};
  scene.frames.reserve(static_cast<std::size_t>(spec.num_frames));
  for (int t = 0; t < spec.num_frames; ++t) {
    scene.frames.push_back(rasterize_at(spec, scene.objects, t));
  }
  return scene;
}

std::string_view to_string(PredictorKind kind) noexcept {
  switch (kind) {
    case PredictorKind::kOracle:
      return "oracle";
    case PredictorKind::kDelayedOracle:
      return "delayed_oracle";
    case PredictorKind::kExtrapolatingOracle:
      return "extrapolating_oracle";
  }
  return "unknown";
}

PredictorKind parse_predictor_kind(std::string_view text) {
  for (auto kind : {PredictorKind::kOracle, PredictorKind::kDelayedOracle,
                    PredictorKind::kExtrapolatingOracle}) {
    if (text == to_string(kind)) return kind;
  }
  throw Error("unknown predictor kind \"" + std::string(text) + "\"");
}

namespace {

std::int64_t frame_count(const Scene& scene) {
  return static_cast<std::int64_t>(scene.frames.size());
}

// Frames elapsed while the predictor processes `input_index`; nullopt when
// explicit timestamps end before processing does.
std::optional<std::int64_t> elapsed_frames(const Scene& scene, std::int64_t input_index,
                                           const FrameTiming& timing, double latency_ms) {
  if (!timing.has_timestamps()) return frame_offset(latency_ms, timing.interval_ms());
  const auto target = resolve_target_frame(input_index, latency_ms, timing, frame_count(scene));
  if (!target) return std::nullopt;
  return *target - input_index;
}

}  // namespace

LabelMap run_predictor(const SimPredictor& predictor, const Scene& scene,
                       std::int64_t input_index, const FrameTiming& timing) {
  if (input_index < 0 || input_index >= frame_count(scene)) {
    throw std::out_of_range("input frame " + std::to_string(input_index) + " out of range");
  }
  switch (predictor.kind) {
    case PredictorKind::kDelayedOracle:
      return scene.frames[static_cast<std::size_t>(input_index)];
    case PredictorKind::kOracle: {
      const auto target =
          resolve_target_frame(input_index, predictor.latency_ms, timing, frame_count(scene));
      if (!target) throw std::out_of_range("oracle target frame past the end of the scene");
      return scene.frames[static_cast<std::size_t>(*target)];
    }
    case PredictorKind::kExtrapolatingOracle: {
      if (input_index < 1) {
        throw std::out_of_range("extrapolating oracle needs a previous frame");
      }
      const auto k = elapsed_frames(scene, input_index, timing, predictor.latency_ms);
      if (!k) throw std::out_of_range("extrapolation horizon past the last timestamp");
      std::vector<Vec2> positions;
      positions.reserve(scene.objects.size());
      for (const auto& o : scene.objects) {
        const Vec2 now = o.position_at(input_index);
        const Vec2 before = o.position_at(input_index - 1);
        positions.push_back({now.x + *k * (now.x - before.x), now.y + *k * (now.y - before.y)});
      }
      return rasterize(scene.spec.width, scene.spec.height, scene.objects, positions);
    }
  }
  throw std::invalid_argument("unknown predictor kind");
}

std::vector<std::int64_t> admissible_inputs(const Scene& scene, const FrameTiming& timing,
                                            double latency_ms) {
  std::vector<std::int64_t> inputs;
  for (std::int64_t t = 1; t < frame_count(scene); ++t) {
    if (resolve_target_frame(t, latency_ms, timing, frame_count(scene))) inputs.push_back(t);
  }
  return inputs;
}

namespace {

constexpr const char* kSequenceId = "synthetic";

std::string frame_file(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04lld.pgm", static_cast<long long>(index));
  return buf;
}

DatasetManifest scene_manifest(const Scene& scene, const FrameTiming& timing) {
  DatasetManifest dataset;
  dataset.num_classes = scene.spec.num_classes;
  SequenceManifest seq;
  seq.sequence_id = kSequenceId;
  seq.timing = timing;
  for (std::int64_t i = 0; i < frame_count(scene); ++i) {
    seq.frames.push_back(FrameEntry{i, std::nullopt, std::filesystem::path("gt") / frame_file(i)});
  }
  dataset.sequences.push_back(std::move(seq));
  return dataset;
}

}  // namespace

EvalReport simulate_experiment(const SceneSpec& spec, const SimPredictor& predictor,
                               const FrameTiming& timing, EvalMode mode) {
  const Scene scene = render_scene(spec);
  if (timing.has_timestamps() &&
      static_cast<std::int64_t>(timing.timestamps_ms().size()) != frame_count(scene)) {
    throw Error("timestamp count does not match the number of frames");
  }
  const DatasetManifest dataset = scene_manifest(scene, timing);

  std::unordered_map<std::string, LabelMap> maps;
  for (std::int64_t i = 0; i < frame_count(scene); ++i) {
    maps.emplace((std::filesystem::path("gt") / frame_file(i)).string(),
                 scene.frames[static_cast<std::size_t>(i)]);
  }
  std::vector<PredictionRecord> predictions;
  for (const std::int64_t t : admissible_inputs(scene, timing, predictor.latency_ms)) {
    const auto path = std::filesystem::path("pred") / frame_file(t);
    maps.emplace(path.string(), run_predictor(predictor, scene, t, timing));
    predictions.push_back(PredictionRecord{kSequenceId, t, predictor.latency_ms, path});
  }

  const Pairing pairing = pair_predictions(dataset, predictions, mode);
  const ClassSet classes(spec.num_classes);
  const ConfusionMatrix cm =
      accumulate_pairs(pairing.pairs, classes, 1, [&maps](const std::filesystem::path& p) {
        return maps.at(p.string());
      });
  return assemble_report(mode, cm, pairing, predictions, dataset);
}

namespace {

std::int64_t get_int(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(where + ": missing \"" + key + "\"");
  if (!it->is_number_integer()) throw Error(where + "." + key + ": expected an integer");
  return it->get<std::int64_t>();
}

int get_small_int(const json& obj, const char* key, const std::string& where) {
  const std::int64_t v = get_int(obj, key, where);
  if (v < -(1 << 30) || v > (1 << 30)) throw Error(where + "." + key + ": out of range");
  return static_cast<int>(v);
}

Vec2 get_vec(const json& obj, const char* key, const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_object()) {
    throw Error(where + "." + key + ": expected an object {\"x\", \"y\"}");
  }
  return Vec2{get_small_int(*it, "x", where + "." + key), get_small_int(*it, "y", where + "." + key)};
}

}  // namespace

SynthSpec parse_synth_spec(const json& doc) {
  if (!doc.is_object()) throw Error("scene spec: expected a JSON object");
  SynthSpec spec;
  SceneSpec& scene = spec.scene;
  const std::string where = "scene spec";
  scene.width = get_small_int(doc, "width", where);
  scene.height = get_small_int(doc, "height", where);
  scene.num_frames = get_small_int(doc, "num_frames", where);
  scene.num_classes = get_small_int(doc, "num_classes", where);
  if (const auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) throw Error("scene spec.seed: expected a non-negative integer");
    scene.seed = it->get<std::uint64_t>();
  }
  if (const auto it = doc.find("interval_ms"); it != doc.end()) {
    if (!it->is_number() || !(it->get<double>() > 0.0)) {
      throw Error("scene spec.interval_ms: expected a positive number");
    }
    spec.interval_ms = it->get<double>();
  }

  const auto objects = doc.find("objects");
  if (objects == doc.end() || !objects->is_array()) {
    throw Error("scene spec.objects: expected an array");
  }
  for (std::size_t i = 0; i < objects->size(); ++i) {
    const json& o = (*objects)[i];
    const std::string at = "objects[" + std::to_string(i) + "]";
    if (!o.is_object()) throw Error(at + ": expected an object");
    ObjectSpec obj;
    obj.class_id = get_small_int(o, "class_id", at);
    const auto shape = o.find("shape");
    if (shape == o.end() || !shape->is_object()) throw Error(at + ".shape: expected {\"w\", \"h\"}");
    obj.width = get_small_int(*shape, "w", at + ".shape");
    obj.height = get_small_int(*shape, "h", at + ".shape");
    if (const auto p = o.find("initial_position"); p != o.end() && !p->is_null()) {
      obj.position = get_vec(o, "initial_position", at);
    }
    if (o.contains("velocity")) obj.velocity = get_vec(o, "velocity", at);
    scene.objects.push_back(obj);
  }

  if (const auto it = doc.find("predictors"); it != doc.end()) {
    if (!it->is_array()) throw Error("scene spec.predictors: expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& p = (*it)[i];
      const std::string at = "predictors[" + std::to_string(i) + "]";
      if (!p.is_object() || !p.contains("kind") || !p["kind"].is_string()) {
        throw Error(at + ": expected {\"kind\", \"latency_ms\"}");
      }
      SimPredictor predictor{parse_predictor_kind(p["kind"].get<std::string>()), 0.0};
      if (const auto l = p.find("latency_ms"); l != p.end()) {
        if (!l->is_number() || l->get<double>() < 0.0) {
          throw Error(at + ".latency_ms: expected a non-negative number");
        }
        predictor.latency_ms = l->get<double>();
      }
      spec.predictors.push_back(predictor);
    }
  } else {
    for (auto kind : {PredictorKind::kOracle, PredictorKind::kDelayedOracle,
                      PredictorKind::kExtrapolatingOracle}) {
      spec.predictors.push_back(SimPredictor{kind, spec.interval_ms});
    }
  }
  return spec;
}

SynthSpec load_synth_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scene spec " + path.string());
  try {
    return parse_synth_spec(json::parse(in));
  } catch (const json::parse_error& e) {
    throw Error(path.string() + ": invalid JSON: " + e.what());
  } catch (const Error& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

json synth_spec_to_json(const SynthSpec& spec) {
  json objects = json::array();
  for (const auto& o : spec.scene.objects) {
    json obj{{"class_id", o.class_id},
             {"shape", {{"w", o.width}, {"h", o.height}}},
             {"velocity", {{"x", o.velocity.x}, {"y", o.velocity.y}}}};
    if (o.position) obj["initial_position"] = {{"x", o.position->x}, {"y", o.position->y}};
    objects.push_back(std::move(obj));
  }
  json predictors = json::array();
  for (const auto& p : spec.predictors) {
    predictors.push_back({{"kind", std::string(to_string(p.kind))}, {"latency_ms", p.latency_ms}});
  }
  return json{{"width", spec.scene.width},
              {"height", spec.scene.height},
              {"num_frames", spec.scene.num_frames},
              {"num_classes", spec.scene.num_classes},
              {"seed", spec.scene.seed},
              {"interval_ms", spec.interval_ms},
              {"objects", std::move(objects)},
              {"predictors", std::move(predictors)}};
}

std::string predictor_name(const SimPredictor& predictor) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), predictor.latency_ms);
  return std::string(to_string(predictor.kind)) + "_" +
         std::string(buf, static_cast<std::size_t>(end - buf)) + "ms";
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void make_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

SynthOutput write_synthetic_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir) {
  const Scene scene = render_scene(spec.scene);
  const FrameTiming timing(spec.interval_ms);

  std::set<std::string> names;
  for (const auto& p : spec.predictors) {
    if (!names.insert(predictor_name(p)).second) {
      throw Error("duplicate predictor " + predictor_name(p));
    }
  }

  make_dir(out_dir / "gt");
  json frames = json::array();
  for (std::int64_t i = 0; i < frame_count(scene); ++i) {
    const auto rel = std::filesystem::path("gt") / frame_file(i);
    write_labelmap(scene.frames[static_cast<std::size_t>(i)], out_dir / rel);
    frames.push_back({{"index", i}, {"gt", rel.generic_string()}});
  }
  const json dataset{{"num_classes", spec.scene.num_classes},
                     {"sequences",
                      json::array({{{"sequence_id", kSequenceId},
                                    {"interval_ms", spec.interval_ms},
                                    {"frames", std::move(frames)}}})}};
  SynthOutput output;
  output.dataset_manifest = out_dir / "dataset.json";
  write_text(output.dataset_manifest, dataset.dump(2) + "\n");

  for (const auto& predictor : spec.predictors) {
    const std::string name = predictor_name(predictor);
    const auto pred_dir = std::filesystem::path("pred") / name;
    make_dir(out_dir / pred_dir);
    json records = json::array();
    for (const std::int64_t t : admissible_inputs(scene, timing, predictor.latency_ms)) {
      const auto rel = pred_dir / frame_file(t);
      write_labelmap(run_predictor(predictor, scene, t, timing), out_dir / rel);
      records.push_back({{"sequence_id", kSequenceId},
                         {"input_frame_index", t},
                         {"latency_ms", predictor.latency_ms},
                         {"pred", rel.generic_string()}});
    }
    const auto manifest = out_dir / ("predictions_" + name + ".json");
    write_text(manifest, json{{"predictions", std::move(records)}}.dump(2) + "\n");
    output.prediction_manifests.push_back(manifest);
  }
  return output;
}

}  // namespace flame::synth
