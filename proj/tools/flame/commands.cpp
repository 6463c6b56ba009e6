#include "flame/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "flame/dataset.hpp"
#include "flame/error.hpp"
#include "flame/evaluate.hpp"
#include "flame/latency.hpp"
#include "flame/report.hpp"
#include "flame/synth.hpp"

namespace flame::cli {

namespace {

std::string shortest(double value) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, static_cast<std::size_t>(end - buf));
}

std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

}  // namespace

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const EvalMode mode = parse_eval_mode(args.mode);
    const DatasetManifest dataset = load_dataset_manifest(args.dataset);
    std::vector<PredictionRecord> predictions = load_prediction_manifest(args.predictions);
    if (args.latency_trace) {
      const auto model = LatencyModel::per_prediction(read_latency_trace(*args.latency_trace));
      for (auto& p : predictions) {
        if (const auto latency = model.latency_for(p.input_frame_index)) p.latency_ms = *latency;
      }
    }

    const EvalReport report = evaluate(dataset, predictions, EvalOptions{mode, args.jobs});
    if (args.out) {
      std::ofstream file(*args.out, std::ios::trunc);
      if (!file) throw Error("cannot write report " + args.out->string());
      file << report_to_json(report).dump(2) << '\n';
      if (!file) throw Error("failed writing report " + args.out->string());
    }
    out << render_table(report);
    return kSuccess;
  } catch (const EmptyEvaluation& e) {
    err << "flame eval: " << e.what() << '\n';
    return kEmptyEvaluation;
  } catch (const std::exception& e) {
    err << "flame eval: " << e.what() << '\n';
    return kInputError;
  }
}

int cmd_synth(const std::filesystem::path& spec, const std::filesystem::path& out_dir,
              std::ostream& out, std::ostream& err) {
  try {
    const synth::SynthSpec parsed = synth::load_synth_spec(spec);
    const synth::SynthOutput written = synth::write_synthetic_dataset(parsed, out_dir);
    out << "dataset manifest: " << written.dataset_manifest.string() << '\n';
    for (const auto& p : written.prediction_manifests) {
      out << "prediction manifest: " << p.string() << '\n';
    }
    return kSuccess;
  } catch (const std::exception& e) {
    err << "flame synth: " << e.what() << '\n';
    return kInputError;
  }
}

int cmd_offset(std::string_view latency_ms, std::string_view interval_ms, std::ostream& out,
               std::ostream& err) {
  const auto latency = parse_double(latency_ms);
  const auto interval = parse_double(interval_ms);
  if (!latency || !interval) {
    err << "flame offset: latency and interval must be numbers\n";
    return kInputError;
  }
  if (*latency < 0.0 || *interval <= 0.0) {
    err << "flame offset: need latency >= 0 and interval > 0\n";
    return kInputError;
  }
  const std::int64_t k = frame_offset(*latency, *interval);
  out << "k = " << k << '\n';
  if (k == 0) {
    out << "l = 0: compared against the input frame\n";
  } else {
    out << shortest(static_cast<double>(k - 1) * *interval) << " < " << shortest(*latency)
        << " <= " << shortest(static_cast<double>(k) * *interval)
        << "  ((k-1)*d < l <= k*d)\n";
  }
  return kSuccess;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Latency-aware evaluation of video semantic segmentation", "flame"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  eval_args.jobs = std::max(1u, std::thread::hardware_concurrency());
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--dataset", eval_args.dataset, "Dataset manifest (JSON)")->required();
  eval->add_option("--predictions", eval_args.predictions, "Prediction manifest (JSON)")
      ->required();
  eval->add_option("--mode", eval_args.mode, "static or flame")
      ->check(CLI::IsMember({"static", "flame"}))
      ->capture_default_str();
  std::string out_path;
  eval->add_option("--out", out_path, "Write the JSON report here");
  std::string trace_path;
  eval->add_option("--latency-trace", trace_path,
                   "CSV with frame_index,latency_ms overriding manifest latencies");
  eval->add_option("--jobs", eval_args.jobs, "Worker threads")->check(CLI::PositiveNumber);

  std::string spec_path;
  std::string out_dir;
  auto* synth = app.add_subcommand("synth", "Materialise a synthetic scene and predictions");
  synth->add_option("--spec", spec_path, "Scene spec (JSON)")->required();
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  std::string latency_text;
  std::string interval_text;
  auto* offset = app.add_subcommand("offset", "Frame offset k for a latency and frame interval");
  offset->add_option("latency_ms", latency_text)->required();
  offset->add_option("interval_ms", interval_text)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kInputError;
  }

  if (*eval) {
    if (!out_path.empty()) eval_args.out = out_path;
    if (!trace_path.empty()) eval_args.latency_trace = trace_path;
    return cmd_eval(eval_args, out, err);
  }
  if (*synth) return cmd_synth(spec_path, out_dir, out, err);
  return cmd_offset(latency_text, interval_text, out, err);
}

}  // namespace flame::cli
