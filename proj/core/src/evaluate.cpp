#include "flame/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "flame/error.hpp"

namespace flame {

ConfusionMatrix accumulate_pairs(std::span<const EvalPair> pairs, const ClassSet& classes,
                                 unsigned jobs, const LabelMapLoader& loader) {
  const LabelMapLoader load =
      loader ? loader
             : LabelMapLoader([&classes](const std::filesystem::path& p) {
                 return read_labelmap(p, classes);
               });
  const auto score = [&](ConfusionMatrix& cm, const EvalPair& pair) {
    const LabelMap gt = load(pair.gt_path);
    const LabelMap pred = load(pair.pred_path);
    try {
      cm.accumulate(gt, pred);
    } catch (const Error& e) {
      throw Error(pair.pred_path.string() + " vs " + pair.gt_path.string() + ": " + e.what());
    }
  };

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(pairs.size(), 1)));

  if (jobs == 1) {
    ConfusionMatrix cm(classes.num_classes());
    for (const auto& pair : pairs) score(cm, pair);
    return cm;
  }

  std::vector<ConfusionMatrix> partial(jobs, ConfusionMatrix(classes.num_classes()));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(jobs);
    for (unsigned w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        try {
          for (std::size_t i = next++; i < pairs.size() && !failed; i = next++) {
            score(partial[w], pairs[i]);
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);

  ConfusionMatrix total(classes.num_classes());
  for (const auto& cm : partial) total.merge(cm);
  return total;
}

EvalReport assemble_report(EvalMode mode, const ConfusionMatrix& cm, const Pairing& pairing,
                           std::span<const PredictionRecord> predictions,
                           const DatasetManifest& dataset) {
  if (pairing.pairs.empty()) {
    throw EmptyEvaluation("empty evaluation: none of the " + std::to_string(predictions.size()) +
                          " predictions could be paired with ground truth");
  }
  const MiouResult scores = miou(cm);

  EvalReport report;
  report.mode = mode;
  report.num_classes = cm.num_classes();
  report.miou = scores.miou;
  report.num_defined_classes = scores.num_defined_classes;
  report.per_class = scores.per_class;
  report.pairs_evaluated = pairing.pairs.size();
  report.exclusions = pairing.exclusions;
  for (const auto& pair : pairing.pairs) ++report.offsets_histogram[pair.offset_used];

  if (!predictions.empty()) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double sum = 0.0;
    for (const auto& p : predictions) {
      lo = std::min(lo, p.latency_ms);
      hi = std::max(hi, p.latency_ms);
      sum += p.latency_ms;
    }
    report.latency = LatencySummary{lo, hi, sum / static_cast<double>(predictions.size())};
  }

  if (!dataset.sequences.empty()) {
    const double interval = dataset.sequences.front().timing.interval_ms();
    const bool uniform =
        std::all_of(dataset.sequences.begin(), dataset.sequences.end(),
                    [&](const SequenceManifest& s) { return s.timing.interval_ms() == interval; });
    if (uniform) report.dataset_interval_ms = interval;
  }
  return report;
}

EvalReport evaluate(const DatasetManifest& dataset,
                    std::span<const PredictionRecord> predictions, const EvalOptions& options) {
  const Pairing pairing = pair_predictions(dataset, predictions, options.mode);
  if (pairing.pairs.empty()) {
    throw EmptyEvaluation("empty evaluation: none of the " + std::to_string(predictions.size()) +
                          " predictions could be paired with ground truth");
  }
  const ClassSet classes(dataset.num_classes);
  const ConfusionMatrix cm = accumulate_pairs(pairing.pairs, classes, options.jobs);
  return assemble_report(options.mode, cm, pairing, predictions, dataset);
}

}  // namespace flame
