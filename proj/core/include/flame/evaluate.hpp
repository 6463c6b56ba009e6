#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "flame/dataset.hpp"
#include "flame/labelmap.hpp"
#include "flame/metrics.hpp"
#include "flame/report.hpp"

namespace flame {

struct EvalOptions {
  EvalMode mode = EvalMode::kFlame;
  /// Worker threads loading and accumulating pairs; 0 means one per core.
  unsigned jobs = 0;
};

using LabelMapLoader = std::function<LabelMap(const std::filesystem::path&)>;

/// Accumulates every pair into one confusion matrix. Each worker owns a matrix
/// and the results are merged at the end. Without a loader, label maps are
/// read from disk.
ConfusionMatrix accumulate_pairs(std::span<const EvalPair> pairs, const ClassSet& classes,
                                 unsigned jobs, const LabelMapLoader& loader = {});

/// Builds the report from an already accumulated matrix. Throws
/// flame::EmptyEvaluation when no pair was scored or no class is defined.
EvalReport assemble_report(EvalMode mode, const ConfusionMatrix& cm, const Pairing& pairing,
                           std::span<const PredictionRecord> predictions,
                           const DatasetManifest& dataset);

/// Pairs, loads and scores predictions against a dataset.
EvalReport evaluate(const DatasetManifest& dataset,
                    std::span<const PredictionRecord> predictions,
                    const EvalOptions& options);

}  // namespace flame
