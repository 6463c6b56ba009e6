#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "flame/dataset.hpp"
#include "flame/metrics.hpp"

namespace flame {

struct LatencySummary {
  double min_ms = 0.0;
  double max_ms = 0.0;
  double mean_ms = 0.0;

  friend bool operator==(const LatencySummary&, const LatencySummary&) = default;
};

/// Result of one evaluation run.
///
/// pairs_evaluated plus the exclusion counts equals the number of predictions
/// submitted. The offsets histogram counts scored pairs by frame offset, so it
/// is all zeros in static mode. Latency statistics cover every submitted
/// prediction.
struct EvalReport {
  EvalMode mode = EvalMode::kFlame;
  int num_classes = 0;
  double miou = 0.0;
  int num_defined_classes = 0;
  std::vector<ClassIoU> per_class;
  std::uint64_t pairs_evaluated = 0;
  std::map<std::string, std::uint64_t, std::less<>> exclusions;
  std::map<std::int64_t, std::uint64_t> offsets_histogram;
  LatencySummary latency;
  /// Unset when sequences disagree on their frame interval.
  std::optional<double> dataset_interval_ms;

  std::uint64_t total_predictions() const noexcept;
  /// 1000 / mean latency; nullopt at zero latency.
  std::optional<double> fps() const noexcept;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Four-place decimal rendering used for every ratio in reports.
std::string format_decimal(double value);

nlohmann::json report_to_json(const EvalReport& report);
/// Inverse of report_to_json. Derived fields (decimals, fps) are ignored.
EvalReport report_from_json(const nlohmann::json& doc);

/// Aligned plain-text table with the same numbers as the JSON form.
std::string render_table(const EvalReport& report);

}  // namespace flame
