#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <variant>
#include <vector>

namespace flame {

/// Timing of a frame sequence: a uniform interval d, optionally refined by
/// explicit per-frame timestamps (strictly increasing, in milliseconds).
class FrameTiming {
 public:
  explicit FrameTiming(double interval_ms);
  FrameTiming(double interval_ms, std::vector<double> timestamps_ms);

  double interval_ms() const noexcept { return interval_ms_; }
  bool has_timestamps() const noexcept { return !timestamps_ms_.empty(); }
  const std::vector<double>& timestamps_ms() const noexcept { return timestamps_ms_; }

 private:
  double interval_ms_;
  std::vector<double> timestamps_ms_;
};

/// Smallest k >= 0 with k * interval_ms >= latency_ms, i.e. ceil(l / d).
///
/// The frame arriving exactly when processing finishes counts as the next
/// frame, so exact multiples map to l / d. Throws std::invalid_argument for a
/// negative or non-finite latency or a non-positive interval.
std::int64_t frame_offset(double latency_ms, double interval_ms);

/// Index of the ground-truth frame current when a prediction started on
/// `input_index` finishes, or nullopt when that frame lies past the end.
///
/// Uniform timing gives input_index + frame_offset(latency, interval). With
/// timestamps, the result is the smallest index whose timestamp is >= the
/// input timestamp plus the latency; timestamps must then cover all
/// `sequence_length` frames.
std::optional<std::int64_t> resolve_target_frame(std::int64_t input_index,
                                                 double latency_ms,
                                                 const FrameTiming& timing,
                                                 std::int64_t sequence_length);

/// Where a prediction's latency comes from: one constant for every frame, or a
/// per-prediction trace keyed by input frame index. Latencies are never
/// averaged before the offset is taken.
class LatencyModel {
 public:
  static LatencyModel constant(double latency_ms);
  static LatencyModel per_prediction(std::map<std::int64_t, double> latency_by_frame);

  bool is_constant() const noexcept { return std::holds_alternative<double>(source_); }
  /// nullopt when a per-prediction model has no entry for the frame.
  std::optional<double> latency_for(std::int64_t frame_index) const;

 private:
  explicit LatencyModel(std::variant<double, std::map<std::int64_t, double>> source)
      : source_(std::move(source)) {}

  std::variant<double, std::map<std::int64_t, double>> source_;
};

/// Latency trace CSV with header "frame_index,latency_ms". Throws flame::Error
/// on a bad header, a malformed row, a negative latency or a repeated frame.
std::map<std::int64_t, double> parse_latency_trace(std::istream& in);
std::map<std::int64_t, double> read_latency_trace(const std::filesystem::path& path);
void write_latency_trace(const std::map<std::int64_t, double>& trace, std::ostream& out);

}  // namespace flame
