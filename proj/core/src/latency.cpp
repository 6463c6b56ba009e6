#include "flame/latency.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "flame/error.hpp"

namespace flame {

FrameTiming::FrameTiming(double interval_ms) : interval_ms_(interval_ms) {
  if (!std::isfinite(interval_ms) || interval_ms <= 0.0) {
    throw std::invalid_argument("frame interval must be a positive number of milliseconds");
  }
}

FrameTiming::FrameTiming(double interval_ms, std::vector<double> timestamps_ms)
    : FrameTiming(interval_ms) {
  for (std::size_t i = 0; i < timestamps_ms.size(); ++i) {
    if (!std::isfinite(timestamps_ms[i])) {
      throw std::invalid_argument("frame timestamps must be finite");
    }
    if (i > 0 && !(timestamps_ms[i] > timestamps_ms[i - 1])) {
      throw std::invalid_argument("frame timestamps must be strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
  timestamps_ms_ = std::move(timestamps_ms);
}

std::int64_t frame_offset(double latency_ms, double interval_ms) {
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) {
    throw std::invalid_argument("latency must be a non-negative number of milliseconds");
  }
  if (!std::isfinite(interval_ms) || interval_ms <= 0.0) {
    throw std::invalid_argument("frame interval must be a positive number of milliseconds");
  }
  const double quotient = latency_ms / interval_ms;
  if (quotient > 0x1p62) throw std::invalid_argument("latency too large for frame offset");

  // The division can round across an integer; settle on the smallest k with
  // k * d >= l as evaluated in the same arithmetic the caller sees.
  auto k = static_cast<std::int64_t>(std::ceil(quotient));
  while (k > 0 && static_cast<double>(k - 1) * interval_ms >= latency_ms) --k;
  while (static_cast<double>(k) * interval_ms < latency_ms) ++k;
  return k;
}

std::optional<std::int64_t> resolve_target_frame(std::int64_t input_index, double latency_ms,
                                                 const FrameTiming& timing,
                                                 std::int64_t sequence_length) {
  if (input_index < 0 || input_index >= sequence_length) {
    throw std::out_of_range("input frame " + std::to_string(input_index) +
                            " outside sequence of length " + std::to_string(sequence_length));
  }
  if (!timing.has_timestamps()) {
    const std::int64_t target = input_index + frame_offset(latency_ms, timing.interval_ms());
    if (target >= sequence_length) return std::nullopt;
    return target;
  }

  const auto& ts = timing.timestamps_ms();
  if (static_cast<std::int64_t>(ts.size()) != sequence_length) {
    throw std::invalid_argument("timestamp count does not match sequence length");
  }
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) {
    throw std::invalid_argument("latency must be a non-negative number of milliseconds");
  }
  const double start = ts[static_cast<std::size_t>(input_index)];
  // Elapsed time is compared instead of absolute deadlines so that timestamps
  // of the form i * d agree with the uniform path.
  const auto it = std::find_if(ts.begin() + input_index, ts.end(),
                               [&](double t) { return t - start >= latency_ms; });
  if (it == ts.end()) return std::nullopt;
  return static_cast<std::int64_t>(it - ts.begin());
}

LatencyModel LatencyModel::constant(double latency_ms) {
  if (!std::isfinite(latency_ms) || latency_ms < 0.0) {
    throw std::invalid_argument("latency must be a non-negative number of milliseconds");
  }
  return LatencyModel(latency_ms);
}

LatencyModel LatencyModel::per_prediction(std::map<std::int64_t, double> latency_by_frame) {
  for (const auto& [frame, latency] : latency_by_frame) {
    if (!std::isfinite(latency) || latency < 0.0) {
      throw std::invalid_argument("negative latency for frame " + std::to_string(frame));
    }
  }
  return LatencyModel(std::move(latency_by_frame));
}

std::optional<double> LatencyModel::latency_for(std::int64_t frame_index) const {
  if (const auto* value = std::get_if<double>(&source_)) return *value;
  const auto& by_frame = std::get<std::map<std::int64_t, double>>(source_);
  const auto it = by_frame.find(frame_index);
  if (it == by_frame.end()) return std::nullopt;
  return it->second;
}

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::map<std::int64_t, double> parse_latency_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("latency trace is empty");
  std::string_view header = line;
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  if (trim(header) != "frame_index,latency_ms") {
    throw Error("latency trace header must be \"frame_index,latency_ms\"");
  }

  std::map<std::int64_t, double> trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    std::int64_t frame = 0;
    double latency = 0.0;
    if (comma == std::string_view::npos ||
        !parse_number(trim(row.substr(0, comma)), frame) ||
        !parse_number(trim(row.substr(comma + 1)), latency)) {
      throw Error("malformed latency trace row at line " + std::to_string(line_no));
    }
    if (!std::isfinite(latency) || latency < 0.0) {
      throw Error("negative latency at line " + std::to_string(line_no));
    }
    if (!trace.emplace(frame, latency).second) {
      throw Error("duplicate frame " + std::to_string(frame) + " in latency trace");
    }
  }
  return trace;
}

std::map<std::int64_t, double> read_latency_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open latency trace " + path.string());
  return parse_latency_trace(in);
}

void write_latency_trace(const std::map<std::int64_t, double>& trace, std::ostream& out) {
  out << "frame_index,latency_ms\n";
  char buf[64];
  for (const auto& [frame, latency] : trace) {
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), latency);
    out << frame << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
  }
}

}  // namespace flame
