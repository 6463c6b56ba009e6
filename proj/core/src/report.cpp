#include "flame/report.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "flame/error.hpp"

namespace flame {

using nlohmann::json;

std::uint64_t EvalReport::total_predictions() const noexcept {
  std::uint64_t n = pairs_evaluated;
  for (const auto& [reason, count] : exclusions) n += count;
  return n;
}

std::optional<double> EvalReport::fps() const noexcept {
  if (latency.mean_ms <= 0.0) return std::nullopt;
  return 1000.0 / latency.mean_ms;
}

std::string format_decimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

json report_to_json(const EvalReport& report) {
  json per_class = json::array();
  for (const auto& c : report.per_class) {
    const auto iou = c.iou();
    per_class.push_back({{"class_id", c.class_id},
                         {"intersection", c.intersection},
                         {"union", c.union_},
                         {"iou", iou ? json(format_decimal(*iou)) : json(nullptr)}});
  }
  json exclusions = json::object();
  for (const auto& [reason, count] : report.exclusions) exclusions[reason] = count;
  json offsets = json::object();
  for (const auto& [k, count] : report.offsets_histogram) offsets[std::to_string(k)] = count;
  const auto fps = report.fps();

  return json{
      {"mode", std::string(to_string(report.mode))},
      {"num_classes", report.num_classes},
      {"miou", report.miou},
      {"miou_decimal", format_decimal(report.miou)},
      {"num_defined_classes", report.num_defined_classes},
      {"per_class", std::move(per_class)},
      {"pairs_evaluated", report.pairs_evaluated},
      {"total_predictions", report.total_predictions()},
      {"exclusions", std::move(exclusions)},
      {"offsets_histogram", std::move(offsets)},
      {"latency_ms",
       {{"min", report.latency.min_ms},
        {"max", report.latency.max_ms},
        {"mean", report.latency.mean_ms}}},
      {"fps", fps ? json(*fps) : json(nullptr)},
      {"dataset_interval_ms",
       report.dataset_interval_ms ? json(*report.dataset_interval_ms) : json(nullptr)},
  };
}

EvalReport report_from_json(const json& doc) {
  try {
    EvalReport report;
    report.mode = parse_eval_mode(doc.at("mode").get<std::string>());
    report.num_classes = doc.at("num_classes").get<int>();
    report.miou = doc.at("miou").get<double>();
    report.num_defined_classes = doc.at("num_defined_classes").get<int>();
    for (const auto& c : doc.at("per_class")) {
      report.per_class.push_back(ClassIoU{c.at("class_id").get<int>(),
                                          c.at("intersection").get<std::uint64_t>(),
                                          c.at("union").get<std::uint64_t>()});
    }
    report.pairs_evaluated = doc.at("pairs_evaluated").get<std::uint64_t>();
    for (const auto& [reason, count] : doc.at("exclusions").items()) {
      report.exclusions[reason] = count.get<std::uint64_t>();
    }
    for (const auto& [k, count] : doc.at("offsets_histogram").items()) {
      report.offsets_histogram[std::stoll(k)] = count.get<std::uint64_t>();
    }
    const json& latency = doc.at("latency_ms");
    report.latency = LatencySummary{latency.at("min").get<double>(), latency.at("max").get<double>(),
                                    latency.at("mean").get<double>()};
    if (const json& interval = doc.at("dataset_interval_ms"); !interval.is_null()) {
      report.dataset_interval_ms = interval.get<double>();
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  } catch (const std::logic_error& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  const auto row = [&out](std::string_view label, const std::string& value) {
    out << std::left << std::setw(22) << label << value << '\n';
  };

  row("mode", std::string(to_string(report.mode)));
  row("pairs evaluated", std::to_string(report.pairs_evaluated));
  for (const auto& [reason, count] : report.exclusions) {
    row("excluded " + reason, std::to_string(count));
  }
  out << '\n'
      << std::right << std::setw(6) << "class" << std::setw(16) << "intersection"
      << std::setw(16) << "union" << std::setw(10) << "IoU" << '\n';
  for (const auto& c : report.per_class) {
    const auto iou = c.iou();
    out << std::setw(6) << c.class_id << std::setw(16) << c.intersection << std::setw(16)
        << c.union_ << std::setw(10) << (iou ? format_decimal(*iou) : std::string("-")) << '\n';
  }
  out << '\n' << std::left;
  row(report.mode == EvalMode::kFlame ? "FLAME (mIoU)" : "mIoU", format_decimal(report.miou));
  row("defined classes",
      std::to_string(report.num_defined_classes) + " of " + std::to_string(report.num_classes));
  for (const auto& [k, count] : report.offsets_histogram) {
    row("frame offset k=" + std::to_string(k), std::to_string(count) + " pairs");
  }
  row("latency min (ms)", format_decimal(report.latency.min_ms));
  row("latency mean (ms)", format_decimal(report.latency.mean_ms));
  row("latency max (ms)", format_decimal(report.latency.max_ms));
  const auto fps = report.fps();
  row("FPS", fps ? format_decimal(*fps) : std::string("-"));
  row("frame interval (ms)",
      report.dataset_interval_ms ? format_decimal(*report.dataset_interval_ms) : std::string("mixed"));
  return out.str();
}

}  // namespace flame
