#include "flame/metrics.hpp"

#include <sstream>
#include <stdexcept>

#include "flame/error.hpp"

namespace flame {

ConfusionMatrix::ConfusionMatrix(int num_classes)
    : num_classes_(ClassSet(num_classes).num_classes()),
      counts_(static_cast<std::size_t>(num_classes) * static_cast<std::size_t>(num_classes), 0) {}

std::uint64_t ConfusionMatrix::at(int gt_class, int pred_class) const {
  if (gt_class < 0 || gt_class >= num_classes_ || pred_class < 0 || pred_class >= num_classes_) {
    throw std::out_of_range("confusion matrix index out of range");
  }
  return counts_[static_cast<std::size_t>(gt_class) * num_classes_ + pred_class];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
  std::uint64_t sum = 0;
  for (auto c : counts_) sum += c;
  return sum;
}

std::uint64_t ConfusionMatrix::row_sum(int gt_class) const {
  std::uint64_t sum = 0;
  for (int p = 0; p < num_classes_; ++p) sum += at(gt_class, p);
  return sum;
}

std::uint64_t ConfusionMatrix::column_sum(int pred_class) const {
  std::uint64_t sum = 0;
  for (int g = 0; g < num_classes_; ++g) sum += at(g, pred_class);
  return sum;
}

void ConfusionMatrix::accumulate(const LabelMap& gt, const LabelMap& pred) {
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    std::ostringstream msg;
    msg << "dimension mismatch: ground truth " << gt.width() << "x" << gt.height()
        << ", prediction " << pred.width() << "x" << pred.height();
    throw Error(msg.str());
  }
  const auto k = static_cast<std::uint8_t>(num_classes_);
  const auto g = gt.values();
  const auto p = pred.values();

  // Validate first so a bad pair leaves the matrix untouched.
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] >= k || (g[i] >= k && g[i] != kIgnoreValue)) {
      const bool in_pred = p[i] >= k;
      const auto w = static_cast<std::size_t>(gt.width());
      std::ostringstream msg;
      if (in_pred && p[i] == kIgnoreValue) {
        msg << "ignore value in prediction at (" << i % w << "," << i / w << ")";
      } else {
        msg << "class index out of range at (" << i % w << "," << i / w << ") in "
            << (in_pred ? "prediction" : "ground truth");
      }
      throw Error(msg.str());
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == kIgnoreValue) continue;
    ++counts_[static_cast<std::size_t>(g[i]) * num_classes_ + p[i]];
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.num_classes_ != num_classes_) {
    throw std::invalid_argument("cannot merge confusion matrices with " +
                                std::to_string(num_classes_) + " and " +
                                std::to_string(other.num_classes_) + " classes");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

ConfusionMatrix accumulate(ConfusionMatrix cm, const LabelMap& gt, const LabelMap& pred) {
  cm.accumulate(gt, pred);
  return cm;
}

ConfusionMatrix merge(ConfusionMatrix a, const ConfusionMatrix& b) {
  a.merge(b);
  return a;
}

std::optional<double> ClassIoU::iou() const noexcept {
  if (union_ == 0) return std::nullopt;
  return static_cast<double>(intersection) / static_cast<double>(union_);
}

ClassIoU class_iou(const ConfusionMatrix& cm, int class_id) {
  if (class_id < 0 || class_id >= cm.num_classes()) {
    throw std::out_of_range("class id " + std::to_string(class_id) + " out of range");
  }
  const std::uint64_t tp = cm.at(class_id, class_id);
  return ClassIoU{class_id, tp, cm.row_sum(class_id) + cm.column_sum(class_id) - tp};
}

MiouResult miou(const ConfusionMatrix& cm) {
  MiouResult result;
  result.per_class.reserve(static_cast<std::size_t>(cm.num_classes()));
  double sum = 0.0;
  for (int c = 0; c < cm.num_classes(); ++c) {
    const ClassIoU iou = class_iou(cm, c);
    if (const auto value = iou.iou()) {
      sum += *value;
      ++result.num_defined_classes;
    }
    result.per_class.push_back(iou);
  }
  if (result.num_defined_classes == 0) {
    throw EmptyEvaluation("empty evaluation: no class appears in ground truth or prediction");
  }
  result.miou = sum / result.num_defined_classes;
  return result;
}

}  // namespace flame
