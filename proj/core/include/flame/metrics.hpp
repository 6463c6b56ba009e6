#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flame/labelmap.hpp"

namespace flame {

/// K x K pixel counts indexed by (ground-truth class, predicted class).
///
/// All IoU values derive from this matrix. Counts are exact integers; division
/// only happens when an IoU is read out. Matrices from disjoint pixel sets can
/// be merged in any order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  std::uint64_t at(int gt_class, int pred_class) const;
  std::uint64_t total() const noexcept;
  std::uint64_t row_sum(int gt_class) const;
  std::uint64_t column_sum(int pred_class) const;

  /// Adds one (gt, pred) pair. Ignore-labelled ground-truth pixels are skipped.
  /// Throws flame::Error on dimension mismatch, on an ignore value in `pred`
  /// or on any value >= K.
  void accumulate(const LabelMap& gt, const LabelMap& pred);
  /// Element-wise addition. Throws std::invalid_argument when K differs.
  void merge(const ConfusionMatrix& other);

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int num_classes_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix accumulate(ConfusionMatrix cm, const LabelMap& gt, const LabelMap& pred);
ConfusionMatrix merge(ConfusionMatrix a, const ConfusionMatrix& b);

struct ClassIoU {
  int class_id = 0;
  std::uint64_t intersection = 0;
  std::uint64_t union_ = 0;

  bool defined() const noexcept { return union_ > 0; }
  /// intersection / union, or nullopt for a class absent from both maps.
  std::optional<double> iou() const noexcept;

  friend bool operator==(const ClassIoU&, const ClassIoU&) = default;
};

struct MiouResult {
  std::vector<ClassIoU> per_class;
  double miou = 0.0;
  int num_defined_classes = 0;
};

/// Throws std::out_of_range for a class id outside [0, K).
ClassIoU class_iou(const ConfusionMatrix& cm, int class_id);

/// Mean IoU over the classes with a non-zero union, summed in class order.
/// Throws flame::EmptyEvaluation when no class is defined.
MiouResult miou(const ConfusionMatrix& cm);

}  // namespace flame
