#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace flame {

inline constexpr std::uint8_t kIgnoreValue = 255;

/// Number of valid classes K. Class indices live in [0, K); 255 is reserved
/// as the ignore label, so K can be at most 255.
class ClassSet {
 public:
  explicit ClassSet(int num_classes);

  int num_classes() const noexcept { return num_classes_; }
  bool is_class(std::uint8_t value) const noexcept { return value < num_classes_; }
  bool admits(std::uint8_t value) const noexcept {
    return is_class(value) || value == kIgnoreValue;
  }

 private:
  int num_classes_;
};

/// Dense row-major grid of class indices.
///
/// A default-constructed map is 0x0 and is the only way to get degenerate
/// dimensions; every other constructor requires width, height >= 1. Values are
/// immutable once built.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, std::vector<std::uint8_t> values);
  /// Also checks every value against `classes`.
  LabelMap(int width, int height, std::vector<std::uint8_t> values,
           const ClassSet& classes);
  /// Map of the given size filled with a single value.
  static LabelMap filled(int width, int height, std::uint8_t value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::uint8_t at(int x, int y) const {
    return values_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                   static_cast<std::size_t>(x)];
  }
  std::span<const std::uint8_t> values() const noexcept { return values_; }

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> values_;
};

/// Throws flame::Error naming the first offending pixel.
void validate_labels(const LabelMap& map, const ClassSet& classes);

/// Decodes a binary PGM (P5, maxval 255) or an 8-bit grayscale PNG. The format
/// is sniffed from the leading magic bytes.
LabelMap decode_labelmap(std::span<const std::byte> bytes, const ClassSet& classes);
LabelMap read_labelmap(const std::filesystem::path& path, const ClassSet& classes);

/// Canonical encoding: "P5\n<w> <h>\n255\n" followed by w*h bytes.
std::string encode_pgm(const LabelMap& map);
void write_labelmap(const LabelMap& map, const std::filesystem::path& path);

}  // namespace flame
