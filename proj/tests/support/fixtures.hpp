#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "flame/labelmap.hpp"

namespace flame::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("flame_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

/// Uniform random map with values in [0, K), plus ignore at `ignore_rate`.
inline LabelMap random_map(std::mt19937_64& rng, int width, int height, int num_classes,
                           double ignore_rate = 0.0) {
  std::uniform_int_distribution<int> cls(0, num_classes - 1);
  std::bernoulli_distribution ignore(ignore_rate);
  std::vector<std::uint8_t> v(static_cast<std::size_t>(width) * height);
  for (auto& x : v) x = ignore_rate > 0.0 && ignore(rng) ? kIgnoreValue : static_cast<std::uint8_t>(cls(rng));
  return LabelMap(width, height, std::move(v));
}

}  // namespace flame::testing
