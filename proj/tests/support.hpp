#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "domino/image.hpp"

namespace testing {

using domino::imaging::Image;

inline Image random_image(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(h, w);
  for (double& v : img.pixels()) v = u(rng);
  return img;
}

// Axis-aligned rectangles of constant intensity over a mid-grey field.
inline Image piecewise_constant(std::uint64_t seed, int h, int w, int rects = 12) {
  std::mt19937_64 rng(seed);
  Image img(h, w, 0.5);
  std::uniform_int_distribution<int> row(0, h - 1), col(0, w - 1);
  std::uniform_int_distribution<int> side(std::max(2, h / 16), std::max(3, h / 2));
  std::uniform_real_distribution<double> level(0.1, 0.9);
  for (int r = 0; r < rects; ++r) {
    const int i0 = row(rng), j0 = col(rng), rh = side(rng), rw = side(rng);
    const double v = level(rng);
    for (int i = i0; i < std::min(h, i0 + rh); ++i)
      for (int j = j0; j < std::min(w, j0 + rw); ++j) img(i, j) = v;
  }
  return img;
}

// Scratch directory removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("domino-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
