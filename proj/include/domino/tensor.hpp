#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace domino::nnet {

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t plane() const noexcept { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const noexcept { return plane() * channels; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Dense (channels, height, width) tensor of doubles.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  const Shape& shape() const noexcept { return shape_; }
  int channels() const noexcept { return shape_.channels; }
  int height() const noexcept { return shape_.height; }
  int width() const noexcept { return shape_.width; }

  double& operator()(int c, int i, int j) noexcept {
    return data_[c * shape_.plane() + static_cast<std::size_t>(i) * shape_.width + j];
  }
  double operator()(int c, int i, int j) const noexcept {
    return data_[c * shape_.plane() + static_cast<std::size_t>(i) * shape_.width + j];
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> channel(int c) noexcept { return {data_.data() + c * shape_.plane(), shape_.plane()}; }
  std::span<const double> channel(int c) const noexcept {
    return {data_.data() + c * shape_.plane(), shape_.plane()};
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Single-channel binary validity mask; 1 = visible, 0 = hidden.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, double fill = 1.0);
  Mask(int height, int width, std::vector<double> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(int i, int j) noexcept { return data_[static_cast<std::size_t>(i) * width_ + j]; }
  double operator()(int i, int j) const noexcept {
    return data_[static_cast<std::size_t>(i) * width_ + j];
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

}  // namespace domino::nnet
