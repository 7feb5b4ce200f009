#include "domino/tensor.hpp"

#include <algorithm>

#include "domino/errors.hpp"

namespace domino::nnet {

Tensor::Tensor(Shape shape, double fill) : shape_(shape) {
  if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
    throw PreconditionError("tensor dimensions must be positive");
  }
  data_.assign(shape.size(), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (shape.channels < 1 || shape.height < 1 || shape.width < 1) {
    throw PreconditionError("tensor dimensions must be positive");
  }
  if (data_.size() != shape.size()) throw PreconditionError("tensor data length does not match shape");
}

Mask::Mask(int height, int width, double fill)
    : Mask(height, width,
           std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) * std::max(width, 0), fill)) {}

Mask::Mask(int height, int width, std::vector<double> data)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 1 || width < 1) throw PreconditionError("mask dimensions must be positive");
  if (data_.size() != static_cast<std::size_t>(height) * width) {
    throw PreconditionError("mask data length does not match shape");
  }
  for (double v : data_) {
    if (v != 0.0 && v != 1.0) throw PreconditionError("mask entries must be 0 or 1");
  }
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), 1.0));
}

}  // namespace domino::nnet
