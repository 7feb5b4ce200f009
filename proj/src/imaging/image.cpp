#include "domino/image.hpp"

#include <algorithm>
#include <string>

#include "domino/errors.hpp"

namespace domino::imaging {

Image::Image(int height, int width, double fill, int bit_depth)
    : Image(height, width,
            std::vector<double>(static_cast<std::size_t>(std::max(height, 0)) *
                                    static_cast<std::size_t>(std::max(width, 0)),
                                fill),
            bit_depth) {}

Image::Image(int height, int width, std::vector<double> data, int bit_depth)
    : height_(height), width_(width), data_(std::move(data)) {
  if (height < 1 || width < 1) {
    throw PreconditionError("image dimensions must be positive, got " +
                            std::to_string(height) + "x" + std::to_string(width));
  }
  if (data_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw PreconditionError("image data length does not match dimensions");
  }
  set_bit_depth(bit_depth);
}

void Image::set_bit_depth(int depth) {
  if (depth != 8 && depth != 16) {
    throw PreconditionError("bit depth must be 8 or 16");
  }
  bit_depth_ = depth;
}

void clamp_unit(Image& img) noexcept {
  for (double& v : img.pixels()) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace domino::imaging
