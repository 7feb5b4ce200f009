#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace domino::imaging {

// Row-major grayscale image with intensities normalized to [0,1].
//
// The [0,1] range is established by the loader and the noise generators;
// direct element writes are not range-checked.
class Image {
 public:
  Image() = default;
  Image(int height, int width, double fill = 0.0, int bit_depth = 8);
  Image(int height, int width, std::vector<double> data, int bit_depth = 8);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  // Bit depth of the file this image came from (8 or 16); used on save.
  int bit_depth() const noexcept { return bit_depth_; }
  void set_bit_depth(int depth);

  double& operator()(int i, int j) noexcept {
    return data_[static_cast<std::size_t>(i) * width_ + j];
  }
  double operator()(int i, int j) const noexcept {
    return data_[static_cast<std::size_t>(i) * width_ + j];
  }

  std::span<double> pixels() noexcept { return data_; }
  std::span<const double> pixels() const noexcept { return data_; }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Image& a, const Image& b) noexcept {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.data_ == b.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int bit_depth_ = 8;
  std::vector<double> data_;
};

// Clamp every pixel into [0,1].
void clamp_unit(Image& img) noexcept;

// Reads an 8- or 16-bit single-channel PNG or binary PGM (P5). Intensities are
// divided by the full range of the sample type (255 or 65535).
Image load_image(const std::filesystem::path& path);

// Writes PNG or PGM depending on the extension, at img.bit_depth(). The file
// is written to a sibling temporary and renamed into place.
void save_image(const Image& img, const std::filesystem::path& path);

// Writes bytes to a sibling temporary and renames it over `path`, so readers
// never observe a partial file.
void write_file_atomically(const std::filesystem::path& path, std::string_view bytes);

}  // namespace domino::imaging
