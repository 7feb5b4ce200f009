#pragma once

#include <cstdint>

#include "domino/image.hpp"

namespace domino::imaging {

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::gaussian;
  double sigma = 0.0;  // on the 0-255 scale
  double peak = 0.0;   // Poisson event-rate scale
  std::uint64_t seed = 0;

  static NoiseSpec gaussian(double sigma, std::uint64_t seed) {
    return {NoiseKind::gaussian, sigma, 0.0, seed};
  }
  static NoiseSpec poisson(double peak, std::uint64_t seed) {
    return {NoiseKind::poisson, 0.0, peak, seed};
  }
};

// clamp(img + N(0, sigma/255), 0, 1), deterministic per seed.
Image add_gaussian_noise(const Image& img, const NoiseSpec& spec);

// clamp(Poisson(img * peak) / peak, 0, 1), deterministic per seed.
Image add_poisson_noise(const Image& img, const NoiseSpec& spec);

// Dispatches on spec.kind.
Image add_noise(const Image& img, const NoiseSpec& spec);

}  // namespace domino::imaging
