#pragma once

#include "domino/image.hpp"

namespace domino::imaging {

double mse(const Image& a, const Image& b);

// Peak signal-to-noise ratio in dB with a peak of 1.0; +inf for identical
// images.
double psnr(const Image& a, const Image& b);

// Mean structural similarity over all fully-contained 11x11 Gaussian windows
// (sigma 1.5, K1 = 0.01, K2 = 0.03, data range 1). Both sides must be >= 11.
double ssim(const Image& a, const Image& b);

}  // namespace domino::imaging
