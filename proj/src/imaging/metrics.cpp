#include "domino/metrics.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "domino/errors.hpp"

namespace domino::imaging {
namespace {

constexpr int kWindow = 11;
constexpr double kWindowSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

void require_same_shape(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw PreconditionError("image dimensions differ");
}

std::vector<double> gaussian_taps() {
  std::vector<double> taps(kWindow);
  double sum = 0.0;
  for (int k = 0; k < kWindow; ++k) {
    const double d = k - kWindow / 2;
    taps[k] = std::exp(-d * d / (2.0 * kWindowSigma * kWindowSigma));
    sum += taps[k];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Separable "valid" filtering: output is (h-10) x (w-10).
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& taps) {
  const int oh = h - kWindow + 1;
  const int ow = w - kWindow + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int i = 0; i < h; ++i) {
    const double* in = src.data() + static_cast<std::size_t>(i) * w;
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * in[j + k];
      rows[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int i = 0; i < oh; ++i) {
    for (int j = 0; j < ow; ++j) {
      double acc = 0.0;
      for (int k = 0; k < kWindow; ++k) acc += taps[k] * rows[static_cast<std::size_t>(i + k) * ow + j];
      out[static_cast<std::size_t>(i) * ow + j] = acc;
    }
  }
  return out;
}

}  // namespace

double mse(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double acc = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    const double d = pa[k] - pb[k];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

double psnr(const Image& a, const Image& b) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

double ssim(const Image& a, const Image& b) {
  require_same_shape(a, b);
  const int h = a.height();
  const int w = a.width();
  if (h < kWindow || w < kWindow) {
    throw PreconditionError("ssim needs both sides >= 11 pixels");
  }
  const auto taps = gaussian_taps();
  const std::size_t n = a.size();
  std::vector<double> x(a.pixels().begin(), a.pixels().end());
  std::vector<double> y(b.pixels().begin(), b.pixels().end());
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t k = 0; k < n; ++k) {
    xx[k] = x[k] * x[k];
    yy[k] = y[k] * y[k];
    xy[k] = x[k] * y[k];
  }
  const auto mu_x = filter_valid(x, h, w, taps);
  const auto mu_y = filter_valid(y, h, w, taps);
  const auto e_xx = filter_valid(xx, h, w, taps);
  const auto e_yy = filter_valid(yy, h, w, taps);
  const auto e_xy = filter_valid(xy, h, w, taps);

  double total = 0.0;
  for (std::size_t k = 0; k < mu_x.size(); ++k) {
    const double mx = mu_x[k];
    const double my = mu_y[k];
    const double var_x = e_xx[k] - mx * mx;
    const double var_y = e_yy[k] - my * my;
    const double cov = e_xy[k] - mx * my;
    total += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
             ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
  }
  return total / static_cast<double>(mu_x.size());
}

}  // namespace domino::imaging
