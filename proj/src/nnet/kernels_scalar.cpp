#include "domino/kernels.hpp"
#include "kernels_impl.hpp"

namespace domino::nnet::kernels {
namespace detail {

void conv3x3_scalar(const double* in_pad, int in_ch, int h, int w, const double* weights,
                    int out_ch, double* out) {
  const int pw = w + 2;
  const std::size_t plane_in = static_cast<std::size_t>(h + 2) * pw;
  const std::size_t plane_out = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < out_ch; ++co) {
    double* o = out + co * plane_out;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int ci = 0; ci < in_ch; ++ci) {
          const double* wk = weights + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
          const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
          for (int ky = 0; ky < 3; ++ky) {
            for (int kx = 0; kx < 3; ++kx) acc += wk[ky * 3 + kx] * base[ky * pw + kx];
          }
        }
        o[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
  }
}

void conv3x3_weight_grad_scalar(const double* in_pad, int in_ch, const double* grad_out,
                                int out_ch, int h, int w, double* weight_grad) {
  const int pw = w + 2;
  const std::size_t plane_in = static_cast<std::size_t>(h + 2) * pw;
  const std::size_t plane_out = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < out_ch; ++co) {
    const double* g = grad_out + co * plane_out;
    for (int ci = 0; ci < in_ch; ++ci) {
      double* dw = weight_grad + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
      const double* base = in_pad + ci * plane_in;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          double acc = 0.0;
          for (int y = 0; y < h; ++y) {
            const double* gr = g + static_cast<std::size_t>(y) * w;
            const double* ir = base + static_cast<std::size_t>(y + ky) * pw + kx;
            for (int x = 0; x < w; ++x) acc += gr[x] * ir[x];
          }
          dw[ky * 3 + kx] += acc;
        }
      }
    }
  }
}

}  // namespace detail

const KernelTable& scalar() {
  static const KernelTable table{"scalar", detail::conv3x3_scalar, detail::conv3x3_weight_grad_scalar};
  return table;
}

}  // namespace domino::nnet::kernels
