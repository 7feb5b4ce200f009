// Compiled with -mavx2 -mfma; only reached through kernels::avx2() after a
// runtime CPU check.
#include <immintrin.h>

#include <vector>

#include "kernels_impl.hpp"

namespace domino::nnet::kernels::detail {
namespace {

constexpr int kCoBlock = 4;

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Four output channels, twelve output columns per step.
void conv_block4(const double* in_pad, int in_ch, int h, int w, const double* packed,
                 double* const* outs) {
  const int pw = w + 2;
  const std::size_t plane_in = static_cast<std::size_t>(h + 2) * pw;
  for (int y = 0; y < h; ++y) {
    const std::size_t orow = static_cast<std::size_t>(y) * w;
    int x = 0;
    for (; x + 12 <= w; x += 12) {
      __m256d a00 = _mm256_setzero_pd(), a01 = _mm256_setzero_pd(), a02 = _mm256_setzero_pd();
      __m256d a10 = _mm256_setzero_pd(), a11 = _mm256_setzero_pd(), a12 = _mm256_setzero_pd();
      __m256d a20 = _mm256_setzero_pd(), a21 = _mm256_setzero_pd(), a22 = _mm256_setzero_pd();
      __m256d a30 = _mm256_setzero_pd(), a31 = _mm256_setzero_pd(), a32 = _mm256_setzero_pd();
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
        const double* wp = packed + static_cast<std::size_t>(ci) * 9 * kCoBlock;
        for (int ky = 0; ky < 3; ++ky) {
          const double* r = base + ky * pw;
          for (int kx = 0; kx < 3; ++kx) {
            const __m256d v0 = _mm256_loadu_pd(r + kx);
            const __m256d v1 = _mm256_loadu_pd(r + kx + 4);
            const __m256d v2 = _mm256_loadu_pd(r + kx + 8);
            const double* wk = wp + (ky * 3 + kx) * kCoBlock;
            __m256d wv = _mm256_broadcast_sd(wk + 0);
            a00 = _mm256_fmadd_pd(wv, v0, a00);
            a01 = _mm256_fmadd_pd(wv, v1, a01);
            a02 = _mm256_fmadd_pd(wv, v2, a02);
            wv = _mm256_broadcast_sd(wk + 1);
            a10 = _mm256_fmadd_pd(wv, v0, a10);
            a11 = _mm256_fmadd_pd(wv, v1, a11);
            a12 = _mm256_fmadd_pd(wv, v2, a12);
            wv = _mm256_broadcast_sd(wk + 2);
            a20 = _mm256_fmadd_pd(wv, v0, a20);
            a21 = _mm256_fmadd_pd(wv, v1, a21);
            a22 = _mm256_fmadd_pd(wv, v2, a22);
            wv = _mm256_broadcast_sd(wk + 3);
            a30 = _mm256_fmadd_pd(wv, v0, a30);
            a31 = _mm256_fmadd_pd(wv, v1, a31);
            a32 = _mm256_fmadd_pd(wv, v2, a32);
          }
        }
      }
      double* o = outs[0] + orow + x;
      _mm256_storeu_pd(o, a00), _mm256_storeu_pd(o + 4, a01), _mm256_storeu_pd(o + 8, a02);
      o = outs[1] + orow + x;
      _mm256_storeu_pd(o, a10), _mm256_storeu_pd(o + 4, a11), _mm256_storeu_pd(o + 8, a12);
      o = outs[2] + orow + x;
      _mm256_storeu_pd(o, a20), _mm256_storeu_pd(o + 4, a21), _mm256_storeu_pd(o + 8, a22);
      o = outs[3] + orow + x;
      _mm256_storeu_pd(o, a30), _mm256_storeu_pd(o + 4, a31), _mm256_storeu_pd(o + 8, a32);
    }
    for (; x + 4 <= w; x += 4) {
      __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
      __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
        const double* wp = packed + static_cast<std::size_t>(ci) * 9 * kCoBlock;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const __m256d v = _mm256_loadu_pd(base + ky * pw + kx);
            const double* wk = wp + (ky * 3 + kx) * kCoBlock;
            a0 = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + 0), v, a0);
            a1 = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + 1), v, a1);
            a2 = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + 2), v, a2);
            a3 = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + 3), v, a3);
          }
        }
      }
      _mm256_storeu_pd(outs[0] + orow + x, a0);
      _mm256_storeu_pd(outs[1] + orow + x, a1);
      _mm256_storeu_pd(outs[2] + orow + x, a2);
      _mm256_storeu_pd(outs[3] + orow + x, a3);
    }
    for (; x < w; ++x) {
      double acc[kCoBlock] = {0.0, 0.0, 0.0, 0.0};
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
        const double* wp = packed + static_cast<std::size_t>(ci) * 9 * kCoBlock;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            const double v = base[ky * pw + kx];
            const double* wk = wp + (ky * 3 + kx) * kCoBlock;
            for (int c = 0; c < kCoBlock; ++c) acc[c] += wk[c] * v;
          }
        }
      }
      for (int c = 0; c < kCoBlock; ++c) outs[c][orow + x] = acc[c];
    }
  }
}

// One output channel, four columns per step.
void conv_single(const double* in_pad, int in_ch, int h, int w, const double* wco, double* out) {
  const int pw = w + 2;
  const std::size_t plane_in = static_cast<std::size_t>(h + 2) * pw;
  for (int y = 0; y < h; ++y) {
    const std::size_t orow = static_cast<std::size_t>(y) * w;
    int x = 0;
    for (; x + 4 <= w; x += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
        const double* wk = wco + static_cast<std::size_t>(ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) {
            acc = _mm256_fmadd_pd(_mm256_broadcast_sd(wk + ky * 3 + kx),
                                  _mm256_loadu_pd(base + ky * pw + kx), acc);
          }
        }
      }
      _mm256_storeu_pd(out + orow + x, acc);
    }
    for (; x < w; ++x) {
      double acc = 0.0;
      for (int ci = 0; ci < in_ch; ++ci) {
        const double* base = in_pad + ci * plane_in + static_cast<std::size_t>(y) * pw + x;
        const double* wk = wco + static_cast<std::size_t>(ci) * 9;
        for (int ky = 0; ky < 3; ++ky) {
          for (int kx = 0; kx < 3; ++kx) acc += wk[ky * 3 + kx] * base[ky * pw + kx];
        }
      }
      out[orow + x] = acc;
    }
  }
}

}  // namespace

void conv3x3_avx2(const double* in_pad, int in_ch, int h, int w, const double* weights,
                  int out_ch, double* out) {
  const std::size_t plane_out = static_cast<std::size_t>(h) * w;
  std::vector<double> packed(static_cast<std::size_t>(in_ch) * 9 * kCoBlock);
  int co = 0;
  for (; co + kCoBlock <= out_ch; co += kCoBlock) {
    // packed[ci][k][c] = weights[co + c][ci][k]
    for (int ci = 0; ci < in_ch; ++ci) {
      for (int k = 0; k < 9; ++k) {
        for (int c = 0; c < kCoBlock; ++c) {
          packed[(static_cast<std::size_t>(ci) * 9 + k) * kCoBlock + c] =
              weights[(static_cast<std::size_t>(co + c) * in_ch + ci) * 9 + k];
        }
      }
    }
    double* outs[kCoBlock];
    for (int c = 0; c < kCoBlock; ++c) outs[c] = out + (co + c) * plane_out;
    conv_block4(in_pad, in_ch, h, w, packed.data(), outs);
  }
  for (; co < out_ch; ++co) {
    conv_single(in_pad, in_ch, h, w, weights + static_cast<std::size_t>(co) * in_ch * 9,
                out + co * plane_out);
  }
}

void conv3x3_weight_grad_avx2(const double* in_pad, int in_ch, const double* grad_out,
                              int out_ch, int h, int w, double* weight_grad) {
  const int pw = w + 2;
  const std::size_t plane_in = static_cast<std::size_t>(h + 2) * pw;
  const std::size_t plane_out = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < out_ch; ++co) {
    const double* g = grad_out + co * plane_out;
    for (int ci = 0; ci < in_ch; ++ci) {
      const double* base = in_pad + ci * plane_in;
      __m256d acc[9];
      for (auto& a : acc) a = _mm256_setzero_pd();
      double tail[9] = {};
      for (int y = 0; y < h; ++y) {
        const double* gr = g + static_cast<std::size_t>(y) * w;
        const double* r0 = base + static_cast<std::size_t>(y) * pw;
        const double* r1 = r0 + pw;
        const double* r2 = r1 + pw;
        int x = 0;
        for (; x + 4 <= w; x += 4) {
          const __m256d gv = _mm256_loadu_pd(gr + x);
          acc[0] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r0 + x), acc[0]);
          acc[1] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r0 + x + 1), acc[1]);
          acc[2] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r0 + x + 2), acc[2]);
          acc[3] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r1 + x), acc[3]);
          acc[4] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r1 + x + 1), acc[4]);
          acc[5] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r1 + x + 2), acc[5]);
          acc[6] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r2 + x), acc[6]);
          acc[7] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r2 + x + 1), acc[7]);
          acc[8] = _mm256_fmadd_pd(gv, _mm256_loadu_pd(r2 + x + 2), acc[8]);
        }
        for (; x < w; ++x) {
          const double gx = gr[x];
          for (int k = 0; k < 9; ++k) tail[k] += gx * base[static_cast<std::size_t>(y + k / 3) * pw + x + k % 3];
        }
      }
      double* dw = weight_grad + (static_cast<std::size_t>(co) * in_ch + ci) * 9;
      for (int k = 0; k < 9; ++k) dw[k] += hsum(acc[k]) + tail[k];
    }
  }
}

}  // namespace domino::nnet::kernels::detail
