#pragma once

#include <string_view>

namespace domino::nnet::kernels {

// Inner loops of the 3x3 convolutions. Inputs are zero-padded planes of
// (h + 2) x (w + 2) doubles per channel; outputs are unpadded h x w planes.
// Weights are laid out [out_ch][in_ch][3][3].

// out[co] = sum_ci sum_k weights[co][ci][k] * in[ci] shifted by k. Overwrites out.
using Conv3x3Fn = void (*)(const double* in_pad, int in_ch, int h, int w, const double* weights,
                           int out_ch, double* out);

// weight_grad[co][ci][k] += sum_p grad_out[co][p] * in[ci][p + k].
using Conv3x3WeightGradFn = void (*)(const double* in_pad, int in_ch, const double* grad_out,
                                     int out_ch, int h, int w, double* weight_grad);

struct KernelTable {
  std::string_view name;
  Conv3x3Fn conv3x3;
  Conv3x3WeightGradFn conv3x3_weight_grad;
};

// Portable reference loops.
const KernelTable& scalar();

// AVX2 + FMA loops, or nullptr when not built in or unsupported by this CPU.
const KernelTable* avx2();

// The table used by the network: the fastest available variant, unless the
// DOMINO_KERNELS environment variable is set to "scalar". Resolved once.
const KernelTable& active();

}  // namespace domino::nnet::kernels
