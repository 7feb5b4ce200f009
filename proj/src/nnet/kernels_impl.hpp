#pragma once

#include <cstddef>

namespace domino::nnet::kernels::detail {

void conv3x3_scalar(const double* in_pad, int in_ch, int h, int w, const double* weights,
                    int out_ch, double* out);
void conv3x3_weight_grad_scalar(const double* in_pad, int in_ch, const double* grad_out,
                                int out_ch, int h, int w, double* weight_grad);

#if defined(DOMINO_HAVE_AVX2)
void conv3x3_avx2(const double* in_pad, int in_ch, int h, int w, const double* weights,
                  int out_ch, double* out);
void conv3x3_weight_grad_avx2(const double* in_pad, int in_ch, const double* grad_out,
                              int out_ch, int h, int w, double* weight_grad);
#endif

}  // namespace domino::nnet::kernels::detail
