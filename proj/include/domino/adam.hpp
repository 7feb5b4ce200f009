#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace domino::nnet {

struct AdamState {
  long step = 0;
  std::vector<double> m;
  std::vector<double> v;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_parameters(std::size_t count, double lr = 1e-4) {
    AdamState s;
    s.m.assign(count, 0.0);
    s.v.assign(count, 0.0);
    s.lr = lr;
    return s;
  }
};

// Bias-corrected Adam update in place; increments state.step.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

}  // namespace domino::nnet
