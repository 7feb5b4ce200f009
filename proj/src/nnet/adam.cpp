#include "domino/adam.hpp"

#include <cmath>

#include "domino/errors.hpp"

namespace domino::nnet {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& s) {
  if (params.size() != grads.size() || s.m.size() != params.size() || s.v.size() != params.size()) {
    throw PreconditionError("adam: parameter, gradient and moment sizes differ");
  }
  ++s.step;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    s.m[k] = s.beta1 * s.m[k] + (1.0 - s.beta1) * g;
    s.v[k] = s.beta2 * s.v[k] + (1.0 - s.beta2) * g * g;
    const double m_hat = s.m[k] / c1;
    const double v_hat = s.v[k] / c2;
    params[k] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace domino::nnet
