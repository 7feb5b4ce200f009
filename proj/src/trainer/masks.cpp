#include <cmath>
#include <numeric>

#include "domino/errors.hpp"
#include "domino/trainer.hpp"

namespace domino::trainer {

void MaskPlan::validate() const {
  if (!(mask_rate > 0.0 && mask_rate < 1.0)) throw PreconditionError("mask rate must lie in (0, 1)");
  if (!(leak_rate >= 0.0 && leak_rate < 1.0)) throw PreconditionError("leak rate must lie in [0, 1)");
}

std::size_t subset_size(std::size_t n, double rate) noexcept {
  return static_cast<std::size_t>(std::floor(rate * static_cast<double>(n) + 1e-9));
}

MaskPair sample_masks(int height, int width, const MaskPlan& plan, std::uint64_t iteration,
                      Stream stream) {
  plan.validate();
  const std::size_t n = static_cast<std::size_t>(height) * width;
  MaskPair out{Mask(height, width, 1.0), Mask(height, width, 0.0)};
  auto engine = make_engine(plan.seed, stream, iteration);

  // Partial Fisher-Yates: the first `hidden` slots become P, the next `leak`
  // slots (drawn from the remaining visible pixels) become P0.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t hidden = subset_size(n, plan.mask_rate);
  const std::size_t leak = subset_size(n - hidden, plan.leak_rate);
  for (std::size_t k = 0; k < hidden + leak; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, n - 1);
    std::swap(order[k], order[pick(engine)]);
  }
  auto in = out.input_mask.data();
  auto loss = out.loss_mask.data();
  for (std::size_t k = 0; k < hidden; ++k) {
    in[order[k]] = 0.0;
    loss[order[k]] = 1.0;
  }
  for (std::size_t k = hidden; k < hidden + leak; ++k) loss[order[k]] = 1.0;
  return out;
}

}  // namespace domino::trainer
