#include "domino/errors.hpp"
#include "domino/trainer.hpp"

namespace domino::trainer {

HaltingRule::HaltingRule(int patience) : patience_(patience) {
  if (patience < 1) throw PreconditionError("patience must be positive");
}

HaltingRule::Verdict HaltingRule::push(double q) {
  if (halted_) return {std::nullopt, false, true};
  q_.push_back(q);
  const int j = static_cast<int>(q_.size()) - 1 - kHalfWindow;
  if (j < kHalfWindow) return {};

  double sum = 0.0;
  for (int k = j - kHalfWindow; k <= j + kHalfWindow; ++k) sum += q_[k];
  const double s = sum / (2 * kHalfWindow + 1);
  s_.push_back(s);

  Verdict v;
  v.smoothed_index = j;
  if (!best_ || s < best_s_) {
    best_ = j;
    best_s_ = s;
    since_best_ = 0;
    v.new_best = true;
  } else if (++since_best_ >= patience_) {
    halted_ = true;
    v.halt = true;
  }
  return v;
}

}  // namespace domino::trainer
