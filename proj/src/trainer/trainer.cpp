#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "domino/errors.hpp"
#include "domino/metrics.hpp"
#include "domino/trainer.hpp"

namespace domino::trainer {

using tiling::Parity;

// -------------------------------------------------------------- aggregate

Aggregator::Aggregator(int height, int width)
    : height_(height),
      width_(width),
      sum_(static_cast<std::size_t>(height) * width, 0.0),
      count_(static_cast<std::size_t>(height) * width, 0) {}

void Aggregator::push(std::span<const double> values, const Mask& visible) {
  if (values.size() != sum_.size() || visible.size() != sum_.size()) {
    throw PreconditionError("aggregator input has the wrong size");
  }
  const auto m = visible.data();
  for (std::size_t p = 0; p < sum_.size(); ++p) {
    if (m[p] == 1.0) {
      sum_[p] += values[p];
      ++count_[p];
    }
  }
}

void Aggregator::reset() {
  std::fill(sum_.begin(), sum_.end(), 0.0);
  std::fill(count_.begin(), count_.end(), 0);
}

std::size_t Aggregator::unresolved() const noexcept {
  return static_cast<std::size_t>(std::count(count_.begin(), count_.end(), 0));
}

std::vector<double> Aggregator::average() const {
  std::vector<double> out(sum_.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t p = 0; p < sum_.size(); ++p) {
    if (count_[p] > 0) out[p] = sum_[p] / static_cast<double>(count_[p]);
  }
  return out;
}

Image resolve(const Aggregator& agg, const Image& fallback, std::size_t* unresolved) {
  if (agg.height() != fallback.height() || agg.width() != fallback.width()) {
    throw PreconditionError("aggregator and fallback image shapes differ");
  }
  Image out = fallback;
  const auto avg = agg.average();
  std::size_t missing = 0;
  auto px = out.pixels();
  for (std::size_t p = 0; p < avg.size(); ++p) {
    if (std::isnan(avg[p])) {
      ++missing;
    } else {
      px[p] = std::clamp(avg[p], 0.0, 1.0);
    }
  }
  if (unresolved) *unresolved = missing;
  return out;
}

// ----------------------------------------------------------------- config

void DenoiseConfig::validate() const {
  if (epoch_len < 1 || patience < 1 || max_iterations < 1) {
    throw PreconditionError("epoch length, patience and iteration cap must be positive");
  }
  if (channels < 1 || depth < 1) throw PreconditionError("network width and depth must be positive");
  if (n2f_check_interval < 1) throw PreconditionError("check interval must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw PreconditionError("learning rate must be positive");
  }
  MaskPlan{mask_rate, leak_rate, seed}.validate();
}

tiling::FilledPair validation_pair(const Image& img, const DenoiseConfig& cfg) {
  switch (cfg.validation_fill) {
    case ValidationFill::domino:
      return tiling::pixel_domino_pair(img);
    case ValidationFill::avg_neighbor:
      return {tiling::fill_avg_neighbor(img, Parity::even), tiling::fill_avg_neighbor(img, Parity::odd)};
    case ValidationFill::random_neighbor: {
      const auto s = derive_seed(cfg.seed, Stream::random_fill);
      return {tiling::fill_random_neighbor(img, Parity::even, s),
              tiling::fill_random_neighbor(img, Parity::odd, s + 1)};
    }
    case ValidationFill::best_neighbor:
      return {tiling::fill_best_neighbor(img, Parity::even), tiling::fill_best_neighbor(img, Parity::odd)};
  }
  throw PreconditionError("unknown validation fill");
}

namespace {

Tensor as_tensor(const Image& img) {
  const auto px = img.pixels();
  return Tensor({1, img.height(), img.width()}, std::vector<double>(px.begin(), px.end()));
}

void require_finite(double v, const char* what, long iteration) {
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + what + " at iteration " + std::to_string(iteration));
  }
}

}  // namespace

// ------------------------------------------------------------ semi-blind

SemiBlindTrainer::SemiBlindTrainer(const Image& noisy, const DenoiseConfig& cfg)
    : cfg_(cfg),
      plan_{cfg.mask_rate, cfg.leak_rate, cfg.seed},
      input_(as_tensor(noisy)),
      net_(nnet::init_network(cfg.seed, {cfg.depth, cfg.channels})),
      adam_(nnet::AdamState::for_parameters(net_.parameter_count(), cfg.learning_rate)),
      cumulative_(noisy.height(), noisy.width()),
      val_even_(noisy.height(), noisy.width()),
      val_odd_(noisy.height(), noisy.width()) {
  cfg_.validate();
}

double SemiBlindTrainer::train_step(const MaskPair& masks) {
  const Tensor out = nnet::forward(net_, input_, masks.input_mask, cache_);
  const auto loss = nnet::bce_loss_and_grad(out, input_, masks.loss_mask);
  require_finite(loss.loss, "training loss", adam_.step);
  grad_ = nnet::backward(net_, cache_, loss.grad_logits);
  for (double g : grad_) require_finite(g, "gradient", adam_.step);
  nnet::adam_step(net_.parameters(), grad_, adam_);
  cumulative_.push(out.data(), masks.input_mask);
  return loss.loss;
}

Parity SemiBlindTrainer::validation_step(const tiling::FilledPair& pair, std::uint64_t iteration) {
  auto coin = make_engine(cfg_.seed, Stream::validation_parity, iteration);
  const Parity parity = (coin() >> 63) == 0 ? Parity::even : Parity::odd;
  const Image& src = parity == Parity::even ? pair.even : pair.odd;
  const MaskPair masks = sample_masks(src.height(), src.width(), plan_, iteration, Stream::validation_masks);
  const Tensor out = nnet::forward(net_, as_tensor(src), masks.input_mask, cache_);
  (parity == Parity::even ? val_even_ : val_odd_).push(out.data(), masks.input_mask);
  return parity;
}

std::optional<double> SemiBlindTrainer::epoch_close(const tiling::FilledPair& pair) {
  // The network fed one parity's filled image is scored against the other
  // parity's filled image.
  auto errors = [](const Aggregator& agg, const Image& target) {
    auto e = agg.average();
    const auto t = target.pixels();
    for (std::size_t p = 0; p < e.size(); ++p) e[p] = (e[p] - t[p]) * (e[p] - t[p]);
    return e;
  };
  std::vector<double> err_even = errors(val_even_, pair.odd);
  std::vector<double> err_odd = errors(val_odd_, pair.even);
  val_even_.reset();
  val_odd_.reset();

  std::optional<double> q;
  if (have_prev_) {
    std::size_t compared = 0;
    std::size_t increased = 0;
    auto tally = [&](const std::vector<double>& cur, const std::vector<double>& prev) {
      for (std::size_t p = 0; p < cur.size(); ++p) {
        if (std::isnan(cur[p]) || std::isnan(prev[p])) continue;
        ++compared;
        if (cur[p] > prev[p]) ++increased;
      }
    };
    tally(err_even, prev_err_even_);
    tally(err_odd, prev_err_odd_);
    // Nothing comparable carries no evidence of improvement.
    q = compared == 0 ? 1.0 : static_cast<double>(increased) / static_cast<double>(compared);
  }
  prev_err_even_ = std::move(err_even);
  prev_err_odd_ = std::move(err_odd);
  have_prev_ = true;
  return q;
}

// ------------------------------------------------------------------- runs

DenoiseResult denoise(const Image& noisy, const DenoiseConfig& cfg) {
  cfg.validate();
  if (cfg.mode != Mode::domino_denoise) throw PreconditionError("denoise expects mode dd");
  const tiling::FilledPair pair = validation_pair(noisy, cfg);
  SemiBlindTrainer trainer(noisy, cfg);
  HaltingRule rule(cfg.patience);

  // q starts at the second epoch, so q index k belongs to epoch k + 2.
  constexpr int kFirstQEpoch = 2;
  struct Snapshot {
    int epoch;
    Aggregator agg;
  };
  std::deque<Snapshot> ring;
  const std::size_t ring_cap = static_cast<std::size_t>(cfg.patience) + 8;
  std::optional<Snapshot> best;

  RunReport report;
  report.mode = cfg.mode;
  long it = 0;
  int epoch = 0;
  while (it < cfg.max_iterations) {
    const MaskPair masks = sample_masks(noisy.height(), noisy.width(), trainer.plan(),
                                        static_cast<std::uint64_t>(it));
    trainer.train_step(masks);
    trainer.validation_step(pair, static_cast<std::uint64_t>(it));
    ++it;
    if (it % cfg.epoch_len != 0) continue;

    ++epoch;
    ring.push_back({epoch, trainer.cumulative()});
    if (ring.size() > ring_cap) ring.pop_front();
    const auto q = trainer.epoch_close(pair);
    if (!q) continue;
    const auto verdict = rule.push(*q);
    if (verdict.new_best) {
      const int want = *rule.best_index() + kFirstQEpoch;
      const auto hit = std::find_if(ring.begin(), ring.end(), [&](const Snapshot& s) { return s.epoch == want; });
      if (hit == ring.end()) throw std::logic_error("best snapshot fell out of the ring buffer");
      best = *hit;
    }
    if (verdict.halt) {
      report.halting_epoch = epoch;
      break;
    }
  }

  report.iterations = it;
  report.epochs = epoch;
  report.q = rule.q();
  report.s = rule.s();
  if (best) report.best_epoch = best->epoch;
  const Aggregator& chosen = best ? best->agg : trainer.cumulative();
  Image out = resolve(chosen, noisy, &report.unresolved_pixels);
  out.set_bit_depth(noisy.bit_depth());
  report.psnr_vs_input = imaging::psnr(out, noisy);
  return {std::move(out), std::move(report), trainer.network()};
}

DenoiseResult n2f_domino_denoise(const Image& noisy, const DenoiseConfig& cfg) {
  cfg.validate();
  if (cfg.mode != Mode::n2f_domino) throw PreconditionError("n2f_domino_denoise expects mode n2f-domino");
  const tiling::FilledPair pair = validation_pair(noisy, cfg);
  const Tensor even = as_tensor(pair.even);
  const Tensor odd = as_tensor(pair.odd);
  const Tensor original = as_tensor(noisy);
  const int h = noisy.height();
  const int w = noisy.width();
  const Mask all(h, w, 1.0);

  nnet::Network net = nnet::init_network(cfg.seed, {cfg.depth, cfg.channels});
  auto adam = nnet::AdamState::for_parameters(net.parameter_count(), cfg.learning_rate);
  nnet::ForwardCache cache;

  RunReport report;
  report.mode = cfg.mode;
  std::optional<Tensor> best_out;
  double best_mse = std::numeric_limits<double>::infinity();
  int checks = 0;
  int since_best = 0;
  long it = 0;
  while (it < cfg.max_iterations) {
    const bool forward_even = it % 2 == 0;
    const Tensor& src = forward_even ? even : odd;
    const Tensor& target = forward_even ? odd : even;
    const Tensor out = nnet::forward(net, src, all, cache);
    const auto loss = nnet::bce_loss_and_grad(out, target, all);
    require_finite(loss.loss, "training loss", it);
    const auto grad = nnet::backward(net, cache, loss.grad_logits);
    for (double g : grad) require_finite(g, "gradient", it);
    nnet::adam_step(net.parameters(), grad, adam);
    ++it;
    if (it % cfg.n2f_check_interval != 0) continue;

    ++checks;
    Tensor y = nnet::forward(net, original, all, cache);
    double err = 0.0;
    for (std::size_t p = 0; p < y.data().size(); ++p) {
      const double d = y.data()[p] - original.data()[p];
      err += d * d;
    }
    err /= static_cast<double>(y.data().size());
    require_finite(err, "validation error", it);
    report.validation_mse.push_back(err);
    if (err < best_mse) {
      best_mse = err;
      best_out = std::move(y);
      report.best_epoch = checks;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      report.halting_epoch = checks;
      break;
    }
  }
  if (!best_out) best_out = nnet::forward(net, original, all, cache);

  report.iterations = it;
  report.epochs = checks;
  const auto values = best_out->data();
  Image out(h, w, std::vector<double>(values.begin(), values.end()), noisy.bit_depth());
  clamp_unit(out);
  report.psnr_vs_input = imaging::psnr(out, noisy);
  return {std::move(out), std::move(report), std::move(net)};
}

DenoiseResult run(const Image& noisy, const DenoiseConfig& cfg) {
  return cfg.mode == Mode::n2f_domino ? n2f_domino_denoise(noisy, cfg) : denoise(noisy, cfg);
}

}  // namespace domino::trainer
