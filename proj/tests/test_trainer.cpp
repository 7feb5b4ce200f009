#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "domino/errors.hpp"
#include "domino/noise.hpp"
#include "domino/trainer.hpp"
#include "reference_net.hpp"
#include "support.hpp"

using namespace domino;
using namespace domino::trainer;
using tiling::Parity;

namespace {

DenoiseConfig tiny_config(std::uint64_t seed = 3) {
  DenoiseConfig cfg;
  cfg.depth = 3;
  cfg.channels = 4;
  cfg.epoch_len = 4;
  cfg.patience = 2;
  cfg.max_iterations = 400;
  cfg.n2f_check_interval = 4;
  cfg.learning_rate = 1e-3;
  cfg.seed = seed;
  return cfg;
}

Image noisy_test_image(int h = 16, int w = 16) {
  return imaging::add_noise(testing::piecewise_constant(1, h, w, 4), imaging::NoiseSpec::gaussian(25, 2));
}

std::size_t count_both(const Mask& a, const Mask& b) {
  std::size_t n = 0;
  for (std::size_t p = 0; p < a.size(); ++p) n += a.data()[p] == 1.0 && b.data()[p] == 1.0;
  return n;
}

}  // namespace

// ------------------------------------------------------------------ masks

TEST_CASE("mask budgets follow floor arithmetic") {
  CHECK(subset_size(1000, 0.2) == 200);
  CHECK(subset_size(800, 0.001) == 0);
  CHECK(subset_size(10000, 0.2) == 2000);
  CHECK(subset_size(8000, 0.001) == 8);
  const MaskPlan plan{0.2, 0.001, 9};
  for (auto [h, w, hidden, leak] : {std::tuple{25, 40, 200, 0}, {100, 100, 2000, 8}}) {
    for (std::uint64_t it = 0; it < 5; ++it) {
      const MaskPair m = sample_masks(h, w, plan, it);
      const std::size_t n = static_cast<std::size_t>(h) * w;
      CHECK(n - m.input_mask.count() == static_cast<std::size_t>(hidden));
      CHECK(m.loss_mask.count() == static_cast<std::size_t>(hidden + leak));
      // Loss positions the network can see are exactly the leak set.
      CHECK(count_both(m.loss_mask, m.input_mask) == static_cast<std::size_t>(leak));
      for (std::size_t p = 0; p < n; ++p)
        if (m.input_mask.data()[p] == 0.0) REQUIRE(m.loss_mask.data()[p] == 1.0);
    }
  }
}

TEST_CASE("mask sampling is deterministic per seed, iteration and stream") {
  const MaskPlan plan{0.2, 0.001, 4};
  CHECK(sample_masks(20, 20, plan, 7).input_mask == sample_masks(20, 20, plan, 7).input_mask);
  CHECK_FALSE(sample_masks(20, 20, plan, 7).input_mask == sample_masks(20, 20, plan, 8).input_mask);
  CHECK_FALSE(sample_masks(20, 20, plan, 7).input_mask ==
              sample_masks(20, 20, plan, 7, Stream::validation_masks).input_mask);
  CHECK_FALSE(sample_masks(20, 20, plan, 7).input_mask ==
              sample_masks(20, 20, MaskPlan{0.2, 0.001, 5}, 7).input_mask);
  CHECK_THROWS_AS(sample_masks(4, 4, MaskPlan{1.0, 0.0, 0}, 0), PreconditionError);
  CHECK_THROWS_AS(sample_masks(4, 4, MaskPlan{0.2, -0.1, 0}, 0), PreconditionError);
}

TEST_CASE("every pixel is hidden at the mask rate") {
  const MaskPlan plan{0.2, 0.0, 1};
  const int iters = 2000;
  std::vector<int> hidden(100, 0);
  for (int it = 0; it < iters; ++it) {
    const MaskPair m = sample_masks(10, 10, plan, it);
    for (int p = 0; p < 100; ++p) hidden[p] += m.input_mask.data()[p] == 0.0;
  }
  const double mean = 0.2 * iters, sd = std::sqrt(iters * 0.2 * 0.8);
  for (int h : hidden) CHECK(std::abs(h - mean) < 5 * sd);
}

// -------------------------------------------------------------- aggregate

TEST_CASE("aggregator averages visible pushes only") {
  Aggregator agg(1, 3);
  agg.push(std::vector<double>{1, 2, 3}, Mask(1, 3, std::vector<double>{1, 0, 1}));
  agg.push(std::vector<double>{3, 5, 5}, Mask(1, 3, std::vector<double>{1, 0, 0}));
  const auto avg = agg.average();
  CHECK(avg[0] == 2.0);
  CHECK(std::isnan(avg[1]));
  CHECK(avg[2] == 3.0);
  CHECK(agg.count(0) == 2);
  CHECK(agg.unresolved() == 1);
  const Image out = resolve(agg, Image(1, 3, 0.25));
  CHECK(out == Image(1, 3, std::vector<double>{1.0, 0.25, 1.0}));
  agg.reset();
  CHECK(agg.unresolved() == 3);
  CHECK_THROWS_AS(agg.push(std::vector<double>(2), Mask(1, 3)), PreconditionError);
}

// ---------------------------------------------------------------- halting

TEST_CASE("halting on a constant sequence") {
  const int patience = 4;
  HaltingRule rule(patience);
  int pushes = 0;
  while (!rule.halted()) {
    const auto v = rule.push(0.5);
    ++pushes;
    if (pushes < 15) CHECK_FALSE(v.smoothed_index.has_value());
    if (pushes == 15) CHECK(v.new_best);
  }
  // First smoothed value at the 15th q; then `patience` values without a new minimum.
  CHECK(pushes == 15 + patience);
  CHECK(rule.best_index() == 7);
  CHECK(rule.s().size() == static_cast<std::size_t>(patience + 1));
}

TEST_CASE("halting on a rising sequence picks the first smoothed epoch") {
  const int patience = 3;
  HaltingRule rule(patience);
  std::vector<double> q{0.4, 0.4, 0.4, 0.45};
  for (int k = 0; k < 40; ++k) q.push_back(0.5 + 0.01 * k);
  int pushes = 0;
  for (double v : q) {
    ++pushes;
    if (rule.push(v).halt) break;
  }
  CHECK(rule.halted());
  CHECK(rule.best_index() == 7);
  CHECK(pushes == 15 + patience);
}

TEST_CASE("halting after a dip returns the dip") {
  // s_j = 0.3 + 0.01 * mean(|k - 20|, k = j-7..j+7) is smallest at j = 20.
  const int patience = 5;
  HaltingRule rule(patience);
  int pushes = 0;
  for (int k = 0; k < 100 && !rule.halted(); ++k) {
    rule.push(0.3 + 0.01 * std::abs(k - 20));
    ++pushes;
  }
  CHECK(rule.best_index() == 20);
  CHECK(pushes == 20 + 7 + patience + 1);
  for (std::size_t j = 0; j < rule.s().size(); ++j) {
    double sum = 0;
    for (int k = static_cast<int>(j); k <= static_cast<int>(j) + 14; ++k) sum += 0.3 + 0.01 * std::abs(k - 20);
    CHECK(rule.s()[j] == doctest::Approx(sum / 15).epsilon(1e-14));
  }
  CHECK_THROWS_AS(HaltingRule(0), PreconditionError);
}

// ------------------------------------------------------------------ steps

TEST_CASE("train_step feeds the aggregator at visible pixels and is deterministic") {
  const Image img = noisy_test_image();
  const DenoiseConfig cfg = tiny_config();
  SemiBlindTrainer a(img, cfg), b(img, cfg);
  std::vector<long> before(img.size(), 0);
  for (std::uint64_t it = 0; it < 5; ++it) {
    const MaskPair m = sample_masks(16, 16, a.plan(), it);
    const double la = a.train_step(m);
    CHECK(std::isfinite(la));
    CHECK(la == b.train_step(m));
    for (std::size_t p = 0; p < img.size(); ++p) {
      const long now = a.cumulative().count(p);
      CHECK(now - before[p] == (m.input_mask.data()[p] == 1.0 ? 1 : 0));
      before[p] = now;
    }
  }
  CHECK(a.network() == b.network());
}

TEST_CASE("hidden pixels cannot influence the output and off-mask targets give no gradient") {
  std::mt19937_64 rng(31);
  const nnet::Network net = testing::random_network(rng, 3, 4);
  const MaskPair m = sample_masks(100, 100, MaskPlan{0.2, 0.001, 6}, 0);
  Tensor x = testing::random_tensor(rng, 1, 100, 100);
  Tensor x_changed = x;
  Tensor target_changed = x;
  for (std::size_t p = 0; p < x.data().size(); ++p) {
    if (m.input_mask.data()[p] == 0.0) x_changed.data()[p] = 1.0 - x.data()[p];
    if (m.loss_mask.data()[p] == 0.0) target_changed.data()[p] = 1.0 - x.data()[p];
  }
  nnet::ForwardCache cache;
  const Tensor out = nnet::forward(net, x, m.input_mask, cache);
  CHECK(nnet::forward(net, x_changed, m.input_mask) == out);
  const auto g1 = nnet::backward(net, cache, nnet::bce_loss_and_grad(out, x, m.loss_mask).grad_logits);
  const auto g2 =
      nnet::backward(net, cache, nnet::bce_loss_and_grad(out, target_changed, m.loss_mask).grad_logits);
  CHECK(g1 == g2);
}

TEST_CASE("validation parity choice and per-epoch aggregation") {
  const Image img = noisy_test_image();
  const DenoiseConfig cfg = tiny_config();
  const tiling::FilledPair pair = validation_pair(img, cfg);
  SemiBlindTrainer a(img, cfg), b(img, cfg);
  int even = 0;
  for (std::uint64_t it = 0; it < 40; ++it) {
    const Parity p = a.validation_step(pair, it);
    CHECK(p == b.validation_step(pair, it));
    even += p == Parity::even;
  }
  // Both parities show up; 40 fair coins all equal has probability 2^-39.
  CHECK(even > 0);
  CHECK(even < 40);
  CHECK(a.validation(Parity::even).unresolved() < img.size());
  CHECK_FALSE(a.epoch_close(pair).has_value());
  CHECK(a.validation(Parity::even).unresolved() == img.size());
  CHECK(a.validation(Parity::odd).unresolved() == img.size());
}

TEST_CASE("epoch_close computes q from consecutive epoch errors") {
  const Image img = noisy_test_image();
  DenoiseConfig cfg = tiny_config();
  const tiling::FilledPair pair = validation_pair(img, cfg);
  SemiBlindTrainer tr(img, cfg);

  auto errors = [&](Parity parity) {
    auto avg = tr.validation(parity).average();
    const Image& target = parity == Parity::even ? pair.odd : pair.even;
    for (std::size_t p = 0; p < avg.size(); ++p) avg[p] = std::pow(avg[p] - target.pixels()[p], 2);
    return avg;
  };
  std::vector<double> prev_e, prev_o;
  std::uint64_t it = 0;
  for (int epoch = 0; epoch < 4; ++epoch) {
    for (int k = 0; k < 6; ++k, ++it) {
      tr.train_step(sample_masks(16, 16, tr.plan(), it));
      tr.validation_step(pair, it);
    }
    const auto e = errors(Parity::even), o = errors(Parity::odd);
    const auto q = tr.epoch_close(pair);
    if (epoch == 0) {
      CHECK_FALSE(q.has_value());
    } else {
      int up = 0, total = 0;
      for (std::size_t p = 0; p < e.size(); ++p) {
        if (!std::isnan(e[p]) && !std::isnan(prev_e[p])) ++total, up += e[p] > prev_e[p];
        if (!std::isnan(o[p]) && !std::isnan(prev_o[p])) ++total, up += o[p] > prev_o[p];
      }
      REQUIRE(q.has_value());
      CHECK(*q == doctest::Approx(total ? static_cast<double>(up) / total : 1.0).epsilon(1e-15));
      CHECK(*q >= 0.0);
      CHECK(*q <= 1.0);
    }
    prev_e = e;
    prev_o = o;
  }
}

// ------------------------------------------------------------------- runs

TEST_CASE("denoise returns the snapshot of the best epoch") {
  const Image img = noisy_test_image();
  const DenoiseConfig cfg = tiny_config();
  const DenoiseResult r = denoise(img, cfg);
  REQUIRE(r.report.halting_epoch.has_value());
  REQUIRE(r.report.best_epoch.has_value());
  CHECK(*r.report.halting_epoch == *r.report.best_epoch + 7 + cfg.patience);
  CHECK(r.report.iterations == static_cast<long>(*r.report.halting_epoch) * cfg.epoch_len);
  CHECK(r.report.q.size() == static_cast<std::size_t>(r.report.epochs - 1));

  // Replay the run step by step and compare against the cumulative state at
  // the reported best epoch.
  const tiling::FilledPair pair = validation_pair(img, cfg);
  SemiBlindTrainer tr(img, cfg);
  for (long it = 0; it < static_cast<long>(*r.report.best_epoch) * cfg.epoch_len; ++it) {
    tr.train_step(sample_masks(16, 16, tr.plan(), static_cast<std::uint64_t>(it)));
    tr.validation_step(pair, static_cast<std::uint64_t>(it));
  }
  CHECK(r.image == resolve(tr.cumulative(), img));
  CHECK(r.report.unresolved_pixels == 0);
  for (double v : r.image.pixels()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("denoise is deterministic and respects the iteration cap") {
  const Image img = noisy_test_image(13, 11);
  DenoiseConfig cfg = tiny_config();
  cfg.max_iterations = 10;
  const DenoiseResult a = denoise(img, cfg), b = denoise(img, cfg);
  CHECK(a.image == b.image);
  CHECK(a.report.to_json() == b.report.to_json());
  CHECK(a.image.height() == 13);
  CHECK(a.image.width() == 11);
  CHECK(a.report.iterations == 10);
  CHECK_FALSE(a.report.halting_epoch.has_value());
  CHECK_FALSE(a.report.best_epoch.has_value());
  const auto j = a.report.to_json();
  for (const char* key : {"iterations", "epochs", "halting_epoch", "best_epoch", "q", "s", "psnr_vs_input"})
    CHECK(j.contains(key));
  CHECK_FALSE(j.contains("wall_time_s"));
}

TEST_CASE("ablation validation fills run") {
  const Image img = noisy_test_image(12, 12);
  for (ValidationFill f : {ValidationFill::avg_neighbor, ValidationFill::random_neighbor,
                           ValidationFill::best_neighbor}) {
    DenoiseConfig cfg = tiny_config();
    cfg.validation_fill = f;
    cfg.max_iterations = 12;
    const auto pair = validation_pair(img, cfg);
    CHECK(pair.even.same_shape(img));
    CHECK(denoise(img, cfg).image.same_shape(img));
  }
}

TEST_CASE("n2f-domino mode") {
  const Image img = noisy_test_image(14, 15);
  DenoiseConfig cfg = tiny_config();
  cfg.mode = Mode::n2f_domino;
  const DenoiseResult a = n2f_domino_denoise(img, cfg);
  const DenoiseResult b = run(img, cfg);
  CHECK(a.image == b.image);
  CHECK(a.image.same_shape(img));
  CHECK(a.report.validation_mse.size() == static_cast<std::size_t>(a.report.epochs));
  if (a.report.halting_epoch) {
    CHECK(*a.report.halting_epoch == *a.report.best_epoch + cfg.patience);
  }
  // The output is the network applied to the noisy image at the best check.
  CHECK(a.report.to_json()["mode"] == "n2f-domino");
  CHECK_THROWS_AS(denoise(img, cfg), PreconditionError);
  cfg.mode = Mode::domino_denoise;
  CHECK_THROWS_AS(n2f_domino_denoise(img, cfg), PreconditionError);
}

TEST_CASE("config validation") {
  DenoiseConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.epoch_len = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  cfg = {};
  cfg.mask_rate = 0;
  CHECK_THROWS_AS(cfg.validate(), PreconditionError);
  CHECK(parse_mode("dd") == Mode::domino_denoise);
  CHECK(parse_mode("n2f-domino") == Mode::n2f_domino);
  CHECK_THROWS_AS(parse_mode("s2s"), PreconditionError);
}
