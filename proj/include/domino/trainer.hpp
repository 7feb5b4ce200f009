#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "domino/adam.hpp"
#include "domino/image.hpp"
#include "domino/network.hpp"
#include "domino/random.hpp"
#include "domino/tiling.hpp"

namespace domino::trainer {

using imaging::Image;
using nnet::Mask;
using nnet::Tensor;

// ------------------------------------------------------------------ masks

struct MaskPlan {
  double mask_rate = 0.20;   // fraction hidden from the network
  double leak_rate = 0.001;  // fraction of the visible pixels added to the loss
  std::uint64_t seed = 0;

  void validate() const;
};

struct MaskPair {
  Mask input_mask;  // 0 = hidden (P)
  Mask loss_mask;   // 1 on P and on the leak set P0
};

// floor(rate * n), robust to rates like 0.2 that are not exact in binary.
std::size_t subset_size(std::size_t n, double rate) noexcept;

// Hides a uniform floor(mask_rate * N)-subset and leaks a uniform
// floor(leak_rate * |visible|)-subset of the rest into the loss.
// Deterministic per (plan.seed, stream, iteration).
MaskPair sample_masks(int height, int width, const MaskPlan& plan, std::uint64_t iteration,
                      Stream stream = Stream::masks);

// -------------------------------------------------------------- aggregate

// Per-pixel running mean of network outputs.
class Aggregator {
 public:
  Aggregator() = default;
  Aggregator(int height, int width);

  // Adds values at every pixel where visible == 1.
  void push(std::span<const double> values, const Mask& visible);
  void reset();

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  long count(std::size_t p) const noexcept { return count_[p]; }
  bool resolved(std::size_t p) const noexcept { return count_[p] > 0; }
  std::size_t unresolved() const noexcept;
  // Mean per pixel; NaN where nothing was observed.
  std::vector<double> average() const;

  friend bool operator==(const Aggregator&, const Aggregator&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<double> sum_;
  std::vector<long> count_;
};

// ---------------------------------------------------------------- halting

// Smoothed early stopping over the per-epoch fractions q. s_k is the mean of
// q_{k-7..k+7} and is known once q_{k+7} arrives. The run halts after
// `patience` consecutive s values without a strict new minimum; the answer is
// the index of the minimizing q.
class HaltingRule {
 public:
  static constexpr int kHalfWindow = 7;

  explicit HaltingRule(int patience);

  struct Verdict {
    std::optional<int> smoothed_index;  // index of the s value emitted by this push
    bool new_best = false;
    bool halt = false;
  };

  Verdict push(double q);

  const std::vector<double>& q() const noexcept { return q_; }
  const std::vector<double>& s() const noexcept { return s_; }
  // Index (into q) whose smoothed value is the running minimum.
  std::optional<int> best_index() const noexcept { return best_; }
  bool halted() const noexcept { return halted_; }
  int patience() const noexcept { return patience_; }

 private:
  int patience_;
  std::vector<double> q_;
  std::vector<double> s_;  // s_[j] belongs to q index j + kHalfWindow
  std::optional<int> best_;
  double best_s_ = 0.0;
  int since_best_ = 0;
  bool halted_ = false;
};

// ----------------------------------------------------------------- config

enum class Mode { domino_denoise, n2f_domino };

// How the validation pair is produced. The domino tiling is the method; the
// neighbour fills exist for the ablation benchmark.
enum class ValidationFill { domino, avg_neighbor, random_neighbor, best_neighbor };

struct DenoiseConfig {
  Mode mode = Mode::domino_denoise;
  int epoch_len = 500;
  int patience = 30;
  long max_iterations = 100000;
  int channels = 48;
  int depth = 12;
  std::uint64_t seed = 0;
  int n2f_check_interval = 250;
  double learning_rate = 1e-4;
  double mask_rate = 0.20;
  double leak_rate = 0.001;
  ValidationFill validation_fill = ValidationFill::domino;

  void validate() const;
};

const char* to_string(Mode m) noexcept;
Mode parse_mode(const std::string& s);

// ----------------------------------------------------------------- report

struct RunReport {
  Mode mode = Mode::domino_denoise;
  long iterations = 0;
  int epochs = 0;
  std::optional<int> halting_epoch;  // empty when the iteration cap ended the run
  std::optional<int> best_epoch;
  std::vector<double> q;
  std::vector<double> s;
  std::vector<double> validation_mse;  // n2f-domino checks
  std::size_t unresolved_pixels = 0;
  std::optional<double> psnr_vs_input;
  std::optional<double> wall_time_s;

  nlohmann::json to_json() const;
};

struct DenoiseResult {
  Image image;
  RunReport report;
  nnet::Network network;  // final weights
};

// ----------------------------------------------------------------- loop

// Builds the two filled validation images for cfg.validation_fill.
tiling::FilledPair validation_pair(const Image& img, const DenoiseConfig& cfg);

// One semi-blind run. The steps are exposed for tests; denoise() drives them.
class SemiBlindTrainer {
 public:
  SemiBlindTrainer(const Image& noisy, const DenoiseConfig& cfg);

  // Forward on the masked image, BCE over P u P0, backward, Adam. Outputs at
  // visible pixels feed the cumulative aggregator. Returns the loss.
  double train_step(const MaskPair& masks);
  // Forwards one randomly chosen filled image under a fresh mask and feeds the
  // parity's per-epoch aggregator. Returns the parity used.
  tiling::Parity validation_step(const tiling::FilledPair& pair, std::uint64_t iteration);
  // Compares this epoch's validation errors against the previous epoch and
  // resets the per-epoch aggregators. Returns q, or nothing for the first epoch.
  std::optional<double> epoch_close(const tiling::FilledPair& pair);

  const nnet::Network& network() const noexcept { return net_; }
  const Aggregator& cumulative() const noexcept { return cumulative_; }
  const Aggregator& validation(tiling::Parity p) const noexcept {
    return p == tiling::Parity::even ? val_even_ : val_odd_;
  }
  const MaskPlan& plan() const noexcept { return plan_; }
  const std::vector<double>& last_gradient() const noexcept { return grad_; }

 private:
  DenoiseConfig cfg_;
  MaskPlan plan_;
  Tensor input_;
  nnet::Network net_;
  nnet::AdamState adam_;
  nnet::ForwardCache cache_;
  std::vector<double> grad_;
  Aggregator cumulative_;
  Aggregator val_even_;
  Aggregator val_odd_;
  std::vector<double> prev_err_even_;
  std::vector<double> prev_err_odd_;
  bool have_prev_ = false;
};

// Cumulative-average image with unresolved pixels taken from `fallback`.
Image resolve(const Aggregator& agg, const Image& fallback, std::size_t* unresolved = nullptr);

DenoiseResult denoise(const Image& noisy, const DenoiseConfig& cfg);
DenoiseResult n2f_domino_denoise(const Image& noisy, const DenoiseConfig& cfg);
// Dispatches on cfg.mode.
DenoiseResult run(const Image& noisy, const DenoiseConfig& cfg);

}  // namespace domino::trainer
