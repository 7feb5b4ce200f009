#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "domino/tensor.hpp"

namespace domino::nnet {

struct NetworkShape {
  int depth = 12;     // number of 3x3 partial-convolution + ReLU stages
  int channels = 48;  // feature width of every stage
  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

// Read-only view of one convolution's parameters.
struct ConvParams {
  int in_ch = 0;
  int out_ch = 0;
  int ksize = 3;
  std::span<const double> weight;  // [out_ch][in_ch][ksize][ksize]
  std::span<const double> bias;    // [out_ch]
};

// Single-channel in, single-channel out: `depth` partial convolutions with
// ReLU, then a 1x1 convolution with sigmoid. All parameters live in one flat
// vector so optimizers and checkpoints can treat them uniformly.
class Network {
 public:
  Network() = default;
  explicit Network(NetworkShape shape);

  const NetworkShape& shape() const noexcept { return shape_; }
  int depth() const noexcept { return shape_.depth; }
  int channels() const noexcept { return shape_.channels; }

  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }

  ConvParams layer(int l) const;
  ConvParams head() const;

  // Offsets into parameters() for tests and tooling.
  std::size_t weight_offset(int l) const noexcept { return offsets_[2 * l]; }
  std::size_t bias_offset(int l) const noexcept { return offsets_[2 * l + 1]; }

  friend bool operator==(const Network&, const Network&) = default;

 private:
  NetworkShape shape_;
  std::vector<double> params_;
  std::vector<std::size_t> offsets_;  // weight/bias start per layer, head last
};

// He-uniform weights in +-sqrt(6 / fan_in), zero biases, deterministic per seed.
Network init_network(std::uint64_t seed, NetworkShape shape = {});

// ----------------------------------------------------------- partial conv

struct PartialConvResult {
  Tensor y;       // pre-activation output
  Mask mask_out;  // 1 where the window held at least one visible pixel
};

// y = W * (x . m) * (K / sum m) + b where the window holds visible pixels,
// y = 0 (no bias) where it holds none. K counts the in-bounds window
// positions, so out-of-bounds taps behave as masked and an all-ones mask
// reduces exactly to a zero-padded convolution.
PartialConvResult partial_conv_forward(const Tensor& x, const Mask& mask, const ConvParams& p);

// ----------------------------------------------------------- forward/back

// Activations retained by forward() for backward(). Buffers are reused
// between calls with the same shape.
struct ForwardCache {
  bool valid = false;
  int height = 0;
  int width = 0;
  std::vector<Mask> masks;                    // input mask of each stage
  std::vector<std::vector<double>> inputs;    // padded x . m per stage
  std::vector<std::vector<double>> scales;    // K / sum m, 0 on holes
  std::vector<Tensor> activations;            // ReLU output per stage
  std::vector<double> output;                 // sigmoid output
};

// Forward pass; x is (1, h, w). Output is (1, h, w) with values in (0, 1).
Tensor forward(const Network& net, const Tensor& x, const Mask& mask, ForwardCache& cache);
Tensor forward(const Network& net, const Tensor& x, const Mask& mask);

// Gradient of the loss with respect to every parameter, given dL/dz for the
// pre-sigmoid output. Masks are data: renormalization factors are constants.
// Throws PreconditionError without a cached forward.
std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> grad_logits);

// ------------------------------------------------------------------ loss

inline constexpr double kProbabilityClamp = 1e-7;

// Mean binary cross-entropy over the selected pixels, with predictions
// clamped to [1e-7, 1 - 1e-7]. Throws PreconditionError on an empty mask.
double bce_loss(const Tensor& pred, const Tensor& target, const Mask& loss_mask);

struct BceResult {
  double loss = 0.0;
  std::vector<double> grad_logits;  // dL/dz per pixel, zero outside the mask
};

// Loss and its gradient with respect to the pre-sigmoid logits. Where the
// clamp is active the gradient is zero.
BceResult bce_loss_and_grad(const Tensor& pred, const Tensor& target, const Mask& loss_mask);

// ------------------------------------------------------------- checkpoint

// Layout: "DDNN", u32 version (1), u32 channels, then every parameter as a
// little-endian double in layer order (weights then bias per layer, head
// last). Depth is the fixed production depth of 12.
void save_checkpoint(const Network& net, const std::filesystem::path& path);
Network load_checkpoint(const std::filesystem::path& path);

}  // namespace domino::nnet
