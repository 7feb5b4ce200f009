#include "domino/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "domino/errors.hpp"
#include "domino/kernels.hpp"
#include "domino/random.hpp"

namespace domino::nnet {

Network::Network(NetworkShape shape) : shape_(shape) {
  if (shape.depth < 1 || shape.channels < 1) {
    throw PreconditionError("network depth and channels must be >= 1");
  }
  const std::size_t c = static_cast<std::size_t>(shape.channels);
  std::size_t total = 0;
  for (int l = 0; l < shape.depth; ++l) {
    const std::size_t in = l == 0 ? 1 : c;
    offsets_.push_back(total);
    total += c * in * 9;
    offsets_.push_back(total);
    total += c;
  }
  offsets_.push_back(total);
  total += c;
  offsets_.push_back(total);
  total += 1;
  params_.assign(total, 0.0);
}

ConvParams Network::layer(int l) const {
  if (l < 0 || l >= shape_.depth) throw PreconditionError("layer index out of range");
  const int in = l == 0 ? 1 : shape_.channels;
  const std::size_t wsize = static_cast<std::size_t>(shape_.channels) * in * 9;
  return {in, shape_.channels, 3, {params_.data() + offsets_[2 * l], wsize},
          {params_.data() + offsets_[2 * l + 1], static_cast<std::size_t>(shape_.channels)}};
}

ConvParams Network::head() const {
  const std::size_t base = offsets_[2 * shape_.depth];
  return {shape_.channels, 1, 1, {params_.data() + base, static_cast<std::size_t>(shape_.channels)},
          {params_.data() + offsets_[2 * shape_.depth + 1], 1}};
}

Network init_network(std::uint64_t seed, NetworkShape shape) {
  Network net(shape);
  auto engine = make_engine(seed, Stream::init);
  auto params = net.parameters();
  auto fill_uniform = [&](std::size_t offset, std::size_t count, double fan_in) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t k = 0; k < count; ++k) params[offset + k] = dist(engine);
  };
  for (int l = 0; l < shape.depth; ++l) {
    const ConvParams p = net.layer(l);
    fill_uniform(net.weight_offset(l), p.weight.size(), p.in_ch * 9.0);
  }
  const ConvParams h = net.head();
  const std::size_t head_offset = static_cast<std::size_t>(h.weight.data() - net.parameters().data());
  fill_uniform(head_offset, h.weight.size(), static_cast<double>(h.in_ch));
  return net;
}

// ----------------------------------------------------------- partial conv

namespace {

// Writes x . m into a zero-bordered (h + 2) x (w + 2) plane per channel.
void pad_masked(std::span<const double> x, int channels, int h, int w, std::span<const double> m,
                std::vector<double>& out) {
  const int pw = w + 2;
  const std::size_t plane = static_cast<std::size_t>(h + 2) * pw;
  out.assign(plane * channels, 0.0);
  for (int c = 0; c < channels; ++c) {
    const double* src = x.data() + static_cast<std::size_t>(c) * h * w;
    double* dst = out.data() + c * plane;
    for (int y = 0; y < h; ++y) {
      const double* srow = src + static_cast<std::size_t>(y) * w;
      const double* mrow = m.data() + static_cast<std::size_t>(y) * w;
      double* drow = dst + static_cast<std::size_t>(y + 1) * pw + 1;
      for (int xx = 0; xx < w; ++xx) drow[xx] = srow[xx] * mrow[xx];
    }
  }
}

// scale = (in-bounds taps) / (visible taps), 0 where nothing is visible.
void window_scale(const Mask& m, std::vector<double>& scale, Mask& mask_out) {
  const int h = m.height();
  const int w = m.width();
  scale.assign(static_cast<std::size_t>(h) * w, 0.0);
  if (mask_out.height() != h || mask_out.width() != w) mask_out = Mask(h, w, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double visible = 0.0;
      int inside = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int yy = y + dy;
        if (yy < 0 || yy >= h) continue;
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx;
          if (xx < 0 || xx >= w) continue;
          ++inside;
          visible += m(yy, xx);
        }
      }
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      scale[p] = visible > 0.0 ? inside / visible : 0.0;
      mask_out(y, x) = visible > 0.0 ? 1.0 : 0.0;
    }
  }
}

void check_conv_params(const ConvParams& p) {
  if (p.ksize != 3) throw PreconditionError("partial convolution expects a 3x3 kernel");
  if (p.weight.size() != static_cast<std::size_t>(p.out_ch) * p.in_ch * 9 ||
      p.bias.size() != static_cast<std::size_t>(p.out_ch)) {
    throw PreconditionError("convolution parameter sizes do not match channel counts");
  }
}

// Renormalize, add bias on visible windows, zero the holes.
void finish_partial(std::span<double> y, int out_ch, std::size_t plane, const std::vector<double>& scale,
                    std::span<const double> bias) {
  for (int co = 0; co < out_ch; ++co) {
    double* row = y.data() + co * plane;
    const double b = bias[co];
    for (std::size_t p = 0; p < plane; ++p) row[p] = scale[p] > 0.0 ? row[p] * scale[p] + b : 0.0;
  }
}

}  // namespace

PartialConvResult partial_conv_forward(const Tensor& x, const Mask& mask, const ConvParams& p) {
  check_conv_params(p);
  if (x.channels() != p.in_ch) throw PreconditionError("input channels do not match layer");
  if (x.height() != mask.height() || x.width() != mask.width()) {
    throw PreconditionError("input and mask shapes differ");
  }
  const int h = x.height();
  const int w = x.width();
  std::vector<double> padded;
  pad_masked(x.data(), p.in_ch, h, w, mask.data(), padded);
  PartialConvResult out{Tensor({p.out_ch, h, w}), Mask(h, w, 0.0)};
  std::vector<double> scale;
  window_scale(mask, scale, out.mask_out);
  kernels::active().conv3x3(padded.data(), p.in_ch, h, w, p.weight.data(), p.out_ch,
                            out.y.data().data());
  finish_partial(out.y.data(), p.out_ch, static_cast<std::size_t>(h) * w, scale, p.bias);
  return out;
}

// ----------------------------------------------------------- forward/back

namespace {

double sigmoid(double z) noexcept {
  return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace

Tensor forward(const Network& net, const Tensor& x, const Mask& mask, ForwardCache& cache) {
  if (x.channels() != 1) throw PreconditionError("network input must be single-channel");
  if (x.height() != mask.height() || x.width() != mask.width()) {
    throw PreconditionError("input and mask shapes differ");
  }
  const int h = x.height();
  const int w = x.width();
  const int depth = net.depth();
  const int c = net.channels();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  const auto& k = kernels::active();

  cache.valid = false;
  cache.height = h;
  cache.width = w;
  cache.masks.resize(depth + 1);
  cache.inputs.resize(depth);
  cache.scales.resize(depth);
  if (static_cast<int>(cache.activations.size()) != depth ||
      (depth > 0 && cache.activations[0].shape() != Shape{c, h, w})) {
    cache.activations.assign(depth, Tensor({c, h, w}));
  }

  cache.masks[0] = mask;
  for (int l = 0; l < depth; ++l) {
    const ConvParams p = net.layer(l);
    const std::span<const double> in = l == 0 ? x.data() : cache.activations[l - 1].data();
    pad_masked(in, p.in_ch, h, w, cache.masks[l].data(), cache.inputs[l]);
    window_scale(cache.masks[l], cache.scales[l], cache.masks[l + 1]);
    auto y = cache.activations[l].data();
    k.conv3x3(cache.inputs[l].data(), p.in_ch, h, w, p.weight.data(), p.out_ch, y.data());
    finish_partial(y, p.out_ch, plane, cache.scales[l], p.bias);
    for (double& v : y) v = v > 0.0 ? v : 0.0;
  }

  const ConvParams hp = net.head();
  const auto& last = cache.activations[depth - 1];
  cache.output.assign(plane, hp.bias[0]);
  for (int ch = 0; ch < c; ++ch) {
    const double wc = hp.weight[ch];
    const auto a = last.channel(ch);
    for (std::size_t p = 0; p < plane; ++p) cache.output[p] += wc * a[p];
  }
  for (double& v : cache.output) v = sigmoid(v);
  cache.valid = true;
  return Tensor({1, h, w}, cache.output);
}

Tensor forward(const Network& net, const Tensor& x, const Mask& mask) {
  ForwardCache cache;
  return forward(net, x, mask, cache);
}

std::vector<double> backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> grad_logits) {
  if (!cache.valid) throw PreconditionError("backward requires a cached forward pass");
  const int h = cache.height;
  const int w = cache.width;
  const int depth = net.depth();
  const int c = net.channels();
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  if (grad_logits.size() != plane) throw PreconditionError("gradient size does not match output");
  if (static_cast<int>(cache.activations.size()) != depth ||
      cache.activations[0].shape() != Shape{c, h, w}) {
    throw PreconditionError("cached forward does not belong to this network");
  }
  const auto& k = kernels::active();

  std::vector<double> grad(net.parameter_count(), 0.0);
  const ConvParams hp = net.head();
  const std::size_t head_w = static_cast<std::size_t>(hp.weight.data() - net.parameters().data());
  const std::size_t head_b = static_cast<std::size_t>(hp.bias.data() - net.parameters().data());

  Tensor da({c, h, w});
  {
    const auto& last = cache.activations[depth - 1];
    double db = 0.0;
    for (std::size_t p = 0; p < plane; ++p) db += grad_logits[p];
    grad[head_b] = db;
    for (int ch = 0; ch < c; ++ch) {
      const auto a = last.channel(ch);
      auto d = da.channel(ch);
      const double wc = hp.weight[ch];
      double acc = 0.0;
      for (std::size_t p = 0; p < plane; ++p) {
        acc += grad_logits[p] * a[p];
        d[p] = wc * grad_logits[p];
      }
      grad[head_w + ch] = acc;
    }
  }

  Tensor g({c, h, w});
  std::vector<double> g_pad;
  std::vector<double> flipped;
  Tensor dxm({c, h, w});
  for (int l = depth - 1; l >= 0; --l) {
    const ConvParams p = net.layer(l);
    const auto& act = cache.activations[l];
    const auto& scale = cache.scales[l];
    double* db = grad.data() + net.bias_offset(l);
    for (int co = 0; co < c; ++co) {
      const auto a = act.channel(co);
      const auto d = da.channel(co);
      auto gc = g.channel(co);
      double bias_acc = 0.0;
      for (std::size_t q = 0; q < plane; ++q) {
        const double dpre = a[q] > 0.0 ? d[q] : 0.0;
        bias_acc += dpre;
        gc[q] = dpre * scale[q];
      }
      db[co] += bias_acc;
    }
    k.conv3x3_weight_grad(cache.inputs[l].data(), p.in_ch, g.data().data(), c, h, w,
                          grad.data() + net.weight_offset(l));
    if (l == 0) break;

    // Transposed convolution: a 3x3 convolution of the padded gradient with
    // channel-swapped, spatially flipped weights.
    const Mask no_mask(h, w, 1.0);
    pad_masked(g.data(), c, h, w, no_mask.data(), g_pad);
    flipped.resize(static_cast<std::size_t>(p.in_ch) * c * 9);
    for (int co = 0; co < c; ++co) {
      for (int ci = 0; ci < p.in_ch; ++ci) {
        for (int t = 0; t < 9; ++t) {
          flipped[(static_cast<std::size_t>(ci) * c + co) * 9 + t] =
              p.weight[(static_cast<std::size_t>(co) * p.in_ch + ci) * 9 + (8 - t)];
        }
      }
    }
    k.conv3x3(g_pad.data(), c, h, w, flipped.data(), p.in_ch, dxm.data().data());
    const auto m = cache.masks[l].data();
    for (int ci = 0; ci < p.in_ch; ++ci) {
      const auto src = dxm.channel(ci);
      auto dst = da.channel(ci);
      for (std::size_t q = 0; q < plane; ++q) dst[q] = src[q] * m[q];
    }
  }
  return grad;
}

// ------------------------------------------------------------------ loss

namespace {

void check_loss_inputs(const Tensor& pred, const Tensor& target, const Mask& loss_mask) {
  if (pred.shape() != target.shape() || pred.channels() != 1 ||
      pred.height() != loss_mask.height() || pred.width() != loss_mask.width()) {
    throw PreconditionError("loss inputs have mismatched shapes");
  }
}

}  // namespace

BceResult bce_loss_and_grad(const Tensor& pred, const Tensor& target, const Mask& loss_mask) {
  check_loss_inputs(pred, target, loss_mask);
  const std::size_t selected = loss_mask.count();
  if (selected == 0) throw PreconditionError("loss mask selects no pixels");
  const auto p = pred.data();
  const auto t = target.data();
  const auto m = loss_mask.data();
  const double inv = 1.0 / static_cast<double>(selected);
  const double lo = kProbabilityClamp;
  const double hi = 1.0 - kProbabilityClamp;

  BceResult out;
  out.grad_logits.assign(p.size(), 0.0);
  double total = 0.0;
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (m[q] == 0.0) continue;
    const double pc = std::clamp(p[q], lo, hi);
    total -= t[q] * std::log(pc) + (1.0 - t[q]) * std::log(1.0 - pc);
    if (p[q] == pc) out.grad_logits[q] = (p[q] - t[q]) * inv;
  }
  out.loss = total * inv;
  return out;
}

double bce_loss(const Tensor& pred, const Tensor& target, const Mask& loss_mask) {
  check_loss_inputs(pred, target, loss_mask);
  const std::size_t selected = loss_mask.count();
  if (selected == 0) throw PreconditionError("loss mask selects no pixels");
  const auto p = pred.data();
  const auto t = target.data();
  const auto m = loss_mask.data();
  double total = 0.0;
  for (std::size_t q = 0; q < p.size(); ++q) {
    if (m[q] == 0.0) continue;
    const double pc = std::clamp(p[q], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= t[q] * std::log(pc) + (1.0 - t[q]) * std::log(1.0 - pc);
  }
  return total / static_cast<double>(selected);
}

// ------------------------------------------------------------- checkpoint

namespace {

constexpr char kMagic[4] = {'D', 'D', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;
constexpr int kCheckpointDepth = 12;

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated checkpoint header");
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
  return v;
}

}  // namespace

void save_checkpoint(const Network& net, const std::filesystem::path& path) {
  if (net.depth() != kCheckpointDepth) {
    throw PreconditionError("checkpoints store the 12-stage network only");
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string());
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(net.channels()));
    for (double v : net.parameters()) {
      const auto bits = std::bit_cast<std::uint64_t>(v);
      unsigned char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(bits >> (8 * k));
      out.write(reinterpret_cast<const char*>(b), 8);
    }
    if (!out) throw IoError("write failed on " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string());
}

Network load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a network checkpoint: " + path.string());
  }
  if (get_u32(in) != kVersion) throw FormatError("unsupported checkpoint version");
  const std::uint32_t channels = get_u32(in);
  if (channels < 1 || channels > 4096) throw FormatError("checkpoint channel count out of range");
  Network net({kCheckpointDepth, static_cast<int>(channels)});
  for (double& v : net.parameters()) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw FormatError("truncated checkpoint");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    v = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in checkpoint");
  return net;
}

}  // namespace domino::nnet
