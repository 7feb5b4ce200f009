#include "domino/noise.hpp"

#include <algorithm>
#include <random>

#include "domino/errors.hpp"

namespace domino::imaging {

Image add_gaussian_noise(const Image& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::gaussian) throw PreconditionError("expected a gaussian NoiseSpec");
  if (!(spec.sigma >= 0.0)) throw PreconditionError("gaussian sigma must be >= 0");
  Image out = img;
  if (spec.sigma == 0.0) return out;

  std::mt19937_64 engine(spec.seed);
  std::normal_distribution<double> normal(0.0, spec.sigma / 255.0);
  for (double& v : out.pixels()) v = std::clamp(v + normal(engine), 0.0, 1.0);
  return out;
}

Image add_poisson_noise(const Image& img, const NoiseSpec& spec) {
  if (spec.kind != NoiseKind::poisson) throw PreconditionError("expected a poisson NoiseSpec");
  if (!(spec.peak > 0.0)) throw PreconditionError("poisson peak must be > 0");
  Image out = img;

  std::mt19937_64 engine(spec.seed);
  for (double& v : out.pixels()) {
    const double rate = v * spec.peak;
    if (rate <= 0.0) {
      v = 0.0;
      continue;
    }
    std::poisson_distribution<long long> poisson(rate);
    v = std::clamp(static_cast<double>(poisson(engine)) / spec.peak, 0.0, 1.0);
  }
  return out;
}

Image add_noise(const Image& img, const NoiseSpec& spec) {
  return spec.kind == NoiseKind::gaussian ? add_gaussian_noise(img, spec)
                                          : add_poisson_noise(img, spec);
}

}  // namespace domino::imaging
