#include <random>

#include "domino/tiling.hpp"

namespace domino::tiling {
namespace {

template <typename Choose>
Image fill_gaps(const Image& img, Parity keep, Choose&& choose) {
  Image out = img;
  for (int i = 0; i < img.height(); ++i) {
    for (int j = 0; j < img.width(); ++j) {
      if (parity_of(i, j) == keep) continue;
      Cell neighbours[4];
      Direction dirs[4];
      int count = 0;
      for (const Direction& d : kDirections) {
        const int ni = i + d.c1;
        const int nj = j + d.c2;
        if (ni < 0 || nj < 0 || ni >= img.height() || nj >= img.width()) continue;
        neighbours[count] = {ni, nj};
        dirs[count] = d;
        ++count;
      }
      // A 1x1 image has no neighbours; leave the pixel as is.
      if (count == 0) continue;
      out(i, j) = choose(Cell{i, j}, neighbours, dirs, count);
    }
  }
  return out;
}

}  // namespace

Image fill_avg_neighbor(const Image& img, Parity keep) {
  return fill_gaps(img, keep, [&](Cell, const Cell* nb, const Direction*, int count) {
    double sum = 0.0;
    for (int k = 0; k < count; ++k) sum += img(nb[k].i, nb[k].j);
    return sum / count;
  });
}

Image fill_random_neighbor(const Image& img, Parity keep, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return fill_gaps(img, keep, [&](Cell, const Cell* nb, const Direction*, int count) {
    std::uniform_int_distribution<int> pick(0, count - 1);
    const Cell& c = nb[pick(engine)];
    return img(c.i, c.j);
  });
}

Image fill_best_neighbor(const Image& img, Parity keep) {
  return fill_gaps(img, keep, [&](Cell gap, const Cell* nb, const Direction* dirs, int count) {
    int best = 0;
    double best_cost = neighbor_cost(img, gap, dirs[0]);
    for (int k = 1; k < count; ++k) {
      const double c = neighbor_cost(img, gap, dirs[k]);
      if (c < best_cost) {
        best_cost = c;
        best = k;
      }
    }
    return img(nb[best].i, nb[best].j);
  });
}

}  // namespace domino::tiling
