#include "domino/tiling.hpp"

#include <algorithm>
#include <future>
#include <string>

#include "domino/errors.hpp"

namespace domino::tiling {

const char* to_string(Parity p) noexcept { return p == Parity::even ? "even" : "odd"; }

namespace {

// Reflection about the border pixel: -1 -> 1, n -> n-2.
int reflect(int idx, int n) noexcept {
  if (n == 1) return 0;
  while (idx < 0 || idx >= n) {
    if (idx < 0) idx = -idx;
    if (idx >= n) idx = 2 * (n - 1) - idx;
  }
  return idx;
}

double at_reflected(const Image& img, int i, int j) noexcept {
  return img(reflect(i, img.height()), reflect(j, img.width()));
}

bool in_bounds(const Image& img, int i, int j) noexcept {
  return i >= 0 && j >= 0 && i < img.height() && j < img.width();
}

bool valid_direction(Direction d) noexcept {
  return (d.c1 == 0 && (d.c2 == 1 || d.c2 == -1)) || (d.c2 == 0 && (d.c1 == 1 || d.c1 == -1));
}

}  // namespace

// ------------------------------------------------------------ downsampling

CheckerboardPair checkerboard_downsample(const Image& img) {
  if (img.width() % 2 != 0) {
    throw PreconditionError("checkerboard downsampling needs an even width; pad first");
  }
  const int h = img.height();
  const int half = img.width() / 2;
  CheckerboardPair out{Image(h, half, 0.0, img.bit_depth()), Image(h, half, 0.0, img.bit_depth())};
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < half; ++j) {
      // The odd sample is the other pixel of the same column pair, so the two
      // outputs partition the row.
      out.even(i, j) = img(i, 2 * j + (i % 2));
      out.odd(i, j) = img(i, 2 * j + 1 - (i % 2));
    }
  }
  return out;
}

// ----------------------------------------------------------------- padding

Padded pad_to_even(const Image& img) {
  const int h = img.height();
  const int w = img.width();
  const int ph = h + (h % 2);
  const int pw = w + (w % 2);
  if (ph == h && pw == w) return {img, {h, w}};
  Image out(ph, pw, 0.0, img.bit_depth());
  for (int i = 0; i < ph; ++i) {
    const int si = std::min(i, h - 1);
    for (int j = 0; j < pw; ++j) out(i, j) = img(si, std::min(j, w - 1));
  }
  return {std::move(out), {h, w}};
}

Image crop(const Image& img, const CropRecord& record) {
  if (record.height > img.height() || record.width > img.width()) {
    throw PreconditionError("crop record larger than image");
  }
  if (record.height == img.height() && record.width == img.width()) return img;
  Image out(record.height, record.width, 0.0, img.bit_depth());
  for (int i = 0; i < record.height; ++i) {
    for (int j = 0; j < record.width; ++j) out(i, j) = img(i, j);
  }
  return out;
}

// ---------------------------------------------------------------- costs

double neighbor_cost(const Image& img, Cell p, Direction d) {
  if (!valid_direction(d)) throw PreconditionError("direction must be one of the four unit steps");
  const int i = p.i;
  const int j = p.j;
  const int c1 = d.c1;
  const int c2 = d.c2;
  const double a = at_reflected(img, i + c2, j + c1) - at_reflected(img, i + c1 + c2, j + c1 + c2);
  const double b = at_reflected(img, i - c2, j - c1) - at_reflected(img, i + c1 - c2, j - c1 + c2);
  return a * a + b * b;
}

GridCostMatrix build_cost_matrix(const Image& img, Parity parity) {
  const int h = img.height();
  const int w = img.width();
  if ((static_cast<long long>(h) * w) % 2 != 0) {
    throw PreconditionError("domino tilings need an even pixel count; pad first");
  }
  GridCostMatrix out;
  std::vector<int> task_index(static_cast<std::size_t>(h) * w, -1);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      if (parity_of(i, j) == parity) {
        out.agents.push_back({i, j});
      } else {
        task_index[static_cast<std::size_t>(i) * w + j] = static_cast<int>(out.tasks.size());
        out.tasks.push_back({i, j});
      }
    }
  }

  out.costs = CostMatrix(static_cast<int>(out.agents.size()));
  std::vector<CostMatrix::Entry> row;
  for (const Cell& a : out.agents) {
    row.clear();
    for (const Direction& d : kDirections) {
      const int ni = a.i + d.c1;
      const int nj = a.j + d.c2;
      if (!in_bounds(img, ni, nj)) continue;
      row.push_back({task_index[static_cast<std::size_t>(ni) * w + nj], neighbor_cost(img, a, d)});
    }
    out.costs.add_agent(row);
  }
  return out;
}

// ---------------------------------------------------------------- tilings

Tiling domino_tiling(const Image& img, Parity parity) {
  const GridCostMatrix grid = build_cost_matrix(img, parity);
  const Assignment assignment = solve_lap(grid.costs);
  Tiling t;
  t.grid_h = img.height();
  t.grid_w = img.width();
  t.pairs.reserve(grid.agents.size());
  for (std::size_t a = 0; a < grid.agents.size(); ++a) {
    t.pairs.push_back({grid.agents[a], grid.tasks[assignment.task_of_agent[a]]});
  }
  return t;
}

double tiling_cost(const Image& img, const Tiling& t) {
  double total = 0.0;
  for (const Domino& d : t.pairs) {
    total += neighbor_cost(img, d.first, {d.second.i - d.first.i, d.second.j - d.first.j});
  }
  return total;
}

bool verify_tiling(const Tiling& t) {
  if (t.grid_h < 1 || t.grid_w < 1) return false;
  const long long cells = static_cast<long long>(t.grid_h) * t.grid_w;
  if (static_cast<long long>(t.pairs.size()) * 2 != cells) return false;
  std::vector<char> seen(static_cast<std::size_t>(cells), 0);
  auto claim = [&](const Cell& c) {
    if (c.i < 0 || c.j < 0 || c.i >= t.grid_h || c.j >= t.grid_w) return false;
    char& s = seen[static_cast<std::size_t>(c.i) * t.grid_w + c.j];
    if (s) return false;
    s = 1;
    return true;
  };
  for (const Domino& d : t.pairs) {
    if (std::abs(d.first.i - d.second.i) + std::abs(d.first.j - d.second.j) != 1) return false;
    if (parity_of(d.first.i, d.first.j) == parity_of(d.second.i, d.second.j)) return false;
    if (!claim(d.first) || !claim(d.second)) return false;
  }
  return true;
}

Image render_tiling(const Image& img, const Tiling& t, Parity keep) {
  Padded padded;
  if (img.height() == t.grid_h && img.width() == t.grid_w) {
    padded = {img, {img.height(), img.width()}};
  } else {
    padded = pad_to_even(img);
    if (padded.image.height() != t.grid_h || padded.image.width() != t.grid_w) {
      throw PreconditionError("tiling grid does not match the image's padded dimensions");
    }
  }
  if (!verify_tiling(t)) throw PreconditionError("invalid tiling");

  const Image& grid = padded.image;
  Image out = grid;
  for (const Domino& d : t.pairs) {
    const bool first_kept = parity_of(d.first.i, d.first.j) == keep;
    const Cell& kept = first_kept ? d.first : d.second;
    const Cell& gap = first_kept ? d.second : d.first;
    out(gap.i, gap.j) = grid(kept.i, kept.j);
  }
  return crop(out, padded.crop);
}

DominoPair pixel_domino_tilings(const Image& img) {
  const Padded padded = pad_to_even(img);
  // The two assignment problems are independent.
  auto odd_future = std::async(std::launch::async,
                               [&padded] { return domino_tiling(padded.image, Parity::odd); });
  Tiling even_tiling = domino_tiling(padded.image, Parity::even);
  Tiling odd_tiling = odd_future.get();

  DominoPair out;
  out.filled.even = render_tiling(img, even_tiling, Parity::even);
  out.filled.odd = render_tiling(img, odd_tiling, Parity::odd);
  out.even_tiling = std::move(even_tiling);
  out.odd_tiling = std::move(odd_tiling);
  return out;
}

FilledPair pixel_domino_pair(const Image& img) { return pixel_domino_tilings(img).filled; }

}  // namespace domino::tiling
