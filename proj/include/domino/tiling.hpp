#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "domino/image.hpp"
#include "domino/lap.hpp"

namespace domino::tiling {

using imaging::Image;

// Pixel (i, j) is even iff (i + j) is even.
enum class Parity { even, odd };

constexpr Parity parity_of(int i, int j) noexcept {
  return ((i + j) & 1) == 0 ? Parity::even : Parity::odd;
}
constexpr Parity opposite(Parity p) noexcept {
  return p == Parity::even ? Parity::odd : Parity::even;
}
const char* to_string(Parity p) noexcept;

struct Cell {
  int i = 0;
  int j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Direction (c1, c2) pairs (i, j) with (i + c1, j + c2).
struct Direction {
  int c1 = 0;
  int c2 = 0;
  friend bool operator==(const Direction&, const Direction&) = default;
};

inline constexpr Direction kUp{-1, 0};
inline constexpr Direction kDown{1, 0};
inline constexpr Direction kLeft{0, -1};
inline constexpr Direction kRight{0, 1};
// Fixed order used wherever directions compete on a tie.
inline constexpr Direction kDirections[4] = {kUp, kDown, kLeft, kRight};

struct Domino {
  Cell first;
  Cell second;
  friend bool operator==(const Domino&, const Domino&) = default;
};

struct Tiling {
  std::vector<Domino> pairs;
  int grid_h = 0;
  int grid_w = 0;
};

// ------------------------------------------------------------ downsampling

struct CheckerboardPair {
  Image even;
  Image odd;
};

// even(i,j) = x(i, 2j + i%2), odd(i,j) = x(i, 2j + 1 - i%2): every row pair of
// columns contributes one pixel to each output. Width must be even.
CheckerboardPair checkerboard_downsample(const Image& img);

// ----------------------------------------------------------------- padding

struct CropRecord {
  int height = 0;
  int width = 0;
};

struct Padded {
  Image image;
  CropRecord crop;
};

// Mirrors one extra row and/or column onto each odd dimension so both become
// even. 4x4 is untouched, 3x3 becomes 4x4, 3x4 becomes 4x4.
Padded pad_to_even(const Image& img);

// Top-left crop back to the recorded size.
Image crop(const Image& img, const CropRecord& record);

// ---------------------------------------------------------------- costs

// Squared differences of the two proxy pairs running parallel to the
// candidate domino on either side of it. The paired pixels never enter
// their own cost. Out-of-range proxies reflect at the border.
double neighbor_cost(const Image& img, Cell pixel, Direction direction);

struct GridCostMatrix {
  CostMatrix costs;
  std::vector<Cell> agents;  // row-major cells of the chosen parity
  std::vector<Cell> tasks;   // row-major cells of the opposite parity
};

// Agents are the pixels of `parity`, tasks the opposite parity; only
// 4-neighbours are permitted. Requires an even pixel count.
GridCostMatrix build_cost_matrix(const Image& img, Parity parity);

// ---------------------------------------------------------------- tilings

// Minimum-cost domino tiling of an even-area image, built with `parity`
// cells as agents. Each domino is stored as (agent cell, task cell).
Tiling domino_tiling(const Image& img, Parity parity);

double tiling_cost(const Image& img, const Tiling& t);

bool verify_tiling(const Tiling& t);

// Keeps `keep`-parity pixels and fills each gap with the value of its
// domino partner. `t` is defined on the padded grid of img.
Image render_tiling(const Image& img, const Tiling& t, Parity keep);

struct FilledPair {
  Image even;
  Image odd;
};

struct DominoPair {
  FilledPair filled;
  Tiling even_tiling;
  Tiling odd_tiling;
};

// Both Pixel Domino Tilings of img, full size. Pads internally.
DominoPair pixel_domino_tilings(const Image& img);
FilledPair pixel_domino_pair(const Image& img);

// ------------------------------------------------------- ablation fills

// Gap = mean of its in-bounds 4-neighbours.
Image fill_avg_neighbor(const Image& img, Parity keep);
// Gap = one in-bounds 4-neighbour chosen uniformly; deterministic per seed.
Image fill_random_neighbor(const Image& img, Parity keep, std::uint64_t seed);
// Gap = in-bounds neighbour with the lowest neighbor_cost, ties in the order
// up, down, left, right. Sources may repeat.
Image fill_best_neighbor(const Image& img, Parity keep);

}  // namespace domino::tiling
