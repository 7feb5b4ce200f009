#include "domino/counting.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "domino/errors.hpp"

namespace domino::tiling {

double count_tilings_formula(int m, int n) {
  if (m < 1 || n < 1) throw PreconditionError("grid dimensions must be positive");
  const double pi = std::numbers::pi;
  double product = 1.0;
  for (int i = 1; i <= (m + 1) / 2; ++i) {
    const double ci = std::cos(pi * i / (m + 1));
    for (int j = 1; j <= (n + 1) / 2; ++j) {
      const double cj = std::cos(pi * j / (n + 1));
      product *= 4.0 * ci * ci + 4.0 * cj * cj;
    }
  }
  return product;
}

bool exact_count_supported(int m, int n) noexcept {
  return m >= 1 && n >= 1 && static_cast<long long>(m) * n <= kExactMaxCells &&
         std::min(m, n) <= kExactMaxProfile;
}

BigInt count_tilings_exact(int m, int n) {
  if (m < 1 || n < 1) throw PreconditionError("grid dimensions must be positive");
  if (!exact_count_supported(m, n)) {
    throw SizeLimitError("exact tiling count limited to m*n <= " + std::to_string(kExactMaxCells) +
                         " with the narrow side <= " + std::to_string(kExactMaxProfile));
  }
  if ((static_cast<long long>(m) * n) % 2 != 0) return 0;

  // Profile runs along the narrow side (rows), sweeping columns cell by cell.
  const int rows = std::min(m, n);
  const int cols = std::max(m, n);
  const std::size_t states = std::size_t{1} << rows;

  // Bit r of a state: for rows already visited in the current column, whether
  // the cell in the next column is pre-covered by a horizontal domino; for
  // rows not yet visited, whether the current cell is pre-covered.
  std::vector<BigInt> cur(states), next(states);
  cur[0] = 1;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      for (auto& v : next) v = 0;
      const std::size_t bit = std::size_t{1} << r;
      for (std::size_t s = 0; s < states; ++s) {
        if (cur[s].is_zero()) continue;
        if (s & bit) {
          next[s & ~bit] += cur[s];
          continue;
        }
        if (c + 1 < cols) next[s | bit] += cur[s];
        if (r + 1 < rows && !(s & (bit << 1))) next[s | (bit << 1)] += cur[s];
      }
      std::swap(cur, next);
    }
  }
  return cur[0];
}

namespace {

void enumerate_from(int m, int n, std::vector<int>& owner, std::vector<Domino>& stack,
                    std::vector<Tiling>& out) {
  int free_cell = -1;
  for (int k = 0; k < m * n; ++k) {
    if (owner[k] < 0) {
      free_cell = k;
      break;
    }
  }
  if (free_cell < 0) {
    out.push_back({stack, m, n});
    return;
  }
  const int i = free_cell / n;
  const int j = free_cell % n;
  const int id = static_cast<int>(stack.size());
  auto place = [&](int k2, Cell other) {
    owner[free_cell] = id;
    owner[k2] = id;
    Cell a{i, j};
    // Store each domino as (even cell, odd cell).
    stack.push_back(parity_of(i, j) == Parity::even ? Domino{a, other} : Domino{other, a});
    enumerate_from(m, n, owner, stack, out);
    stack.pop_back();
    owner[free_cell] = -1;
    owner[k2] = -1;
  };
  // The first free cell in row-major order has every cell before it covered,
  // so its partner is to the right or below.
  if (j + 1 < n && owner[free_cell + 1] < 0) place(free_cell + 1, {i, j + 1});
  if (i + 1 < m && owner[free_cell + n] < 0) place(free_cell + n, {i + 1, j});
}

}  // namespace

std::vector<Tiling> enumerate_tilings(int m, int n) {
  if (m < 1 || n < 1) throw PreconditionError("grid dimensions must be positive");
  if (static_cast<long long>(m) * n > kEnumerateMaxCells) {
    throw SizeLimitError("enumeration limited to m*n <= " + std::to_string(kEnumerateMaxCells));
  }
  std::vector<Tiling> out;
  if ((m * n) % 2 != 0) return out;
  std::vector<int> owner(static_cast<std::size_t>(m) * n, -1);
  std::vector<Domino> stack;
  enumerate_from(m, n, owner, stack, out);
  return out;
}

}  // namespace domino::tiling
