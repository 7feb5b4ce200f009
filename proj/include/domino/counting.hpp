#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

#include "domino/tiling.hpp"

namespace domino::tiling {

using BigInt = boost::multiprecision::cpp_int;

// Kasteleyn's closed-form product, evaluated in double precision. Only the
// mathematical value is integral; round before comparing.
double count_tilings_formula(int m, int n);

// Largest grid accepted by count_tilings_exact.
inline constexpr long long kExactMaxCells = 10'000;
// Largest narrow side accepted by count_tilings_exact (profile width).
inline constexpr int kExactMaxProfile = 16;

// Exact count by cell-by-cell broken-profile transfer over the narrow side.
// Throws SizeLimitError beyond kExactMaxCells or kExactMaxProfile.
BigInt count_tilings_exact(int m, int n);

bool exact_count_supported(int m, int n) noexcept;

inline constexpr int kEnumerateMaxCells = 24;

// Every domino tiling of an m x n grid by backtracking. m*n <= 24.
std::vector<Tiling> enumerate_tilings(int m, int n);

}  // namespace domino::tiling
