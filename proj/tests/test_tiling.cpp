#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "domino/counting.hpp"
#include "domino/errors.hpp"
#include "domino/lap.hpp"
#include "domino/tiling.hpp"
#include "support.hpp"
#include "tiling_oracles.hpp"

using namespace domino;
using namespace domino::tiling;
using testing::brute_force_min_tiling_cost;
using testing::proxy_cost;

namespace {

double brute_force_lap(const std::vector<std::vector<double>>& c) {
  std::vector<int> perm(c.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t a = 0; a < perm.size(); ++a) s += c[a][perm[a]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

// ------------------------------------------------------------ downsampling

TEST_CASE("checkerboard downsample of a 2x4 image") {
  // [[a,b,c,d],[e,f,g,h]] -> even [[a,c],[f,h]], odd [[b,d],[e,g]]
  const Image img(2, 4, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
  const auto [even, odd] = checkerboard_downsample(img);
  CHECK(even == Image(2, 2, std::vector<double>{1, 3, 6, 8}));
  CHECK(odd == Image(2, 2, std::vector<double>{2, 4, 5, 7}));
}

TEST_CASE("checkerboard downsample partitions the pixels") {
  std::mt19937_64 rng(5);
  const Image img = testing::random_image(rng, 7, 10);
  const auto [even, odd] = checkerboard_downsample(img);
  CHECK(even.width() == 5);
  std::vector<double> all(img.pixels().begin(), img.pixels().end());
  std::vector<double> parts(even.pixels().begin(), even.pixels().end());
  parts.insert(parts.end(), odd.pixels().begin(), odd.pixels().end());
  std::sort(all.begin(), all.end());
  std::sort(parts.begin(), parts.end());
  CHECK(all == parts);
  CHECK_THROWS_AS(checkerboard_downsample(Image(2, 3)), PreconditionError);
}

// ----------------------------------------------------------------- padding

TEST_CASE("pad_to_even dimensions and crop inverse") {
  std::mt19937_64 rng(6);
  const Image even = testing::random_image(rng, 4, 4);
  CHECK(pad_to_even(even).image == even);
  for (auto [h, w] : {std::pair{3, 3}, {3, 4}, {4, 5}, {1, 1}, {5, 2}}) {
    const Image img = testing::random_image(rng, h, w);
    const Padded p = pad_to_even(img);
    CHECK(p.image.height() == h + h % 2);
    CHECK(p.image.width() == w + w % 2);
    CHECK(crop(p.image, p.crop) == img);
    // The added row/column repeats the edge.
    if (h % 2) CHECK(p.image(h, 0) == img(h - 1, 0));
    if (w % 2) CHECK(p.image(0, w) == img(0, w - 1));
  }
}

// ------------------------------------------------------------------- costs

TEST_CASE("neighbor_cost on constant and ramp images") {
  const Image flat(5, 6, 0.4);
  for (const Direction& d : kDirections) CHECK(neighbor_cost(flat, {2, 2}, d) == 0.0);

  const int w = 8;
  Image ramp(6, w);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < w; ++j) ramp(i, j) = static_cast<double>(j) / w;
  CHECK(neighbor_cost(ramp, {2, 3}, kDown) == 0.0);
  CHECK(neighbor_cost(ramp, {2, 3}, kRight) == doctest::Approx(2.0 / (w * w)).epsilon(1e-14));
  CHECK_THROWS_AS(neighbor_cost(ramp, {2, 3}, Direction{1, 1}), PreconditionError);
}

TEST_CASE("neighbor_cost matches an independent evaluation, is symmetric and shift-invariant") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 6), w = 1 + static_cast<int>(rng() % 6);
    const Image img = testing::random_image(rng, h, w);
    Image shifted = img;
    for (double& v : shifted.pixels()) v += 0.25;
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        for (const Direction& d : kDirections) {
          const double c = neighbor_cost(img, {i, j}, d);
          CHECK(c >= 0.0);
          CHECK(c == doctest::Approx(proxy_cost(img, i, j, d.c1, d.c2)).epsilon(1e-15));
          CHECK(neighbor_cost(shifted, {i, j}, d) == doctest::Approx(c).epsilon(1e-12).scale(1.0));
          const int ni = i + d.c1, nj = j + d.c2;
          if (ni >= 0 && nj >= 0 && ni < h && nj < w) {
            CHECK(neighbor_cost(img, {ni, nj}, {-d.c1, -d.c2}) == doctest::Approx(c).epsilon(1e-15));
          }
        }
      }
    }
  }
}

TEST_CASE("build_cost_matrix adjacency") {
  const auto two = build_cost_matrix(Image(2, 2, 0.5), Parity::even);
  CHECK(two.agents.size() == 2);
  CHECK(two.tasks.size() == 2);
  for (int a = 0; a < 2; ++a) CHECK(two.costs.row(a).size() == 2);

  std::mt19937_64 rng(8);
  const Image img = testing::random_image(rng, 4, 4);
  for (Parity p : {Parity::even, Parity::odd}) {
    const auto g = build_cost_matrix(img, p);
    CHECK(g.agents.size() == 8);
    CHECK(g.tasks.size() == 8);
    std::size_t entries = 0;
    for (int a = 0; a < 8; ++a) {
      const auto row = g.costs.row(a);
      CHECK(row.size() >= 2);
      CHECK(row.size() <= 4);
      entries += row.size();
      for (const auto& e : row) {
        const Cell ag = g.agents[a], tk = g.tasks[e.task];
        CHECK(std::abs(ag.i - tk.i) + std::abs(ag.j - tk.j) == 1);
        CHECK(parity_of(ag.i, ag.j) == p);
      }
    }
    CHECK(entries == 24);  // edges of the 4x4 grid graph
  }
  CHECK_THROWS_AS(build_cost_matrix(Image(3, 3), Parity::even), PreconditionError);
}

// --------------------------------------------------------------------- LAP

TEST_CASE("solve_lap small dense instances") {
  auto a = solve_lap(CostMatrix::dense({{0, 1}, {1, 0}}));
  CHECK(a.task_of_agent == std::vector<int>{0, 1});
  CHECK(a.total_cost == 0.0);
  a = solve_lap(CostMatrix::dense({{1, 2}, {3, 1}}));
  CHECK(a.task_of_agent == std::vector<int>{0, 1});
  CHECK(a.total_cost == 2.0);
}

TEST_CASE("solve_lap matches brute force on random dense matrices") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::uniform_int_distribution<int> small(0, 3);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 7;
    std::vector<std::vector<double>> c(n, std::vector<double>(n));
    // Integer costs on some trials to provoke ties.
    for (auto& row : c)
      for (double& v : row) v = trial % 2 ? u(rng) : small(rng);
    const Assignment a = solve_lap(CostMatrix::dense(c));
    double total = 0.0;
    std::vector<int> seen(n, 0);
    for (int r = 0; r < n; ++r) {
      total += c[r][a.task_of_agent[r]];
      ++seen[a.task_of_agent[r]];
      CHECK(a.agent_of_task[a.task_of_agent[r]] == r);
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
    CHECK(total == doctest::Approx(a.total_cost).epsilon(1e-12));
    CHECK(std::abs(total - brute_force_lap(c)) < 1e-9);
  }
}

TEST_CASE("solve_lap respects forbidden entries and reports infeasibility") {
  const double inf = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 6;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, inf));
    CostMatrix sparse(n);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);  // guarantees one feasible matching
    for (int a = 0; a < n; ++a) {
      std::vector<CostMatrix::Entry> row;
      for (int t = 0; t < n; ++t) {
        if (t == perm[a] || rng() % 3 == 0) {
          dense[a][t] = u(rng);
          row.push_back({t, dense[a][t]});
        }
      }
      sparse.add_agent(row);
    }
    const Assignment a = solve_lap(sparse);
    for (int r = 0; r < n; ++r) CHECK(sparse.permitted(r, a.task_of_agent[r]));
    CHECK(std::abs(a.total_cost - brute_force_lap(dense)) < 1e-9);
  }

  CostMatrix blocked(2);
  const CostMatrix::Entry only_zero[] = {{0, 1.0}};
  blocked.add_agent(only_zero);
  blocked.add_agent(only_zero);
  CHECK_THROWS_AS(solve_lap(blocked), InfeasibleError);
}

// ----------------------------------------------------------------- tilings

TEST_CASE("domino_tiling reaches the enumerated minimum on small grids") {
  std::mt19937_64 rng(11);
  const std::pair<int, int> shapes[] = {{2, 2}, {2, 3}, {3, 2}, {2, 4}, {4, 2}, {3, 4}, {4, 3}, {4, 4}};
  for (int trial = 0; trial < 80; ++trial) {
    const auto [h, w] = shapes[trial % 8];
    const Image img = testing::random_image(rng, h, w);
    for (Parity p : {Parity::even, Parity::odd}) {
      const Tiling t = domino_tiling(img, p);
      CHECK(verify_tiling(t));
      CHECK(std::abs(tiling_cost(img, t) - brute_force_min_tiling_cost(img)) < 1e-9);
    }
  }
}

TEST_CASE("vertical stripes give vertical dominoes") {
  Image img(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) img(i, j) = j % 2;
  for (Parity p : {Parity::even, Parity::odd}) {
    const Tiling t = domino_tiling(img, p);
    for (const Domino& d : t.pairs) CHECK(d.first.j == d.second.j);
  }
}

TEST_CASE("constant image tiling is deterministic") {
  const Image flat(2, 2, 0.3);
  const Tiling a = domino_tiling(flat, Parity::even);
  const Tiling b = domino_tiling(flat, Parity::even);
  CHECK(a.pairs == b.pairs);
  CHECK(verify_tiling(a));
}

TEST_CASE("verify_tiling rejects broken tilings") {
  Tiling brick{{}, 4, 4};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; j += 2) brick.pairs.push_back({{i, j}, {i, j + 1}});
  CHECK(verify_tiling(brick));

  Tiling diagonal = brick;
  diagonal.pairs[0] = {{0, 0}, {1, 1}};
  CHECK_FALSE(verify_tiling(diagonal));

  Tiling duplicate = brick;
  duplicate.pairs[1] = duplicate.pairs[0];
  CHECK_FALSE(verify_tiling(duplicate));

  Tiling short_one = brick;
  short_one.pairs.pop_back();
  CHECK_FALSE(verify_tiling(short_one));
}

TEST_CASE("render_tiling invariants on random images with odd sizes") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 12), w = 1 + static_cast<int>(rng() % 12);
    if (h * w < 2) continue;
    const Image img = testing::random_image(rng, h, w);
    const DominoPair pair = pixel_domino_tilings(img);
    CHECK(verify_tiling(pair.even_tiling));
    CHECK(verify_tiling(pair.odd_tiling));
    CHECK(testing::render_violation(img, pair.even_tiling, Parity::even, pair.filled.even) == "");
    CHECK(testing::render_violation(img, pair.odd_tiling, Parity::odd, pair.filled.odd) == "");
  }
}

TEST_CASE("even-filled multiset is the even pixels twice") {
  std::mt19937_64 rng(13);
  const Image img = testing::random_image(rng, 6, 8);
  const FilledPair f = pixel_domino_pair(img);
  std::vector<double> expect, got(f.even.pixels().begin(), f.even.pixels().end());
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 8; ++j)
      if (parity_of(i, j) == Parity::even) expect.insert(expect.end(), 2, img(i, j));
  std::sort(expect.begin(), expect.end());
  std::sort(got.begin(), got.end());
  CHECK(expect == got);
  CHECK(pixel_domino_pair(Image(5, 5, 0.7)).even == Image(5, 5, 0.7));
}

TEST_CASE("render_tiling rejects mismatched or invalid tilings") {
  const Image img(4, 4, 0.5);
  Tiling t = domino_tiling(img, Parity::even);
  CHECK_THROWS_AS(render_tiling(Image(6, 6), t, Parity::even), PreconditionError);
  t.pairs[0] = t.pairs[1];
  CHECK_THROWS_AS(render_tiling(img, t, Parity::even), PreconditionError);
}

// ---------------------------------------------------------------- counting

TEST_CASE("tiling counts") {
  CHECK(count_tilings_formula(3, 3) == doctest::Approx(0.0));
  CHECK(std::round(count_tilings_formula(2, 2)) == 2.0);
  CHECK(std::round(count_tilings_formula(8, 8)) == 12988816.0);
  CHECK(count_tilings_exact(1, 2) == 1);
  CHECK(count_tilings_exact(4, 4) == 36);
  CHECK(count_tilings_exact(8, 8) == 12988816);
  CHECK(count_tilings_exact(3, 3) == 0);
  const int fib[] = {1, 2, 3, 5, 8};
  for (int n = 1; n <= 5; ++n) {
    CHECK(count_tilings_exact(2, n) == fib[n - 1]);
    CHECK(enumerate_tilings(2, n).size() == static_cast<std::size_t>(fib[n - 1]));
  }
  CHECK(enumerate_tilings(2, 2).size() == 2);
  CHECK(enumerate_tilings(2, 3).size() == 3);
  CHECK(enumerate_tilings(3, 3).empty());
}

TEST_CASE("exact counter agrees with an independent recurrence on 3 x n") {
  // T(3, 2k) satisfies a_k = 4 a_{k-1} - a_{k-2}, a_0 = 1, a_1 = 3.
  BigInt prev = 1, cur = 3;
  for (int k = 2; k <= 40; ++k) {
    const BigInt next = 4 * cur - prev;
    prev = cur;
    cur = next;
    CHECK(count_tilings_exact(3, 2 * k) == cur);
    CHECK(count_tilings_exact(2 * k, 3) == cur);
  }
}

TEST_CASE("enumerated tilings are valid and distinct") {
  const auto all = enumerate_tilings(4, 4);
  CHECK(all.size() == 36);
  std::set<std::vector<std::pair<int, int>>> keys;
  for (const Tiling& t : all) {
    CHECK(verify_tiling(t));
    std::vector<std::pair<int, int>> key;
    for (const Domino& d : t.pairs) key.emplace_back(d.first.i * 4 + d.first.j, d.second.i * 4 + d.second.j);
    std::sort(key.begin(), key.end());
    keys.insert(key);
  }
  CHECK(keys.size() == 36);
}

TEST_CASE("size limits") {
  CHECK(exact_count_supported(100, 100) == false);
  CHECK(exact_count_supported(16, 625));
  CHECK_THROWS_AS(count_tilings_exact(20, 20), SizeLimitError);
  CHECK_THROWS_AS(count_tilings_exact(2, 5001), SizeLimitError);
  CHECK_THROWS_AS(enumerate_tilings(5, 5), SizeLimitError);
}

// ------------------------------------------------------------------- fills

TEST_CASE("avg fill arithmetic") {
  // Gap (1,1) of a 3x3 keeping even pixels has neighbours {0, 0, 1, 1}.
  Image img(3, 3, std::vector<double>{9, 0, 9, 1, 9, 1, 9, 0, 9});
  const Image out = fill_avg_neighbor(img, Parity::odd);
  CHECK(out(1, 1) == doctest::Approx(0.5));
  // Corner gap averages only its two in-bounds neighbours.
  const Image corner = fill_avg_neighbor(img, Parity::even);
  CHECK(corner(0, 1) == doctest::Approx((9.0 + 9.0 + 9.0) / 3.0));
  Image c2(2, 2, std::vector<double>{5, 1, 3, 5});
  CHECK(fill_avg_neighbor(c2, Parity::odd)(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("fills on constant images and determinism") {
  const Image flat(5, 7, 0.2);
  for (Parity p : {Parity::even, Parity::odd}) {
    const Image avg = fill_avg_neighbor(flat, p);
    for (double v : avg.pixels()) CHECK(v == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(fill_random_neighbor(flat, p, 3) == flat);
    CHECK(fill_best_neighbor(flat, p) == flat);
  }
  std::mt19937_64 rng(14);
  const Image img = testing::random_image(rng, 9, 9);
  CHECK(fill_random_neighbor(img, Parity::even, 42) == fill_random_neighbor(img, Parity::even, 42));
  CHECK_FALSE(fill_random_neighbor(img, Parity::even, 42) == fill_random_neighbor(img, Parity::even, 43));
}

TEST_CASE("best fill on vertical stripes takes the vertical neighbour") {
  Image img(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) img(i, j) = j % 2;
  // Vertical neighbours carry the gap's own stripe value, horizontal ones the other.
  const Image out = fill_best_neighbor(img, Parity::even);
  CHECK(out == img);
}

TEST_CASE("fills satisfy their gap rules on random images") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 40; ++trial) {
    const int h = 1 + static_cast<int>(rng() % 10), w = 2 + static_cast<int>(rng() % 10);
    const Image img = testing::random_image(rng, h, w);
    for (Parity p : {Parity::even, Parity::odd}) {
      CHECK(testing::fill_violation(img, p, fill_avg_neighbor(img, p), fill_random_neighbor(img, p, trial),
                                    fill_best_neighbor(img, p)) == "");
    }
  }
}
