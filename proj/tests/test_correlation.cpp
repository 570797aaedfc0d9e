#include <doctest.h>

#include "oracles.hpp"
#include "setreg/correlation.hpp"
#include "setreg/representation.hpp"

using namespace setreg;

namespace {

Representation rep(ImageGrid g) { return {std::move(g), 1.0, ""}; }

}  // namespace

TEST_CASE("next_smooth_size") {
  CHECK(next_smooth_size(1) == 1);
  CHECK(next_smooth_size(11) == 12);
  CHECK(next_smooth_size(31) == 32);
  CHECK(next_smooth_size(511) == 512);
  CHECK(next_smooth_size(97) == 98);
}

TEST_CASE("cross_correlate_full") {
  SUBCASE("impulses") {
    ImageGrid a(5, 6), b(5, 6);
    a(0, 0) = 1.0;
    b(2, 3) = 1.0;
    const ShiftTable t = cross_correlate_full(a, b);
    CHECK(t.columns() == 9);
    CHECK(t.rows() == 11);
    for (int dy = -5; dy <= 5; ++dy)
      for (int dx = -4; dx <= 4; ++dx)
        CHECK(std::abs(t.at({dx, dy}) - (dx == 2 && dy == 3 ? 1.0 : 0.0)) <= 1e-12);
  }
  SUBCASE("constant grids count the overlap") {
    const int k = 7;
    const ShiftTable t = cross_correlate_full(ImageGrid(k, k, 0.5), ImageGrid(k, k, 0.5));
    for (int dy = -(k - 1); dy <= k - 1; ++dy)
      for (int dx = -(k - 1); dx <= k - 1; ++dx)
        CHECK(t.at({dx, dy}) == doctest::Approx((k - std::abs(dx)) * (k - std::abs(dy)) * 0.25));
  }
  SUBCASE("random pairs match spatial summation") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 5; ++trial) {
      const ImageGrid a = oracle::random_grid(rng, 16, 16), b = oracle::random_grid(rng, 16, 16);
      const ShiftTable t = cross_correlate_full(rep(a), rep(b));
      for (int dy = -15; dy <= 15; ++dy)
        for (int dx = -15; dx <= 15; ++dx)
          CHECK(std::abs(t.at({dx, dy}) - oracle::xcorr(a, b, {dx, dy})) <= 1e-6);
    }
  }
  SUBCASE("non-square and odd sizes") {
    std::mt19937_64 rng(22);
    const ImageGrid a = oracle::random_grid(rng, 13, 7), b = oracle::random_grid(rng, 13, 7);
    const ShiftTable t = cross_correlate_full(a, b);
    for (int dy = -6; dy <= 6; ++dy)
      for (int dx = -12; dx <= 12; ++dx)
        CHECK(std::abs(t.at({dx, dy}) - oracle::xcorr(a, b, {dx, dy})) <= 1e-9);
  }
  CHECK_THROWS_AS(cross_correlate_full(ImageGrid(4, 4), ImageGrid(4, 5)), std::invalid_argument);
}

TEST_CASE("build_table and lookup") {
  std::mt19937_64 rng(23);
  SUBCASE("self-correlation") {
    const Representation z = rep(oracle::random_grid(rng, 20, 20));
    const CorrelationTable t = build_table(z, z, {8, 0.25});
    CHECK(std::abs(t.lookup({0, 0}) - 1.0) <= 1e-9);
    CHECK(t.lookup({9, 0}) == CorrelationTable::kRejected);
    CHECK(t.lookup({0, -9}) == CorrelationTable::kRejected);
  }
  SUBCASE("overlap-restricted coefficients match the oracle") {
    const ImageGrid a = oracle::random_grid(rng, 12, 12), b = oracle::random_grid(rng, 12, 12);
    const CorrelationTable t = build_table(rep(a), rep(b), {4, 0.25});
    for (int dy = -4; dy <= 4; ++dy)
      for (int dx = -4; dx <= 4; ++dx)
        CHECK(std::abs(t.lookup({dx, dy}) - oracle::ncc(a, b, {dx, dy}, 4, 0.25)) <= 1e-9);
    CHECK(std::abs(t.lookup({3, -2}) - oracle::ncc(a, b, {3, -2}, 4, 0.25)) <= 1e-9);
  }
  SUBCASE("minimum overlap") {
    const ImageGrid a = oracle::random_grid(rng, 10, 10);
    const CorrelationTable t = build_table(rep(a), rep(a), {9, 0.5});
    CHECK(t.overlap_area({5, 0}) == 50);
    CHECK(t.lookup({5, 0}) != CorrelationTable::kRejected);
    CHECK(t.lookup({6, 0}) == CorrelationTable::kRejected);
    CHECK(t.lookup({3, 3}) == CorrelationTable::kRejected);  // 49 < 50
  }
  SUBCASE("zero energy") {
    const ImageGrid a = oracle::random_grid(rng, 10, 10);
    const CorrelationTable t = build_table(rep(a), rep(ImageGrid(10, 10)), {3, 0.25});
    CHECK(t.degenerate());
    CHECK(t.lookup({0, 0}) == 0.0);
    CHECK(t.lookup({4, 0}) == CorrelationTable::kRejected);
    // Energy confined to one corner: shifts that avoid it are uninformative, not rejected.
    ImageGrid corner(10, 10);
    corner(0, 0) = 1.0;
    const CorrelationTable c = build_table(rep(a), rep(corner), {3, 0.25});
    CHECK_FALSE(c.degenerate());
    CHECK(c.lookup({2, 0}) == 0.0);
  }
  SUBCASE("argument checks") {
    const Representation z = rep(oracle::random_grid(rng, 10, 8));
    CHECK_THROWS_AS(build_table(z, z, {8, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(build_table(z, z, {-1, 0.25}), std::invalid_argument);
    CHECK_THROWS_AS(build_table(z, z, {3, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(build_table(z, z, {3, 1.5}), std::invalid_argument);
    CHECK_THROWS_AS(build_table(z, rep(ImageGrid(8, 10)), {3, 0.25}), std::invalid_argument);
    CHECK_NOTHROW(build_table(z, z, {7, 1.0}));
  }
}

TEST_CASE("integral-image denominators match direct overlap sums") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const ImageGrid a = oracle::random_grid(rng, 16, 16), b = oracle::random_grid(rng, 16, 16);
    const CorrelationTable t = build_table(rep(a), rep(b), {15, 0.01});
    for (int dy = -15; dy <= 15; ++dy) {
      for (int dx = -15; dx <= 15; ++dx) {
        const auto [ea, eb] = t.overlap_energies({dx, dy});
        const oracle::Overlap o = oracle::overlap(a, b, {dx, dy});
        CHECK(t.overlap_area({dx, dy}) == o.area);
        CHECK(std::abs(ea - o.ea) <= 1e-9 * o.ea);
        CHECK(std::abs(eb - o.eb) <= 1e-9 * o.eb);
      }
    }
  }
}

TEST_CASE("table properties") {
  std::mt19937_64 rng(25);
  std::uniform_int_distribution<int> side(8, 24);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = side(rng), h = side(rng);
    const int max_shift = std::min(w, h) - 1;
    const Representation a = abs_highpass(oracle::random_grid(rng, w, h), 2.0);
    const Representation b = abs_highpass(oracle::random_grid(rng, w, h), 2.0);
    const CorrelationTable ab = build_table(a, b, {max_shift, 0.2});
    const CorrelationTable ba = build_table(b, a, {max_shift, 0.2});
    for (int dy = -max_shift; dy <= max_shift; ++dy) {
      for (int dx = -max_shift; dx <= max_shift; ++dx) {
        const double v = ab.lookup({dx, dy});
        CHECK(std::abs(v - ba.lookup({-dx, -dy})) <= 1e-9);
        if (v != CorrelationTable::kRejected) CHECK((v >= 0.0 && v <= 1.0 + 1e-9));
      }
    }
  }
}

TEST_CASE("shift recovery") {
  std::mt19937_64 rng(26);
  const int w = 32, h = 32, m = 10;
  const ImageGrid base = oracle::random_grid(rng, w + 2 * m, h + 2 * m);
  for (int ty = -m; ty <= m; ty += 3) {
    for (int tx = -m; tx <= m; tx += 3) {
      // b(r) = a(r - t)
      const ImageGrid a = oracle::crop(base, m, m, w, h);
      const ImageGrid b = oracle::crop(base, m - tx, m - ty, w, h);
      const CorrelationTable t = build_table(rep(a), rep(b), {m, 0.25});
      Shift best{-m - 1, 0};
      double best_v = -2.0;
      for (int dy = -m; dy <= m; ++dy)
        for (int dx = -m; dx <= m; ++dx)
          if (t.lookup({dx, dy}) > best_v) {
            best_v = t.lookup({dx, dy});
            best = {dx, dy};
          }
      CHECK(best == Shift{tx, ty});
    }
  }
}

TEST_CASE("corner sums") {
  std::mt19937_64 rng(27);
  const ImageGrid g = oracle::random_grid(rng, 9, 7);
  const CornerSums s(g);
  CHECK(s.total() == doctest::Approx(oracle::rect_sum(g, 0, 0, 9, 7)).epsilon(1e-14));
  for (int a = 0; a <= 9; ++a) {
    for (int b = 0; b <= 7; ++b) {
      const int rects[4][4] = {{0, 0, a, b}, {a, 0, 9, b}, {0, b, a, 7}, {a, b, 9, 7}};
      for (const auto& r : rects) {
        const double want = oracle::rect_sum(g, r[0], r[1], r[2], r[3]);
        CHECK(std::abs(s.corner_rect(r[0], r[1], r[2], r[3]) - want) <= 1e-14 * std::max(1.0, want));
      }
    }
  }
  CHECK(s.corner_rect(3, 3, 3, 5) == 0.0);
  CHECK_THROWS_AS(s.corner_rect(1, 1, 4, 4), std::invalid_argument);
}
