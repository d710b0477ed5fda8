#include <gtest/gtest.h>

#include <cmath>

#include "dasml/core_math.hpp"
#include "dasml/rng.hpp"
#include "oracles.hpp"

using namespace dasml;

namespace {

Vector random_unit(SeededRng& rng, std::size_t d) {
  Vector v(d);
  for (auto& x : v) x = rng.normal();
  return l2_normalize(v);
}

}  // namespace

TEST(L2Normalize, Examples) {
  auto v = l2_normalize(Vector{3, 4});
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
  EXPECT_EQ(l2_normalize(Vector{1, 0, 0}), (Vector{1, 0, 0}));
  EXPECT_THROW(l2_normalize(Vector{0, 0}), ZeroNorm);
  EXPECT_THROW(l2_normalize(Vector{1e-13, 0}), ZeroNorm);
}

TEST(L2Normalize, UnitNormAndIdempotent) {
  SeededRng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    Vector v(1 + rng.uniform_index(20));
    for (auto& x : v) x = rng.uniform(-100, 100);
    auto u = l2_normalize(v);
    EXPECT_NEAR(l2_norm(u), 1.0, 1e-12);
    auto uu = l2_normalize(u);
    for (std::size_t k = 0; k < u.size(); ++k) EXPECT_NEAR(uu[k], u[k], 1e-15);
    // same direction
    EXPECT_NEAR(dot(u, v), l2_norm(v), 1e-9 * l2_norm(v));
  }
}

TEST(PairwiseDistances, Examples) {
  auto same = pairwise_distances(std::vector<Vector>{{1, 0}, {1, 0}});
  EXPECT_EQ(same, Matrix(2, 2, 0.0));
  auto ortho = pairwise_distances(std::vector<Vector>{{1, 0}, {0, 1}});
  EXPECT_NEAR(ortho(0, 1), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(ortho(1, 0), 1.41421, 1e-5);
  EXPECT_EQ(ortho(0, 0), 0.0);
  EXPECT_THROW(pairwise_distances(std::vector<Vector>{{1, 0}, {1, 0, 0}}), DimensionMismatch);
}

TEST(PairwiseDistances, MatchesLoopOracle) {
  SeededRng rng(3);
  std::vector<Vector> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(random_unit(rng, 6));
  auto d = pairwise_distances(rows);
  auto o = oracle::distance_loop(rows);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(d(i, j), o[i][j], 1e-12);
}

TEST(PairwiseDistances, SymmetricBoundedTriangle) {
  SeededRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vector> rows;
    for (int i = 0; i < 8; ++i) rows.push_back(random_unit(rng, 4));
    auto d = pairwise_distances(rows);
    for (std::size_t i = 0; i < 8; ++i) {
      EXPECT_EQ(d(i, i), 0.0);
      for (std::size_t j = 0; j < 8; ++j) {
        EXPECT_EQ(d(i, j), d(j, i));
        EXPECT_GE(d(i, j), 0.0);
        EXPECT_LE(d(i, j), 2.0 + 1e-12);
        for (std::size_t k = 0; k < 8; ++k) EXPECT_LE(d(i, k), d(i, j) + d(j, k) + 1e-9);
      }
    }
  }
}

TEST(TopK, Examples) {
  EXPECT_EQ(top_k_indices(Vector{0.9, 0.1, 0.4, 0.1}, 2), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(top_k_indices(Vector{5, 5, 5}, 3), (std::vector<std::size_t>{0, 1, 2}));
  EXPECT_EQ(top_k_indices(Vector{1, 2, 2}, 1), (std::vector<std::size_t>{1}));
  EXPECT_THROW(top_k_indices(Vector{1, 2}, 3), KOutOfRange);
  EXPECT_THROW(top_k_indices(Vector{1, 2}, 0), KOutOfRange);
}

TEST(TopK, MatchesSortOracleWithTies) {
  SeededRng rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t d = 1 + rng.uniform_index(12);
    Vector v(d);
    // Few distinct values so ties are common.
    for (auto& x : v) x = static_cast<double>(rng.uniform_index(4));
    const std::size_t k = 1 + rng.uniform_index(d);
    auto got = top_k_indices(v, k);
    EXPECT_EQ(got, oracle::top_k_by_sort(v, k));
    EXPECT_EQ(got.size(), k);
    std::vector<std::size_t> all(d);
    for (std::size_t i = 0; i < d; ++i) all[i] = i;
    EXPECT_EQ(top_k_indices(v, d), all);
  }
}

TEST(SeededRng, SameSeedSameDraws) {
  SeededRng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(SeededRng, FrozenVectors) {
  // Reference SplitMix64 outputs for seed 0 and seed 1234567.
  SeededRng zero(0);
  EXPECT_EQ(zero.next_u64(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(zero.next_u64(), 0x6E789E6AA1B965F4ULL);
  SeededRng r(1234567);
  EXPECT_EQ(r.next_u64(), 6457827717110365317ULL);
  EXPECT_EQ(r.next_u64(), 3203168211198807973ULL);
}

TEST(SeededRng, SplitIsIndependentAndPure) {
  SeededRng parent(9);
  auto a = parent.split(1);
  auto b = parent.split(1);
  auto c = parent.split(2);
  EXPECT_EQ(parent.counter(), 0u);
  EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(a.next_u64(), c.next_u64());
}

TEST(SeededRng, UniformRanges) {
  SeededRng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.uniform_index(7), 7u);
  }
  EXPECT_EQ(rng.uniform(2.5, 2.5), 2.5);
}
