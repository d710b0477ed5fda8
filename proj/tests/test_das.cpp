#include <gtest/gtest.h>

#include <cmath>

#include "dasml/das.hpp"
#include "dasml/losses.hpp"
#include "oracles.hpp"

using namespace dasml;

namespace {

Vector random_unit(SeededRng& rng, std::size_t d) {
  Vector v(d);
  for (auto& x : v) x = rng.normal();
  return l2_normalize(v);
}

std::vector<std::uint8_t> mask_vec(const ChannelMask& m, std::size_t c) {
  auto r = m.row(c);
  return {r.begin(), r.end()};
}

}  // namespace

TEST(Frm, CountingExamples) {
  FrequencyRecorder p(2, 4);
  p.record(Vector{0.9, 0.1, 0.4, 0.1}, 0, 2);
  EXPECT_EQ(std::vector<std::uint64_t>(p.row(0).begin(), p.row(0).end()),
            (std::vector<std::uint64_t>{1, 0, 1, 0}));
  p.record(Vector{0.1, 0.8, 0.6, 0.0}, 0, 2);
  EXPECT_EQ(std::vector<std::uint64_t>(p.row(0).begin(), p.row(0).end()),
            (std::vector<std::uint64_t>{1, 1, 2, 0}));
  p.record(Vector{0.1, 0.8, 0.6, 0.0}, 1, 2);
  EXPECT_EQ(p.count(0, 1), 1u);
  EXPECT_EQ(p.count(1, 1), 1u);
  EXPECT_THROW(p.record(Vector{1, 0, 0, 0}, 2, 1), LabelOutOfRange);
}

TEST(Frm, MatchesStreamingCounterAndRowSums) {
  SeededRng rng(3);
  FrequencyRecorder p(3, 6);
  oracle::CounterFrm o;
  std::vector<std::uint64_t> seen(3, 0);
  for (int i = 0; i < 500; ++i) {
    auto v = random_unit(rng, 6);
    const std::size_t c = rng.uniform_index(3);
    p.record(v, c, 2);
    o.add(v, c, 2);
    ++seen[c];
  }
  for (std::size_t c = 0; c < 3; ++c) {
    std::uint64_t sum = 0;
    for (std::size_t k = 0; k < 6; ++k) {
      EXPECT_EQ(p.count(c, k), o.at(c, k));
      sum += p.count(c, k);
    }
    EXPECT_EQ(sum, 2 * seen[c]);
  }
}

TEST(Mask, Examples) {
  FrequencyRecorder p(2, 4);
  p.record(Vector{0.9, 0.1, 0.4, 0.1}, 0, 2);
  p.record(Vector{0.1, 0.8, 0.6, 0.0}, 0, 2);
  auto m = compute_mask(p, 2);
  EXPECT_EQ(mask_vec(m, 0), (std::vector<std::uint8_t>{1, 0, 1, 0}));
  EXPECT_EQ(mask_vec(m, 1), (std::vector<std::uint8_t>{1, 1, 0, 0}));  // untouched row: all ties
  EXPECT_EQ(mask_vec(compute_mask(p, 4), 0), (std::vector<std::uint8_t>{1, 1, 1, 1}));
  EXPECT_THROW(compute_mask(p, 5), KOutOfRange);
}

TEST(Mask, InvariantUnderRowScaling) {
  SeededRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    FrequencyRecorder once(1, 5), thrice(1, 5);
    for (int i = 0; i < 6; ++i) {
      auto v = random_unit(rng, 5);
      once.record(v, 0, 2);
      for (int r = 0; r < 3; ++r) thrice.record(v, 0, 2);
    }
    for (std::size_t k = 1; k <= 5; ++k)
      EXPECT_EQ(mask_vec(compute_mask(once, k), 0), mask_vec(compute_mask(thrice, k), 0));
  }
}

TEST(Scaling, Examples) {
  const std::vector<std::uint8_t> mask{1, 0, 1, 0};
  EXPECT_EQ(scaling_from_gamma(mask, Vector{1.2, 0.7, 1.4, 0.9}), (Vector{1.2, 1, 1.4, 1}));
  SeededRng rng(1);
  EXPECT_EQ(scaling_factor(mask, 0.0, rng), (Vector{1, 1, 1, 1}));
}

TEST(Scaling, DrawsStayInRange) {
  const std::vector<std::uint8_t> mask{1, 0, 1, 1};
  SeededRng rng(2);
  double sum = 0;
  int count = 0;
  for (int i = 0; i < 10000; ++i) {
    auto s = scaling_factor(mask, 0.01, rng);
    EXPECT_EQ(s[1], 1.0);
    for (std::size_t k : {0, 2, 3}) {
      EXPECT_GE(s[k], 0.99);
      EXPECT_LE(s[k], 1.01);
      sum += s[k];
      ++count;
    }
  }
  EXPECT_NEAR(sum / count, 1.0, 0.001);
}

TEST(Bank, PairOrderAndFill) {
  TransformationBank bank(2, 10, 2);
  auto x = Matrix::from_rows({{1, 0}, {0, 1}});
  bank.update(x, std::vector<std::size_t>{1, 1});
  EXPECT_EQ(bank.filled(1), 2u);
  EXPECT_EQ(bank.filled(0), 0u);
  EXPECT_EQ(Vector(bank.slot(1, 0).begin(), bank.slot(1, 0).end()), (Vector{1, -1}));
  EXPECT_EQ(Vector(bank.slot(1, 1).begin(), bank.slot(1, 1).end()), (Vector{-1, 1}));
}

TEST(Bank, RingOverwrite) {
  TransformationBank bank(1, 2, 1);
  bank.enqueue(0, Vector{1});
  bank.enqueue(0, Vector{2});
  bank.enqueue(0, Vector{3});
  EXPECT_EQ(bank.slot(0, 0)[0], 3.0);
  EXPECT_EQ(bank.slot(0, 1)[0], 2.0);
  EXPECT_EQ(bank.filled(0), 2u);
  EXPECT_EQ(bank.cursor(0), 1u);
}

TEST(Bank, SingletonGroupSkipped) {
  TransformationBank bank(3, 4, 2);
  bank.update(Matrix::from_rows({{1, 0}, {0, 1}}), std::vector<std::size_t>{0, 2});
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(bank.filled(c), 0u);
  EXPECT_THROW(bank.update(Matrix::from_rows({{1, 0}}), std::vector<std::size_t>{3}),
               LabelOutOfRange);
}

TEST(Bank, MatchesBoundedQueue) {
  SeededRng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t z = 1 + rng.uniform_index(5);
    TransformationBank bank(3, z, 2);
    oracle::BoundedQueueBank ref{z, {}};
    for (int i = 0; i < 20; ++i) {
      const std::size_t c = rng.uniform_index(3);
      Vector t{rng.uniform(), rng.uniform()};
      bank.enqueue(c, t);
      ref.push(c, t);
    }
    for (std::size_t c = 0; c < 3; ++c) {
      auto& q = ref.items[c];
      ASSERT_EQ(bank.filled(c), q.size());
      // oldest item sits at the cursor once the ring is full
      const std::size_t start = q.size() < z ? 0 : bank.cursor(c);
      for (std::size_t i = 0; i < q.size(); ++i) {
        auto s = bank.slot(c, (start + i) % z);
        EXPECT_EQ(Vector(s.begin(), s.end()), q[i]);
      }
    }
  }
}

TEST(Shifting, Examples) {
  TransformationBank bank(2, 10, 2);
  SeededRng rng(1);
  EXPECT_EQ(shifting_factor(bank, 0, 0.01, rng), (Vector{0, 0}));
  bank.enqueue(0, Vector{1, -1});
  auto b = shifting_factor(bank, 0, 0.01, rng);
  EXPECT_DOUBLE_EQ(b[0], 0.01);
  EXPECT_DOUBLE_EQ(b[1], -0.01);
  EXPECT_THROW(shifting_factor(bank, 2, 0.01, rng), LabelOutOfRange);
}

TEST(Shifting, SlotChoiceUniform) {
  TransformationBank bank(1, 5, 1);
  bank.enqueue(0, Vector{1});
  bank.enqueue(0, Vector{2});
  SeededRng rng(3);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += shifting_factor(bank, 0, 1.0, rng)[0] == 1.0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(Produce, Examples) {
  auto a = produce_embedding(Vector{1, 0}, 0, 0, {1, 1}, {0, 1});
  ASSERT_TRUE(a);
  EXPECT_NEAR(a->value[0], 0.70711, 1e-5);
  EXPECT_NEAR(a->value[1], 0.70711, 1e-5);
  auto b = produce_embedding(Vector{0.6, 0.8}, 3, 0, {0.5, 1.0}, {0.1, -0.1});
  ASSERT_TRUE(b);
  EXPECT_NEAR(b->prenorm_norm, std::sqrt(0.4 * 0.4 + 0.7 * 0.7), 1e-15);
  EXPECT_NEAR(b->value[0], 0.49614, 1e-5);
  EXPECT_NEAR(b->value[1], 0.86824, 1e-5);
  EXPECT_EQ(b->label, 3u);
  EXPECT_FALSE(produce_embedding(Vector{1, 0}, 0, 0, {1, 1}, {-1, 0}));
}

TEST(Produce, IdentityWithoutRadiusOrBank) {
  SeededRng rng(4);
  FrequencyRecorder p(2, 6);
  auto mask = compute_mask(p, 3);
  TransformationBank bank(2, 10, 6);
  DasConfig cfg;
  cfg.scale_radius = 0.0;
  cfg.produce_per_anchor = 5;
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_unit(rng, 6);
    auto out = das_produce(v, 1, 0, &mask, bank, cfg, rng);
    ASSERT_EQ(out.size(), 5u);
    for (auto& e : out)
      for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(e.value[k], v[k], 1e-12);
  }
}

TEST(Produce, StaysNearAnchorAndUnitNorm) {
  SeededRng rng(6);
  const std::size_t d = 16;
  FrequencyRecorder p(2, d);
  TransformationBank bank(2, 10, d);
  for (int i = 0; i < 30; ++i) {
    auto a = random_unit(rng, d), b = random_unit(rng, d);
    p.record(a, 0, 4);
    Vector t(d);
    for (std::size_t k = 0; k < d; ++k) t[k] = a[k] - b[k];
    bank.enqueue(0, t);
  }
  auto mask = compute_mask(p, 4);
  DasConfig cfg;
  for (int trial = 0; trial < 1000; ++trial) {
    auto v = random_unit(rng, d);
    for (auto& e : das_produce(v, 0, 0, &mask, bank, cfg, rng)) {
      EXPECT_NEAR(l2_norm(e.value), 1.0, 1e-12);
      EXPECT_GE(dot(e.value, v), 1.0 - 10 * (cfg.scale_radius + cfg.shift_ratio));
      EXPECT_EQ(e.label, 0u);
    }
  }
}

TEST(Produce, DroppedCountAndT) {
  TransformationBank bank(1, 1, 2);
  bank.enqueue(0, Vector{-1, 0});
  DasConfig cfg;
  cfg.shift_ratio = 1.0;
  cfg.produce_per_anchor = 4;
  cfg.use_scaling = false;
  SeededRng rng(1);
  std::size_t dropped = 0;
  auto out = das_produce(Vector{1, 0}, 0, 0, nullptr, bank, cfg, rng, &dropped);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(dropped, 4u);
}

TEST(Produce, ConfigValidation) {
  DasConfig cfg;
  EXPECT_NO_THROW(cfg.validate(16));
  EXPECT_THROW(cfg.validate(3), InvalidConfig);
  cfg.scale_radius = 1.0;
  EXPECT_THROW(cfg.validate(16), InvalidConfig);
  DasConfig z;
  z.bank_capacity = 0;
  EXPECT_THROW(z.validate(16), InvalidConfig);
}

TEST(DasBackward, LossThroughProductionMatchesFiniteDifference) {
  SeededRng rng(11);
  const std::size_t d = 5;
  int checked = 0;
  while (checked < 50) {
    // rows: anchor 0 (label 0), positive 1 (label 0), negative 2 (label 1);
    // row 3 is produced from row 0 and used as an extra anchor.
    std::vector<Vector> x{random_unit(rng, d), random_unit(rng, d), random_unit(rng, d)};
    Vector s(d), b(d);
    for (auto& e : s) e = rng.uniform(0.7, 1.3);
    for (auto& e : b) e = rng.uniform(-0.2, 0.2);
    const TripletSet t{{0, 1, 2}, {3, 1, 2}, {1, 3, 2}};
    auto value = [&](const Vector& v0) {
      auto p = produce_embedding(v0, 0, 0, s, b);
      return triplet_loss(oracle::rows_to_matrix({v0, x[1], x[2], p->value}), t, 0.5).value;
    };
    auto p = produce_embedding(x[0], 0, 0, s, b);
    const auto all = oracle::rows_to_matrix({x[0], x[1], x[2], p->value});
    bool near_kink = false;
    for (auto& e : t) {
      const double h = l2_distance(all.row(e.anchor), all.row(e.positive)) -
                       l2_distance(all.row(e.anchor), all.row(e.negative)) + 0.5;
      near_kink = near_kink || std::abs(h) < 1e-3;
    }
    if (near_kink) continue;
    auto out = triplet_loss(all, t, 0.5);
    Vector g(out.grad.row(0).begin(), out.grad.row(0).end());
    auto via = das_backward(*p, out.grad.row(3));
    for (std::size_t k = 0; k < d; ++k) g[k] += via[k];
    EXPECT_LT(oracle::relative_error(g, oracle::numeric_gradient(value, x[0])), 1e-4);
    ++checked;
  }
}
