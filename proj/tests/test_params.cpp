#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "kgran/params.hpp"
#include "kgran/rng.hpp"

namespace kgran {
namespace {

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs = differs || x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, CounterAddressesTheStream) {
  Rng a(5);
  for (int i = 0; i < 10; ++i) a.next_u64();
  Rng b(5, 10);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  double total = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    total += u;
  }
  EXPECT_NEAR(total / 100000, 0.5, 0.005);
}

TEST(Rng, BelowStaysInRange) {
  Rng rng(2);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_THROW(rng.below(0), std::invalid_argument);
}

TEST(Rng, SplitStreamsAreIndependentOfParentPosition) {
  Rng parent(9);
  const Rng child = parent.split(1);
  parent.next_u64();
  EXPECT_EQ(parent.split(1), child);
  EXPECT_FALSE(parent.split(2) == child);
}

TEST(Rng, ShuffleIsAPermutationAndDeterministic) {
  std::vector<int> a(20), b(20);
  std::iota(a.begin(), a.end(), 0);
  b = a;
  Rng r1(3), r2(3);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  EXPECT_EQ(a, b);
  std::vector<int> sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(20);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(sorted, expect);
}

TEST(Rng, HashStringIsFnv1a) {
  EXPECT_EQ(hash_string(""), 0xCBF29CE484222325ULL);
  EXPECT_EQ(hash_string("a"), 0xAF63DC4C8601EC8CULL);
}

TEST(ParameterSet, NamesAreUnique) {
  ParameterSet<double> params;
  params.add("w", 2, 3);
  EXPECT_THROW(params.add("w", 1, 1), std::invalid_argument);
  EXPECT_NE(params.find("w"), nullptr);
  EXPECT_EQ(params.find("missing"), nullptr);
  EXPECT_EQ(params.scalar_count(), 6);
}

TEST(ParameterSet, UniformInitIsBoundedAndSeeded) {
  auto make = [](std::uint64_t seed) {
    auto params = std::make_unique<ParameterSet<double>>();
    params->add("a", 10, 10);
    params->add("b", 5, 1);
    Rng rng(seed);
    params->initialize_uniform(rng, 0.1);
    return params;
  };
  const auto p1 = make(1), p2 = make(1), p3 = make(2);
  for (std::size_t k = 0; k < p1->size(); ++k) {
    const auto& v = p1->items()[k].tensor.values();
    EXPECT_LE(v.cwiseAbs().maxCoeff(), 0.1);
    EXPECT_EQ(v, p2->items()[k].tensor.values());
    EXPECT_NE(v, p3->items()[k].tensor.values());
  }
}

TEST(ParameterSet, SnapshotRestoreAndNorm) {
  ParameterSet<double> params;
  params.add("a", 1, 2).values() << 1.0, 1.0;
  params.add("emb", 1, 1, false).values() << 5.0;
  params.add("b", 1, 1).values() << 1.41421356237309515;
  EXPECT_NEAR(params.regularized_squared_norm(), 4.0, 1e-15);
  const auto snap = params.snapshot();
  params.items()[0].tensor.values().setZero();
  params.restore(snap);
  EXPECT_EQ(params.items()[0].tensor.values()(0, 1), 1.0);
  EXPECT_TRUE(params.all_finite());
  params.items()[1].tensor.values()(0, 0) = std::nan("");
  EXPECT_FALSE(params.all_finite());
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  ParameterSet<double> params;
  params.add("w", 3, 2).values().setConstant(0.7);
  AdamState<double> adam(AdamOptions{0.01, 0.9, 0.999, 1e-8, 0.0});
  for (int i = 0; i < 10; ++i) {
    params.zero_grad();
    adam_step(params, adam);
  }
  EXPECT_EQ(params.items()[0].tensor.values(), Matrix<double>::Constant(3, 2, 0.7));
  EXPECT_EQ(adam.step_count(), 10);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  ParameterSet<double> params;
  auto& w = params.add("w", 1, 1);
  w.values()(0, 0) = 1.0;
  w.grad()(0, 0) = 0.3;
  AdamState<double> adam(AdamOptions{0.005, 0.9, 0.999, 1e-8, 0.0});
  adam_step(params, adam);
  EXPECT_NEAR(1.0 - w.values()(0, 0), 0.005 * 0.3 / (0.3 + 1e-8), 1e-15);
  EXPECT_NEAR(1.0 - w.values()(0, 0), 0.005, 1e-9);
}

TEST(Adam, L2AddsTwoLambdaThetaToRegularizedOnly) {
  ParameterSet<double> params;
  auto& reg = params.add("reg", 1, 1);
  auto& free = params.add("free", 1, 1, false);
  reg.values()(0, 0) = 2.0;
  free.values()(0, 0) = 2.0;
  AdamState<double> adam(AdamOptions{0.01, 0.9, 0.999, 1e-8, 0.5});
  params.zero_grad();
  adam_step(params, adam);
  EXPECT_NEAR(reg.values()(0, 0), 2.0 - 0.01, 1e-9);
  EXPECT_EQ(free.values()(0, 0), 2.0);
}

TEST(Adam, QuadraticLossDecreasesMonotonically) {
  ParameterSet<double> params;
  auto& w = params.add("w", 2, 1);
  w.values() << 1.5, -2.0;
  AdamState<double> adam(AdamOptions{0.005, 0.9, 0.999, 1e-8, 0.0});
  const Eigen::Vector2d scales(1.0, 4.0);
  auto loss = [&] { return (scales.array() * w.values().col(0).array().square()).sum(); };
  double previous = loss();
  for (int step = 0; step < 100; ++step) {
    w.grad().col(0) = 2.0 * scales.cwiseProduct(w.values().col(0));
    adam_step(params, adam);
    const double now = loss();
    EXPECT_LT(now, previous) << "step " << step;
    previous = now;
  }
}

TEST(Adam, StateShapeMismatchThrows) {
  ParameterSet<double> a;
  a.add("w", 1, 1);
  AdamState<double> adam;
  adam_step(a, adam);
  a.add("extra", 1, 1);
  EXPECT_THROW(adam_step(a, adam), ShapeError);
}

}  // namespace
}  // namespace kgran
