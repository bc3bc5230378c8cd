#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "kgran/metrics.hpp"
#include "kgran/rng.hpp"
#include "kgran/trainer.hpp"

namespace kgran {
namespace {

constexpr auto P = Polarity::Positive;
constexpr auto N = Polarity::Negative;
constexpr auto O = Polarity::Neutral;

// Counts directly over label lists, independent of ConfusionMatrix.
struct Oracle {
  double accuracy;
  double macro_f1;
};

Oracle brute_force(const std::vector<Polarity>& gold, const std::vector<Polarity>& pred) {
  std::size_t right = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) right += gold[i] == pred[i];
  double f1_sum = 0;
  for (Polarity c : kAllPolarities) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      if (pred[i] == c && gold[i] == c) tp += 1;
      if (pred[i] == c && gold[i] != c) fp += 1;
      if (pred[i] != c && gold[i] == c) fn += 1;
    }
    const double p = tp + fp > 0 ? tp / (tp + fp) : 0;
    const double r = tp + fn > 0 ? tp / (tp + fn) : 0;
    f1_sum += p + r > 0 ? 2 * p * r / (p + r) : 0;
  }
  return {static_cast<double>(right) / static_cast<double>(gold.size()), f1_sum / 3.0};
}

Metrics metrics_of(const std::vector<Polarity>& gold, const std::vector<Polarity>& pred) {
  return compute_metrics(confusion_from(gold, pred));
}

TEST(Metrics, WorkedExample) {
  const std::vector<Polarity> gold{P, P, N, N, O, O};
  const std::vector<Polarity> pred{P, N, N, N, O, P};
  const Metrics m = metrics_of(gold, pred);
  EXPECT_DOUBLE_EQ(m.accuracy, 4.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.precision[0], 0.5);
  EXPECT_DOUBLE_EQ(m.recall[0], 0.5);
  EXPECT_DOUBLE_EQ(m.precision[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall[1], 1.0);
  EXPECT_DOUBLE_EQ(m.precision[2], 1.0);
  EXPECT_DOUBLE_EQ(m.recall[2], 0.5);
  EXPECT_NEAR(m.f1[1], 0.8, 1e-15);
  EXPECT_NEAR(m.f1[2], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.macro_f1, (0.5 + 0.8 + 2.0 / 3.0) / 3.0, 1e-15);
  EXPECT_NEAR(m.macro_f1, 0.6556, 5e-5);
}

TEST(Metrics, AbsentClassScoresZero) {
  const Metrics m = metrics_of({P, P}, {P, P});
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.f1[1], 0.0);
  EXPECT_EQ(m.precision[2], 0.0);
  EXPECT_EQ(m.recall[2], 0.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, 1.0 / 3.0);
}

TEST(Metrics, RandomAgainstBruteForce) {
  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<Polarity> gold(n), pred(n);
    for (std::size_t i = 0; i < n; ++i) {
      gold[i] = polarity_from_index(rng.below(3));
      pred[i] = polarity_from_index(rng.below(3));
    }
    const Metrics m = metrics_of(gold, pred);
    const Oracle o = brute_force(gold, pred);
    ASSERT_NEAR(m.accuracy, o.accuracy, 1e-12);
    ASSERT_NEAR(m.macro_f1, o.macro_f1, 1e-12);
    std::size_t trace = 0;
    for (Polarity c : kAllPolarities) trace += m.confusion.at(c, c);
    ASSERT_EQ(m.accuracy, static_cast<double>(trace) / static_cast<double>(m.confusion.total()));
    ASSERT_GE(m.macro_f1, 0.0);
    ASSERT_LE(m.macro_f1, 1.0);

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<Polarity> g2(n), p2(n);
    for (std::size_t i = 0; i < n; ++i) {
      g2[i] = gold[perm[i]];
      p2[i] = pred[perm[i]];
    }
    const Metrics shuffled = metrics_of(g2, p2);
    ASSERT_EQ(shuffled.accuracy, m.accuracy);
    ASSERT_EQ(shuffled.macro_f1, m.macro_f1);
  }
}

TEST(Metrics, ConfusionBookkeeping) {
  ConfusionMatrix a = confusion_from(std::vector<Polarity>{P, N}, std::vector<Polarity>{N, N});
  const ConfusionMatrix b = confusion_from(std::vector<Polarity>{O}, std::vector<Polarity>{P});
  a.merge(b);
  EXPECT_EQ(a.total(), 3u);
  EXPECT_EQ(a.correct(), 1u);
  EXPECT_EQ(a.gold_count(P), 1u);
  EXPECT_EQ(a.predicted_count(N), 2u);
  EXPECT_EQ(a.at(O, P), 1u);
}

TEST(Metrics, Errors) {
  EXPECT_THROW(compute_metrics(ConfusionMatrix{}), std::invalid_argument);
  EXPECT_THROW(confusion_from(std::vector<Polarity>{P}, std::vector<Polarity>{}), std::invalid_argument);
}

TEST(Metrics, FormatSchema) {
  const Metrics m = metrics_of({P, P, N, N, O, O}, {P, N, N, N, O, P});
  EXPECT_EQ(format_metrics(m),
            "# kgran metrics v1\n"
            "samples\t6\n"
            "accuracy\t0.666666667\n"
            "macro_f1\t0.655555556\n"
            "class\tpositive\tprecision=0.5\trecall=0.5\tf1=0.5\n"
            "class\tnegative\tprecision=0.666666667\trecall=1\tf1=0.8\n"
            "class\tneutral\tprecision=1\trecall=0.5\tf1=0.666666667\n"
            "confusion\tpositive\t1\t1\t0\n"
            "confusion\tnegative\t0\t2\t0\n"
            "confusion\tneutral\t1\t0\t1\n");
}

std::vector<Sentence> labelled(std::size_t pos, std::size_t neg, std::size_t neu) {
  std::vector<Sentence> out;
  auto push = [&](std::size_t count, Polarity p) {
    for (std::size_t i = 0; i < count; ++i) out.push_back(Sentence{"s", {"x"}, {1, 1}, p});
  };
  push(pos, P);
  push(neg, N);
  push(neu, O);
  return out;
}

TEST(Baseline, MajorityOnRestaurantSizedSplit) {
  const auto test = labelled(728, 196, 196);
  const Metrics m = majority_baseline(labelled(2164, 807, 637), test);
  EXPECT_DOUBLE_EQ(m.accuracy, 728.0 / 1120.0);
  EXPECT_NEAR(m.accuracy, 0.65, 1e-12);
  const double f1 = 2 * (728.0 / 1120.0) / (728.0 / 1120.0 + 1.0);
  EXPECT_NEAR(m.macro_f1, f1 / 3.0, 1e-12);
}

TEST(Baseline, MajorityClassTiesAndErrors) {
  EXPECT_EQ(majority_class(labelled(1, 2, 2)), N);
  EXPECT_EQ(majority_class(labelled(0, 0, 1)), O);
  EXPECT_EQ(majority_class(labelled(3, 3, 3)), P);
  EXPECT_THROW(majority_class({}), std::invalid_argument);
  EXPECT_THROW(majority_baseline(labelled(1, 0, 0), {}), std::invalid_argument);
}

}  // namespace
}  // namespace kgran
