#include <gtest/gtest.h>

#include "fixture.hpp"
#include "kgran/pipeline.hpp"
#include "kgran/trainer.hpp"

namespace kgran {
namespace {

using testing::SyntheticSetup;

TEST(Trainer, ZeroEpochsReturnsInitializedModel) {
  const SyntheticSetup s(0);
  const auto result = train<double>(s.config, s.data, s.resources);
  EXPECT_TRUE(result.epoch_losses.empty());
  EXPECT_EQ(result.best_epoch, 0);
  KgranModel<double> fresh(s.config.model_dims());
  Rng rng(s.config.seed);
  fresh.initialize(rng, 0.1);
  for (std::size_t k = 0; k < fresh.params().size(); ++k) {
    EXPECT_EQ(result.model->params().items()[k].tensor.values(), fresh.params().items()[k].tensor.values());
  }
}

TEST(Trainer, SameSeedSameLossLog) {
  const SyntheticSetup s(4);
  const auto a = train<float>(s.config, s.data, s.resources);
  const auto b = train<float>(s.config, s.data, s.resources);
  ASSERT_EQ(a.epoch_losses.size(), 4u);
  EXPECT_EQ(a.epoch_losses, b.epoch_losses);
  const auto inputs = prepare_inputs<float>(s.data, s.resources);
  for (const auto& in : inputs) EXPECT_EQ(a.model->predict(in), b.model->predict(in));

  SyntheticSetup other(4);
  other.config.seed = 2;
  const auto c = train<float>(other.config, other.data, other.resources);
  EXPECT_NE(a.epoch_losses, c.epoch_losses);
}

TEST(Trainer, LossFallsOnSyntheticData) {
  const SyntheticSetup s(40);
  const auto r = train<float>(s.config, s.data, s.resources);
  ASSERT_EQ(r.epoch_losses.size(), 40u);
  EXPECT_LT(r.epoch_losses.back(), 0.5 * r.epoch_losses.front());
  for (double l : r.epoch_losses) EXPECT_GT(l, 0.0);
}

TEST(Trainer, CallbackStopsEarly) {
  const SyntheticSetup s(50);
  int calls = 0;
  const auto r = train<float>(s.config, s.data, s.resources, nullptr, [&](const EpochReport& rep, const auto&) {
    ++calls;
    EXPECT_EQ(rep.epoch, calls);
    EXPECT_FALSE(rep.validation_accuracy.has_value());
    return rep.epoch < 3;
  });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(r.epoch_losses.size(), 3u);
  EXPECT_EQ(r.best_epoch, 3);
}

TEST(Trainer, ValidationKeepsBestEpoch) {
  const SyntheticSetup s(12);
  std::vector<double> accuracies;
  std::vector<std::vector<Matrix<float>>> snapshots;
  const auto r = train<float>(s.config, s.data, s.resources, &s.data, [&](const EpochReport& rep, const auto& m) {
    accuracies.push_back(*rep.validation_accuracy);
    snapshots.push_back(m.params().snapshot());
    return true;
  });
  std::size_t best = 0;
  for (std::size_t e = 1; e < accuracies.size(); ++e) {
    if (accuracies[e] > accuracies[best]) best = e;
  }
  EXPECT_EQ(r.best_epoch, static_cast<int>(best) + 1);
  EXPECT_EQ(r.model->params().snapshot(), snapshots[best]);
  EXPECT_DOUBLE_EQ(evaluate(*r.model, s.data, s.resources).accuracy, accuracies[best]);
}

TEST(Trainer, Errors) {
  SyntheticSetup s(1);
  EXPECT_THROW(train<float>(s.config, {}, s.resources), std::invalid_argument);
  Config wrong = s.config;
  wrong.emb_dim = 10;
  EXPECT_THROW(train<float>(wrong, s.data, s.resources), ShapeError);
  wrong = s.config;
  wrong.hidden_fused_dim = 5;
  EXPECT_THROW(train<float>(wrong, s.data, s.resources), ConfigError);
  const KgranModel<float> model(s.config.model_dims());
  EXPECT_THROW(evaluate(model, {}, s.resources), std::invalid_argument);
}

TEST(Trainer, NonFiniteParametersAreReported) {
  const SyntheticSetup s(1);
  auto r = train<float>(s.config, s.data, s.resources);
  r.model->params().items()[0].tensor.values()(0, 0) = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(predict_all(*r.model, prepare_inputs<float>(s.data, s.resources)), NumericError);
}

TEST(Pipeline, TrainingRunReportsMetricsText) {
  Config c = testing::synthetic_config(2);
  const TrainingRun run = run_training(c);
  EXPECT_EQ(run.epoch_losses.size(), 2u);
  EXPECT_EQ(run.metrics.confusion.total(), 20u);
  EXPECT_EQ(run.metrics_text, format_metrics(run.metrics));
  c.train_data.clear();
  EXPECT_THROW(run_training(c), ConfigError);
}

TEST(Pipeline, Float64Run) {
  Config c = testing::synthetic_config(2);
  c.precision = Precision::Float64;
  const TrainingRun run = run_training(c);
  EXPECT_EQ(run.epoch_losses.size(), 2u);
}

}  // namespace
}  // namespace kgran
