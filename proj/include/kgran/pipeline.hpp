#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgran/config.hpp"
#include "kgran/metrics.hpp"

namespace kgran {

struct TrainingRun {
  std::vector<double> epoch_losses;
  int best_epoch = 0;
  Metrics metrics;           // on test_data, else validation_data, else train_data
  std::string metrics_text;  // format_metrics(metrics)
};

/// Loads every resource named in `config`, trains at the configured
/// precision, and writes model_out / metrics_out when they are set.
TrainingRun run_training(const Config& config);

/// Metrics of a saved model on a dataset file, using the resources named in
/// the model's stored config.
Metrics run_evaluation(const std::filesystem::path& model, const std::filesystem::path& data);

/// Tokenizes `sentence` and `aspect`, locates the aspect, and formats the
/// model's attention trace.
std::string run_attention(const std::filesystem::path& model, const std::string& sentence, const std::string& aspect);

}  // namespace kgran
