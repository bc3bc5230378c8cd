#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "kgran/kge.hpp"
#include "kgran/model.hpp"
#include "kgran/params.hpp"

namespace kgran {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Precision { Float32, Float64 };

/// Training configuration. Text form is one "key = value" per line; '#'
/// starts a comment; unknown keys are rejected. Empty paths mean "not used".
struct Config {
  Index emb_dim = 300;
  Index hidden_fused_dim = 300;
  int bilstm_layers = 2;
  int attn_layers = 3;
  Index episode_dim = 300;
  double lr = 0.005;
  double l2_lambda = 0.001;
  double dropout = 0.5;
  int epochs = 25;
  std::uint64_t seed = 1;
  std::size_t synonym_cap = 10;
  bool use_bias = false;
  Precision precision = Precision::Float32;

  KgeMethod kge_method = KgeMethod::TransR;
  std::string kge_triples;     // trained in-process when kge_embeddings is empty
  std::string kge_embeddings;  // exported entity vectors, keyed by synset id
  int kge_epochs = 100;
  std::string lemma_synsets;
  std::string glove;

  std::string train_data;
  std::string validation_data;
  std::string test_data;
  std::string model_out;
  std::string metrics_out;

  ModelDims model_dims() const;
  AdamOptions adam() const;
  /// Throws ConfigError when a value is outside its valid range.
  void validate() const;
};

Config parse_config(const std::string& text);
/// Reads a config file; relative paths inside it are resolved against the file's directory.
Config load_config(const std::filesystem::path& file);
std::string format_config(const Config& config);

}  // namespace kgran
