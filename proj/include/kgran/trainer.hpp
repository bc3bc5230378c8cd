#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgran/config.hpp"
#include "kgran/corpus.hpp"
#include "kgran/metrics.hpp"
#include "kgran/model.hpp"
#include "kgran/params.hpp"
#include "kgran/ram.hpp"

namespace kgran {

/// A NaN or infinity appeared during training or inference.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Frozen lookup tables shared by training and evaluation.
struct Resources {
  EmbeddingTable embeddings;
  SynonymTable synonyms;
};

/// Loads GloVe vectors (restricted to `vocab`), KG entity vectors (from a file,
/// or trained from triples), and the lemma-synset map named in `config`, then
/// builds synonym lists for every vocabulary word. Missing paths yield empty tables.
Resources load_resources(const Config& config, const Vocab& vocab);

Vocab vocab_of(std::initializer_list<const std::vector<Sentence>*> datasets);

template <typename Scalar>
std::vector<ModelInput<Scalar>> prepare_inputs(const std::vector<Sentence>& data, const Resources& resources) {
  std::vector<ModelInput<Scalar>> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(prepare_input<Scalar>(s, resources.embeddings, &resources.synonyms));
  return out;
}

template <typename Scalar>
std::vector<Polarity> predict_all(const KgranModel<Scalar>& model, const std::vector<ModelInput<Scalar>>& inputs) {
  std::vector<Polarity> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) {
    const Vector<Scalar> p = model.predict(in);
    if (!p.allFinite()) throw NumericError("non-finite prediction");
    out.push_back(argmax_class(p));
  }
  return out;
}

template <typename Scalar>
Metrics evaluate(const KgranModel<Scalar>& model, const std::vector<Sentence>& data,
                 const std::vector<ModelInput<Scalar>>& inputs) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty data");
  const auto predicted = predict_all(model, inputs);
  std::vector<Polarity> gold;
  gold.reserve(data.size());
  for (const auto& s : data) gold.push_back(s.label);
  return compute_metrics(confusion_from(gold, predicted));
}

template <typename Scalar>
Metrics evaluate(const KgranModel<Scalar>& model, const std::vector<Sentence>& data, const Resources& resources) {
  return evaluate(model, data, prepare_inputs<Scalar>(data, resources));
}

struct EpochReport {
  int epoch = 0;     // 1-based
  double loss = 0;   // summed NLL over the epoch + lambda * ||theta||^2 at its end
  std::optional<double> validation_accuracy;
};

template <typename Scalar>
struct TrainResult {
  std::unique_ptr<KgranModel<Scalar>> model;
  std::vector<double> epoch_losses;
  int best_epoch = 0;  // epoch whose parameters were kept; 0 = untrained
};

/// Called after each epoch; return false to stop early.
template <typename Scalar>
using EpochCallback = std::function<bool(const EpochReport&, const KgranModel<Scalar>&)>;

/// Per-sentence Adam updates over a seeded shuffle each epoch. With a
/// validation set, the parameters of the best validation epoch are kept;
/// otherwise those of the last epoch.
template <typename Scalar>
TrainResult<Scalar> train(const Config& config, const std::vector<Sentence>& data, const Resources& resources,
                          const std::vector<Sentence>* validation = nullptr,
                          const EpochCallback<Scalar>& on_epoch = {}) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("train: empty training data");
  if (resources.embeddings.dim() != config.emb_dim) {
    throw ShapeError("train: word vectors have dimension " + std::to_string(resources.embeddings.dim()) +
                     ", config emb_dim is " + std::to_string(config.emb_dim));
  }
  TrainResult<Scalar> result;
  result.model = std::make_unique<KgranModel<Scalar>>(config.model_dims());
  KgranModel<Scalar>& model = *result.model;
  Rng init_rng(config.seed);
  model.initialize(init_rng, 0.1);
  Rng order_rng = init_rng.split(1);
  Rng dropout_rng = init_rng.split(2);

  const auto inputs = prepare_inputs<Scalar>(data, resources);
  std::vector<ModelInput<Scalar>> validation_inputs;
  if (validation != nullptr && !validation->empty()) validation_inputs = prepare_inputs<Scalar>(*validation, resources);

  AdamState<Scalar> adam(config.adam());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  double best_validation = -1.0;
  std::vector<Matrix<Scalar>> best_snapshot;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double nll = 0.0;
    for (const std::size_t i : order) {
      Tape<Scalar> tape;
      const auto pass = model.forward(tape, inputs[i], &dropout_rng, true);
      const auto step_loss = negative_log(pass.probabilities, static_cast<Index>(class_index(data[i].label)),
                                          Scalar(kProbabilityFloor));
      const double value = static_cast<double>(step_loss.scalar());
      if (!std::isfinite(value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", sentence " + data[i].id);
      }
      nll += value;
      model.params().zero_grad();
      tape.backward(step_loss);
      adam_step(model.params(), adam);
    }
    if (!model.params().all_finite()) throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    EpochReport report;
    report.epoch = epoch;
    report.loss = nll + config.l2_lambda * model.params().regularized_squared_norm();
    result.epoch_losses.push_back(report.loss);
    if (validation_inputs.empty()) result.best_epoch = epoch;
    if (!validation_inputs.empty()) {
      const double acc = evaluate(model, *validation, validation_inputs).accuracy;
      report.validation_accuracy = acc;
      if (acc > best_validation) {
        best_validation = acc;
        best_snapshot = model.params().snapshot();
        result.best_epoch = epoch;
      }
    }
    if (on_epoch && !on_epoch(report, model)) break;
  }
  if (!best_snapshot.empty()) {
    model.params().restore(best_snapshot);
  }
  return result;
}

/// Most frequent gold class of `data` (ties broken in positive, negative, neutral order).
Polarity majority_class(const std::vector<Sentence>& data);
Metrics majority_baseline(const std::vector<Sentence>& reference, const std::vector<Sentence>& data);

}  // namespace kgran
