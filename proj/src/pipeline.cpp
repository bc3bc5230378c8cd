#include "kgran/pipeline.hpp"

#include <fstream>

#include "kgran/corpus.hpp"
#include "kgran/serialize.hpp"
#include "kgran/trace.hpp"
#include "kgran/trainer.hpp"

namespace kgran {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::vector<Sentence> load_optional(const std::string& path) {
  if (path.empty()) return {};
  return load_sentences(path);
}

template <typename Scalar>
TrainingRun train_at(const Config& config) {
  if (config.train_data.empty()) throw ConfigError("train_data is not set");
  const auto train_set = load_sentences(config.train_data);
  const auto validation = load_optional(config.validation_data);
  const auto test = load_optional(config.test_data);
  const Resources resources = load_resources(config, vocab_of({&train_set, &validation, &test}));

  auto result = train<Scalar>(config, train_set, resources, validation.empty() ? nullptr : &validation);
  TrainingRun run;
  run.epoch_losses = result.epoch_losses;
  run.best_epoch = result.best_epoch;
  const auto& reported = !test.empty() ? test : !validation.empty() ? validation : train_set;
  run.metrics = evaluate(*result.model, reported, resources);
  run.metrics_text = format_metrics(run.metrics);
  if (!config.model_out.empty()) save_model(*result.model, config, config.model_out);
  if (!config.metrics_out.empty()) write_text(config.metrics_out, run.metrics_text);
  return run;
}

template <typename Scalar>
Metrics evaluate_at(const std::filesystem::path& model_path, const std::vector<Sentence>& data) {
  const auto loaded = load_model<Scalar>(model_path);
  const Resources resources = load_resources(loaded.config, vocab_of({&data}));
  return evaluate(*loaded.model, data, resources);
}

template <typename Scalar>
std::string attend_at(const std::filesystem::path& model_path, const std::string& sentence,
                      const std::string& aspect) {
  const auto loaded = load_model<Scalar>(model_path);
  const auto tokens = tokenize(sentence);
  const AspectSpan span = find_aspect(tokens, tokenize(aspect));
  Vocab vocab;
  for (const auto& t : tokens) vocab.add(t);
  const Resources resources = load_resources(loaded.config, vocab);
  const auto input = prepare_input<Scalar>(tokens, span, resources.embeddings, &resources.synonyms);
  return format_trace(trace_attention(*loaded.model, input));
}

Precision stored_precision(const std::filesystem::path& model_path) {
  return read_model_file(model_path).config.precision;
}

}  // namespace

TrainingRun run_training(const Config& config) {
  config.validate();
  return config.precision == Precision::Float64 ? train_at<double>(config) : train_at<float>(config);
}

Metrics run_evaluation(const std::filesystem::path& model, const std::filesystem::path& data) {
  const auto sentences = load_sentences(data);
  if (sentences.empty()) throw ParseError(data.string() + ": no sentences");
  return stored_precision(model) == Precision::Float64 ? evaluate_at<double>(model, sentences)
                                                       : evaluate_at<float>(model, sentences);
}

std::string run_attention(const std::filesystem::path& model, const std::string& sentence, const std::string& aspect) {
  return stored_precision(model) == Precision::Float64 ? attend_at<double>(model, sentence, aspect)
                                                       : attend_at<float>(model, sentence, aspect);
}

}  // namespace kgran
