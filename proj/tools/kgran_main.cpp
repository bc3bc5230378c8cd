#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "kgran/config.hpp"
#include "kgran/corpus.hpp"
#include "kgran/kge.hpp"
#include "kgran/pipeline.hpp"
#include "kgran/serialize.hpp"
#include "kgran/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int cmd_train(const std::string& config_path) {
  const kgran::Config config = kgran::load_config(config_path);
  const auto run = kgran::run_training(config);
  for (std::size_t e = 0; e < run.epoch_losses.size(); ++e) {
    std::printf("epoch\t%zu\tloss=%.9g\n", e + 1, run.epoch_losses[e]);
  }
  std::printf("best_epoch\t%d\n", run.best_epoch);
  std::cout << run.metrics_text;
  return kExitOk;
}

int cmd_eval(const std::string& model, const std::string& data) {
  std::cout << kgran::format_metrics(kgran::run_evaluation(model, data));
  return kExitOk;
}

int cmd_kge(const std::string& triples, const std::string& method, int dim, int epochs, std::uint64_t seed,
            const std::string& out) {
  const auto parsed = kgran::parse_kge_method(method);
  if (!parsed) throw CLI::ValidationError("--method", "expected transe, transh or transr");
  const kgran::TripleData data = kgran::load_triples(triples);
  kgran::KgeOptions options;
  options.method = *parsed;
  options.dim = dim;
  options.epochs = epochs;
  options.seed = seed;
  std::vector<double> losses;
  const kgran::KgeModel model = kgran::train_kge(data, options, &losses);
  for (std::size_t e = 0; e < losses.size(); ++e) std::printf("epoch\t%zu\tloss=%.9g\n", e + 1, losses[e]);
  kgran::export_entities(model, data.entities, out);
  return kExitOk;
}

int cmd_attend(const std::string& model, const std::string& sentence, const std::string& aspect,
               const std::string& out) {
  const std::string trace = kgran::run_attention(model, sentence, aspect);
  std::ofstream file(out, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + out);
  file << trace;
  return kExitOk;
}

int cmd_baseline(const std::string& data) {
  const auto sentences = kgran::load_sentences(data);
  const auto guess = kgran::majority_class(sentences);
  std::printf("majority\t%s\n", std::string(kgran::polarity_name(guess)).c_str());
  std::cout << kgran::format_metrics(kgran::majority_baseline(sentences, sentences));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-aware recurrent attention network for aspect-level sentiment"};
  app.require_subcommand(1);

  std::string config_path, model_path, data_path, triples_path, method = "transr", out_path, sentence, aspect;
  int dim = 300, epochs = 100;
  std::uint64_t seed = 1;

  auto* train = app.add_subcommand("train", "train a model from a config file");
  train->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);

  auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
  eval->add_option("--model", model_path, "model file")->required();
  eval->add_option("--data", data_path, "dataset (.xml or Twitter text)")->required();

  auto* kge = app.add_subcommand("kge-train", "train knowledge graph embeddings");
  kge->add_option("--triples", triples_path, "tab-separated head/relation/tail file")->required();
  kge->add_option("--method", method, "transe, transh or transr")->check(CLI::IsMember({"transe", "transh", "transr"}));
  kge->add_option("--dim", dim, "embedding dimension")->check(CLI::PositiveNumber);
  kge->add_option("--epochs", epochs, "training epochs")->check(CLI::NonNegativeNumber);
  kge->add_option("--seed", seed, "random seed");
  kge->add_option("--out", out_path, "entity vector output")->required();

  auto* attend = app.add_subcommand("attend", "write the attention trace of one sentence");
  attend->add_option("--model", model_path, "model file")->required();
  attend->add_option("--sentence", sentence, "raw sentence")->required();
  attend->add_option("--aspect", aspect, "aspect term occurring in the sentence")->required();
  attend->add_option("--out", out_path, "trace output")->required();

  auto* baseline = app.add_subcommand("baseline", "majority-class accuracy of a dataset");
  baseline->add_option("--data", data_path, "dataset")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(config_path);
    if (*eval) return cmd_eval(model_path, data_path);
    if (*kge) return cmd_kge(triples_path, method, dim, epochs, seed, out_path);
    if (*attend) return cmd_attend(model_path, sentence, aspect, out_path);
    if (*baseline) return cmd_baseline(data_path);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const kgran::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
