#pragma once

#include <filesystem>
#include <string>

#include "kgran/config.hpp"
#include "kgran/corpus.hpp"
#include "kgran/trainer.hpp"

namespace kgran::testing {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(KGRAN_TEST_DATA) / name; }

/// The 20-sentence marker-word setup with toy dimensions.
inline Config synthetic_config(int epochs) {
  Config c = load_config(data_path("synthetic.cfg"));
  c.epochs = epochs;
  return c;
}

struct SyntheticSetup {
  Config config;
  std::vector<Sentence> data;
  Resources resources;

  explicit SyntheticSetup(int epochs)
      : config(synthetic_config(epochs)),
        data(load_sentences(config.train_data)),
        resources(load_resources(config, vocab_of({&data}))) {}
};

}  // namespace kgran::testing
