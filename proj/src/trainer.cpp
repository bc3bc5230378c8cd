#include "kgran/trainer.hpp"

#include <unordered_set>

namespace kgran {

Vocab vocab_of(std::initializer_list<const std::vector<Sentence>*> datasets) {
  Vocab vocab;
  for (const auto* data : datasets) {
    if (data == nullptr) continue;
    for (const auto& s : *data) {
      for (const auto& w : s.tokens) vocab.add(w);
    }
  }
  return vocab;
}

Resources load_resources(const Config& config, const Vocab& vocab) {
  std::vector<LemmaSynset> lemma_synsets;
  if (!config.lemma_synsets.empty()) lemma_synsets = load_lemma_synsets(config.lemma_synsets);

  std::unordered_set<std::string> keep(vocab.words().begin(), vocab.words().end());
  for (const auto& entry : lemma_synsets) keep.insert(entry.lemma);

  Resources r{EmbeddingTable(config.emb_dim), SynonymTable(config.hidden_fused_dim, config.synonym_cap)};
  if (!config.glove.empty()) r.embeddings = load_glove(config.glove, config.emb_dim, &keep);

  EmbeddingTable kg(config.hidden_fused_dim);
  if (!config.kge_embeddings.empty()) {
    kg = load_glove(config.kge_embeddings, config.hidden_fused_dim);
  } else if (!config.kge_triples.empty()) {
    const TripleData triples = load_triples(config.kge_triples);
    KgeOptions options;
    options.method = config.kge_method;
    options.dim = config.hidden_fused_dim;
    options.epochs = config.kge_epochs;
    options.seed = config.seed;
    const KgeModel model = train_kge(triples, options);
    for (std::size_t i = 0; i < triples.entities.size(); ++i) {
      kg.insert(triples.entities[i], model.entities.row(static_cast<Index>(i)).transpose());
    }
  }
  if (!lemma_synsets.empty()) {
    r.synonyms = build_synonym_table(lemma_synsets, kg, vocab, config.synonym_cap, config.hidden_fused_dim,
                                     &r.embeddings);
  }
  return r;
}

Polarity majority_class(const std::vector<Sentence>& data) {
  if (data.empty()) throw std::invalid_argument("majority_class: empty data");
  const auto totals = class_totals(data);
  std::size_t best = 0;
  for (std::size_t k = 1; k < kNumClasses; ++k) {
    if (totals[k] > totals[best]) best = k;
  }
  return polarity_from_index(best);
}

Metrics majority_baseline(const std::vector<Sentence>& reference, const std::vector<Sentence>& data) {
  if (data.empty()) throw std::invalid_argument("majority_baseline: empty data");
  const Polarity guess = majority_class(reference);
  ConfusionMatrix cm;
  for (const auto& s : data) cm.add(s.label, guess);
  return compute_metrics(cm);
}

}  // namespace kgran
