#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kgran/corpus.hpp"
#include "kgran/encoder.hpp"
#include "kgran/knowledge.hpp"
#include "kgran/memory.hpp"
#include "kgran/params.hpp"
#include "kgran/ram.hpp"
#include "kgran/tensor.hpp"

namespace kgran {

struct ModelDims {
  Index embedding_dim = 300;
  Index fused_dim = 300;
  Index episode_dim = 300;
  int bilstm_layers = 2;
  int attention_layers = 3;
  bool use_bias = false;
  double dropout = 0.5;

  /// Throws std::invalid_argument on non-positive sizes, odd fused_dim, or dropout outside [0, 1).
  void validate() const;
};

/// Everything the network reads for one (sentence, aspect) pair, with word
/// vectors already looked up. Synonym lists point into a SynonymTable that
/// must outlive the input.
template <typename Scalar>
struct ModelInput {
  std::vector<std::string> tokens;
  AspectSpan span;
  EmbeddedSentence<Scalar> embedded;
  std::vector<const std::vector<Synonym>*> synonyms;
  std::size_t length() const { return tokens.size(); }
};

template <typename Scalar>
ModelInput<Scalar> prepare_input(const std::vector<std::string>& tokens, const AspectSpan& span,
                                 const EmbeddingTable& embeddings, const SynonymTable* synonyms) {
  ModelInput<Scalar> in;
  in.tokens = tokens;
  in.span = span;
  in.embedded = embed_sentence<Scalar>(tokens, span, embeddings);
  in.synonyms.reserve(tokens.size());
  for (const auto& w : tokens) in.synonyms.push_back(synonyms != nullptr ? &synonyms->synonyms(w) : nullptr);
  return in;
}

template <typename Scalar>
ModelInput<Scalar> prepare_input(const Sentence& s, const EmbeddingTable& embeddings, const SynonymTable* synonyms) {
  return prepare_input<Scalar>(s.tokens, s.aspect, embeddings, synonyms);
}

template <typename Scalar>
struct ForwardResult {
  std::vector<Var<Scalar>> embeddings;  // raw word vectors
  std::vector<Var<Scalar>> hidden;      // H*
  KnowledgeMemory<Scalar> knowledge;    // M* and knowledge attention
  PositionedMemory<Scalar> memory;      // location-weighted blocks
  RamOutput<Scalar> ram;
  Var<Scalar> probabilities;  // 3 x 1
};

/// Encoder, knowledge fusion, positional memory, recurrent attention, and
/// classifier over one named parameter set.
template <typename Scalar>
class KgranModel {
 public:
  explicit KgranModel(const ModelDims& dims) : dims_(dims) {
    dims_.validate();
    encoder_ = register_encoder(params_, EncoderDims{dims.embedding_dim, dims.fused_dim, dims.bilstm_layers,
                                                     dims.use_bias});
    knowledge_ = register_knowledge(params_, dims.fused_dim, dims.embedding_dim);
    ram_ = register_ram(params_, RamDims{dims.fused_dim + 1, dims.episode_dim, dims.embedding_dim,
                                         dims.attention_layers});
  }

  KgranModel(const KgranModel&) = delete;
  KgranModel& operator=(const KgranModel&) = delete;

  const ModelDims& dims() const { return dims_; }
  ParameterSet<Scalar>& params() { return params_; }
  const ParameterSet<Scalar>& params() const { return params_; }
  const EncoderParams<Scalar>& encoder() const { return encoder_; }
  const KnowledgeParams<Scalar>& knowledge() const { return knowledge_; }
  const RamParams<Scalar>& ram() const { return ram_; }

  void initialize(Rng& rng, double range = 0.1) { params_.initialize_uniform(rng, range); }

  /// Records the full forward pass on `tape`. In training mode dropout is
  /// applied to encoder layer inputs and to the final episode, drawing from `rng`.
  ForwardResult<Scalar> forward(Tape<Scalar>& tape, const ModelInput<Scalar>& input, Rng* rng,
                                bool training) const {
    if (input.length() == 0) throw ShapeError("forward: empty sentence");
    if (input.embedded.tokens.rows() != dims_.embedding_dim) {
      throw ShapeError("forward: word vectors have dimension " + std::to_string(input.embedded.tokens.rows()) +
                       ", model expects " + std::to_string(dims_.embedding_dim));
    }
    if (training && dims_.dropout > 0.0 && rng == nullptr) {
      throw std::invalid_argument("forward: training with dropout needs an Rng");
    }
    ForwardResult<Scalar> out;
    out.embeddings.reserve(input.length());
    for (Index t = 0; t < input.embedded.tokens.cols(); ++t) {
      out.embeddings.push_back(tape.constant(input.embedded.tokens.col(t)));
    }
    out.hidden = dbilstm_forward(out.embeddings, encoder_, rng, training, dims_.dropout);
    out.knowledge = knowledge_forward(out.hidden, out.embeddings, input.synonyms, knowledge_);
    out.memory = build_memory(out.knowledge.states, input.span, input.length());
    const auto query = tape.constant(input.embedded.aspect);
    out.ram = run_ram(out.memory, query, ram_);
    Var<Scalar> episode = out.ram.episode;
    if (training && dims_.dropout > 0.0) episode = dropout(episode, dims_.dropout, *rng, true);
    out.probabilities = classify(episode, ram_);
    return out;
  }

  /// Evaluation-mode class distribution.
  Vector<Scalar> predict(const ModelInput<Scalar>& input) const {
    Tape<Scalar> tape;
    return forward(tape, input, nullptr, false).probabilities.value().col(0);
  }

 private:
  ModelDims dims_;
  ParameterSet<Scalar> params_;
  EncoderParams<Scalar> encoder_;
  KnowledgeParams<Scalar> knowledge_;
  RamParams<Scalar> ram_;
};

template <typename Derived>
Polarity argmax_class(const Eigen::MatrixBase<Derived>& probabilities) {
  Index best = 0;
  for (Index i = 1; i < probabilities.size(); ++i) {
    if (probabilities(i) > probabilities(best)) best = i;
  }
  return polarity_from_index(static_cast<std::size_t>(best));
}

}  // namespace kgran
