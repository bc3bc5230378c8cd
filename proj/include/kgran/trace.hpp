#pragma once

#include <array>
#include <string>
#include <vector>

#include "kgran/model.hpp"
#include "kgran/types.hpp"

namespace kgran {

/// The 1-based span of the first occurrence of `aspect` inside `tokens`.
/// Throws std::invalid_argument when the aspect does not occur.
AspectSpan find_aspect(const std::vector<std::string>& tokens, const std::vector<std::string>& aspect);

struct KnowledgeTraceRow {
  std::size_t position = 0;  // 1-based
  std::vector<std::string> lemmas;
  std::vector<double> alphas;
  double beta = 0.0;
};

struct AttentionTrace {
  std::vector<std::string> tokens;
  AspectSpan span;
  std::vector<std::vector<double>> layers;  // T rows of N weights
  std::vector<KnowledgeTraceRow> knowledge;  // positions with candidates only
  std::vector<double> episode;
  std::array<double, kNumClasses> probabilities{};
  Polarity predicted = Polarity::Positive;
};

template <typename Scalar>
AttentionTrace trace_attention(const KgranModel<Scalar>& model, const ModelInput<Scalar>& input) {
  Tape<Scalar> tape;
  const auto pass = model.forward(tape, input, nullptr, false);
  AttentionTrace trace;
  trace.tokens = input.tokens;
  trace.span = input.span;
  for (const auto& w : pass.ram.layer_weights) {
    const auto& v = w.value();
    trace.layers.emplace_back(v.data(), v.data() + v.size());
  }
  for (std::size_t i = 0; i < pass.knowledge.records.size(); ++i) {
    const auto& rec = pass.knowledge.records[i];
    if (!rec.has_synonyms()) continue;
    KnowledgeTraceRow row;
    row.position = i + 1;
    row.lemmas = rec.lemmas;
    const auto& w = rec.weights.value();
    for (std::size_t k = 0; k < rec.lemmas.size(); ++k) row.alphas.push_back(static_cast<double>(w(static_cast<Index>(k))));
    row.beta = static_cast<double>(w(w.size() - 1));
    trace.knowledge.push_back(std::move(row));
  }
  const auto& e = pass.ram.episode.value();
  for (Index i = 0; i < e.size(); ++i) trace.episode.push_back(static_cast<double>(e(i)));
  const auto& p = pass.probabilities.value();
  for (std::size_t c = 0; c < kNumClasses; ++c) trace.probabilities[c] = static_cast<double>(p(static_cast<Index>(c)));
  trace.predicted = argmax_class(p.col(0));
  return trace;
}

/// Tab-separated, one record per line, numbers printed with %.9g:
///   # kgran attention trace v1
///   tokens    <tok_1> ... <tok_N>
///   aspect    <start> <end>
///   layer     <t> <w_1> ... <w_N>                  (t = 1..T)
///   knowledge <pos> beta=<b> <lemma>=<alpha> ...   (positions with candidates)
///   episode   <e_1> ... <e_H>
///   prediction positive=<p> negative=<p> neutral=<p>
///   predicted <label>
std::string format_trace(const AttentionTrace& trace);

}  // namespace kgran
