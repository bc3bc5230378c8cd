#pragma once

#include <string>
#include <vector>

#include "kgran/corpus.hpp"
#include "kgran/params.hpp"
#include "kgran/tensor.hpp"

namespace kgran {

/// Sentinel gate (W_b, U_b) and the two additive scoring networks for
/// synonyms (W_t, W_ht, b_t, t_kb) and for the sentinel (W_s, W_hs, b_s, s_kb).
template <typename Scalar>
struct KnowledgeParams {
  Tensor<Scalar>* w_b = nullptr;
  Tensor<Scalar>* u_b = nullptr;
  Tensor<Scalar>* w_t = nullptr;
  Tensor<Scalar>* w_ht = nullptr;
  Tensor<Scalar>* b_t = nullptr;
  Tensor<Scalar>* t_kb = nullptr;
  Tensor<Scalar>* w_s = nullptr;
  Tensor<Scalar>* w_hs = nullptr;
  Tensor<Scalar>* b_s = nullptr;
  Tensor<Scalar>* s_kb = nullptr;
};

template <typename Scalar>
struct BoundKnowledge {
  Var<Scalar> w_b, u_b, w_t, w_ht, b_t, t_kb, w_s, w_hs, b_s, s_kb;
};

/// `state_dim` is the fused encoder dimension (also the synonym vector
/// dimension); the scoring networks use a hidden width of `state_dim`.
template <typename Scalar>
KnowledgeParams<Scalar> register_knowledge(ParameterSet<Scalar>& params, Index state_dim, Index embedding_dim) {
  KnowledgeParams<Scalar> k;
  const Index a = state_dim;
  k.w_b = &params.add("knowledge.W_b", state_dim, state_dim);
  k.u_b = &params.add("knowledge.U_b", state_dim, embedding_dim);
  k.w_t = &params.add("knowledge.W_t", a, state_dim);
  k.w_ht = &params.add("knowledge.W_ht", a, state_dim);
  k.b_t = &params.add("knowledge.b_t", a, 1);
  k.t_kb = &params.add("knowledge.t_kb", 1, a);
  k.w_s = &params.add("knowledge.W_s", a, state_dim);
  k.w_hs = &params.add("knowledge.W_hs", a, state_dim);
  k.b_s = &params.add("knowledge.b_s", a, 1);
  k.s_kb = &params.add("knowledge.s_kb", 1, a);
  return k;
}

template <typename Scalar>
BoundKnowledge<Scalar> bind(Tape<Scalar>& tape, const KnowledgeParams<Scalar>& k) {
  return {tape.leaf(*k.w_b), tape.leaf(*k.u_b), tape.leaf(*k.w_t),  tape.leaf(*k.w_ht), tape.leaf(*k.b_t),
          tape.leaf(*k.t_kb), tape.leaf(*k.w_s), tape.leaf(*k.w_hs), tape.leaf(*k.b_s), tape.leaf(*k.s_kb)};
}

/// s_t = sigmoid(W_b h*_{t-1} + U_b x_t).
template <typename Scalar>
Var<Scalar> sentinel(const Var<Scalar>& h_prev, const Var<Scalar>& x, const BoundKnowledge<Scalar>& k) {
  return sigmoid(matmul(k.w_b, h_prev) + matmul(k.u_b, x));
}

template <typename Scalar>
struct KnowledgeScores {
  std::vector<Var<Scalar>> synonyms;  // one 1x1 score per candidate
  Var<Scalar> sentinel;               // 1x1
};

/// S(t_k, h) = t_kb^T tanh(W_t t_k + W_ht h + b_t) for every candidate and
/// S(s, h) = s_kb^T tanh(W_s s + W_hs h + b_s) for the sentinel.
template <typename Scalar>
KnowledgeScores<Scalar> knowledge_scores(const std::vector<Var<Scalar>>& candidates, const Var<Scalar>& s,
                                         const Var<Scalar>& h, const BoundKnowledge<Scalar>& k) {
  KnowledgeScores<Scalar> out;
  if (!candidates.empty()) {
    const auto context = matmul(k.w_ht, h) + k.b_t;
    out.synonyms.reserve(candidates.size());
    for (const auto& t : candidates) out.synonyms.push_back(matmul(k.t_kb, tanh(matmul(k.w_t, t) + context)));
  }
  out.sentinel = matmul(k.s_kb, tanh(matmul(k.w_s, s) + matmul(k.w_hs, h) + k.b_s));
  return out;
}

template <typename Scalar>
struct KnowledgeState {
  Var<Scalar> p;        // knowledge state vector; invalid when there are no candidates
  Var<Scalar> weights;  // (K+1) x 1: alpha_1..alpha_K then beta; invalid when there are no candidates
};

/// Softmax over [synonym scores..., sentinel score], then
/// p = sum_k alpha_k t_k + beta s. No candidates: p = 0 (returned as invalid).
template <typename Scalar>
KnowledgeState<Scalar> knowledge_state(const std::vector<Var<Scalar>>& candidates, const Var<Scalar>& s,
                                       const KnowledgeScores<Scalar>& scores) {
  KnowledgeState<Scalar> out;
  if (candidates.empty()) return out;
  std::vector<Var<Scalar>> all_scores = scores.synonyms;
  all_scores.push_back(scores.sentinel);
  out.weights = softmax(concat(std::span<const Var<Scalar>>(all_scores)));
  std::vector<Var<Scalar>> columns = candidates;
  columns.push_back(s);
  out.p = matmul(hstack(std::span<const Var<Scalar>>(columns)), out.weights);
  return out;
}

/// Candidate lemmas and the normalized attention they received at one position.
template <typename Scalar>
struct KnowledgeRecord {
  std::vector<std::string> lemmas;
  Var<Scalar> weights;  // see KnowledgeState::weights
  bool has_synonyms() const { return !lemmas.empty(); }
};

template <typename Scalar>
struct KnowledgeMemory {
  std::vector<Var<Scalar>> states;  // m*_i
  std::vector<KnowledgeRecord<Scalar>> records;
};

/// m*_i = p_i + h*_i. Positions without a knowledge state keep h*_i itself.
template <typename Scalar>
KnowledgeMemory<Scalar> fuse(const std::vector<Var<Scalar>>& hidden, const std::vector<KnowledgeState<Scalar>>& states) {
  if (hidden.size() != states.size()) throw ShapeError("fuse: state count differs from sequence length");
  KnowledgeMemory<Scalar> out;
  out.states.reserve(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    out.states.push_back(states[i].p.valid() ? add(states[i].p, hidden[i]) : hidden[i]);
  }
  return out;
}

/// Runs sentinel, scoring, normalization, and fusion for a whole sentence.
/// `embeddings` are the raw word vectors x_t; `synonyms[i]` the candidates of
/// token i (may be null or empty).
template <typename Scalar>
KnowledgeMemory<Scalar> knowledge_forward(const std::vector<Var<Scalar>>& hidden,
                                          const std::vector<Var<Scalar>>& embeddings,
                                          const std::vector<const std::vector<Synonym>*>& synonyms,
                                          const KnowledgeParams<Scalar>& params) {
  if (hidden.size() != embeddings.size() || hidden.size() != synonyms.size()) {
    throw ShapeError("knowledge_forward: sequence lengths disagree");
  }
  if (hidden.empty()) return {};
  Tape<Scalar>& tape = *hidden.front().tape();
  const BoundKnowledge<Scalar> k = bind(tape, params);
  std::vector<KnowledgeState<Scalar>> states(hidden.size());
  std::vector<KnowledgeRecord<Scalar>> records(hidden.size());
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    const auto* list = synonyms[i];
    if (list == nullptr || list->empty()) continue;
    std::vector<Var<Scalar>> candidates;
    for (const auto& syn : *list) {
      if (syn.vector.size() != hidden[i].rows()) {
        throw ShapeError("knowledge: synonym '" + syn.lemma + "' has dimension " + std::to_string(syn.vector.size()) +
                         ", encoder states have " + std::to_string(hidden[i].rows()));
      }
      candidates.push_back(tape.constant(syn.vector.template cast<Scalar>()));
      records[i].lemmas.push_back(syn.lemma);
    }
    const Var<Scalar> h_prev = i == 0 ? tape.constant(Matrix<Scalar>::Zero(hidden[i].rows(), 1)) : hidden[i - 1];
    const auto s = sentinel(h_prev, embeddings[i], k);
    states[i] = knowledge_state(candidates, s, knowledge_scores(candidates, s, hidden[i], k));
    records[i].weights = states[i].weights;
  }
  KnowledgeMemory<Scalar> memory = fuse(hidden, states);
  memory.records = std::move(records);
  return memory;
}

}  // namespace kgran
