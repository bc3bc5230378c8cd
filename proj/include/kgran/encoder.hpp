#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "kgran/corpus.hpp"
#include "kgran/params.hpp"
#include "kgran/tensor.hpp"

namespace kgran {

/// Gate order used for every per-gate array below.
enum LstmGate : int { kInputGate = 0, kForgetGate = 1, kOutputGate = 2, kCellGate = 3 };
inline constexpr std::array<const char*, 4> kLstmGateNames = {"i", "f", "o", "c"};

/// Weights of one LSTM direction: W_* act on the layer input, U_* on the
/// previous hidden state. Biases are null unless enabled.
template <typename Scalar>
struct LstmWeights {
  std::array<Tensor<Scalar>*, 4> w{};
  std::array<Tensor<Scalar>*, 4> u{};
  std::array<Tensor<Scalar>*, 4> b{};
};

template <typename Scalar>
struct BoundLstm {
  std::array<Var<Scalar>, 4> w;
  std::array<Var<Scalar>, 4> u;
  std::array<Var<Scalar>, 4> b;
  bool has_bias = false;
};

template <typename Scalar>
LstmWeights<Scalar> register_lstm(ParameterSet<Scalar>& params, const std::string& prefix, Index input_dim,
                                  Index hidden_dim, bool use_bias) {
  LstmWeights<Scalar> weights;
  for (int g = 0; g < 4; ++g) {
    weights.w[g] = &params.add(prefix + ".W_" + kLstmGateNames[g], hidden_dim, input_dim);
    weights.u[g] = &params.add(prefix + ".U_" + kLstmGateNames[g], hidden_dim, hidden_dim);
    if (use_bias) weights.b[g] = &params.add(prefix + ".b_" + kLstmGateNames[g], hidden_dim, 1);
  }
  return weights;
}

template <typename Scalar>
BoundLstm<Scalar> bind(Tape<Scalar>& tape, const LstmWeights<Scalar>& weights) {
  BoundLstm<Scalar> bound;
  bound.has_bias = weights.b[0] != nullptr;
  for (int g = 0; g < 4; ++g) {
    bound.w[g] = tape.leaf(*weights.w[g]);
    bound.u[g] = tape.leaf(*weights.u[g]);
    if (bound.has_bias) bound.b[g] = tape.leaf(*weights.b[g]);
  }
  return bound;
}

/// One LSTM step:
///   i, f, o = sigmoid(W x + U h_prev), c_hat = tanh(W_c x + U_c h_prev),
///   c = f * c_prev + i * c_hat, h = o * tanh(c).
template <typename Scalar>
std::pair<Var<Scalar>, Var<Scalar>> lstm_cell(const Var<Scalar>& x, const Var<Scalar>& h_prev,
                                              const Var<Scalar>& c_prev, const BoundLstm<Scalar>& p) {
  std::array<Var<Scalar>, 4> pre;
  for (int g = 0; g < 4; ++g) {
    pre[g] = matmul(p.w[g], x) + matmul(p.u[g], h_prev);
    if (p.has_bias) pre[g] = pre[g] + p.b[g];
  }
  const auto i = sigmoid(pre[kInputGate]);
  const auto f = sigmoid(pre[kForgetGate]);
  const auto o = sigmoid(pre[kOutputGate]);
  const auto c_hat = tanh(pre[kCellGate]);
  const auto c = mul(f, c_prev) + mul(i, c_hat);
  const auto h = mul(o, tanh(c));
  return {h, c};
}

struct EncoderDims {
  Index input_dim = 300;
  Index fused_dim = 300;  // forward + backward; each direction gets half
  int layers = 2;
  bool use_bias = false;

  Index direction_dim() const { return fused_dim / 2; }
};

template <typename Scalar>
struct EncoderParams {
  EncoderDims dims;
  std::vector<std::array<LstmWeights<Scalar>, 2>> layers;  // [layer][0 = forward, 1 = backward]
};

template <typename Scalar>
EncoderParams<Scalar> register_encoder(ParameterSet<Scalar>& params, const EncoderDims& dims) {
  if (dims.fused_dim <= 0 || dims.fused_dim % 2 != 0) {
    throw ShapeError("encoder: fused dimension must be positive and even, got " + std::to_string(dims.fused_dim));
  }
  if (dims.layers < 1) throw ShapeError("encoder: need at least one layer");
  EncoderParams<Scalar> enc;
  enc.dims = dims;
  for (int l = 0; l < dims.layers; ++l) {
    const Index in = l == 0 ? dims.input_dim : dims.fused_dim;
    const std::string prefix = "encoder.l" + std::to_string(l + 1);
    enc.layers.push_back({register_lstm(params, prefix + ".fwd", in, dims.direction_dim(), dims.use_bias),
                          register_lstm(params, prefix + ".bwd", in, dims.direction_dim(), dims.use_bias)});
  }
  return enc;
}

/// Per-token embeddings (columns) and the aspect representation: the single
/// aspect word's vector, or the mean over a multi-word aspect.
template <typename Scalar>
struct EmbeddedSentence {
  Matrix<Scalar> tokens;  // dim x N
  Vector<Scalar> aspect;
};

template <typename Scalar>
EmbeddedSentence<Scalar> embed_sentence(const std::vector<std::string>& tokens, const AspectSpan& span,
                                        const EmbeddingTable& table) {
  if (tokens.empty()) throw ShapeError("embed_sentence: empty sentence");
  if (span.start < 1 || span.end < span.start || span.end > tokens.size()) {
    throw ShapeError("embed_sentence: aspect span [" + std::to_string(span.start) + ", " +
                     std::to_string(span.end) + "] outside sentence of " + std::to_string(tokens.size()) + " tokens");
  }
  EmbeddedSentence<Scalar> out;
  out.tokens.resize(table.dim(), static_cast<Index>(tokens.size()));
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.tokens.col(static_cast<Index>(i)) = table.lookup(tokens[i]).template cast<Scalar>();
  }
  if (span.length() == 1) {
    out.aspect = out.tokens.col(static_cast<Index>(span.start - 1));
  } else {
    out.aspect = out.tokens.middleCols(static_cast<Index>(span.start - 1), static_cast<Index>(span.length()))
                     .rowwise()
                     .mean();
  }
  return out;
}

template <typename Scalar>
std::vector<Var<Scalar>> lstm_sequence(const std::vector<Var<Scalar>>& inputs, const BoundLstm<Scalar>& p,
                                       Index hidden_dim, bool reverse) {
  Tape<Scalar>& tape = *inputs.front().tape();
  std::vector<Var<Scalar>> out(inputs.size());
  Var<Scalar> h = tape.constant(Matrix<Scalar>::Zero(hidden_dim, 1));
  Var<Scalar> c = h;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const std::size_t t = reverse ? inputs.size() - 1 - k : k;
    std::tie(h, c) = lstm_cell(inputs[t], h, c, p);
    out[t] = h;
  }
  return out;
}

/// Stacked bidirectional LSTM. Layer 1 reads the embeddings, each later layer
/// reads the previous layer's fused states; the result holds the last layer's
/// forward||backward state per position. Dropout hits every layer input in
/// training mode.
template <typename Scalar>
std::vector<Var<Scalar>> dbilstm_forward(const std::vector<Var<Scalar>>& embeddings,
                                         const EncoderParams<Scalar>& params, Rng* rng, bool training,
                                         double dropout_p) {
  if (embeddings.empty()) throw ShapeError("dbilstm_forward: empty sequence");
  Tape<Scalar>& tape = *embeddings.front().tape();
  std::vector<Var<Scalar>> current = embeddings;
  for (const auto& layer : params.layers) {
    if (training && dropout_p > 0.0) {
      if (rng == nullptr) throw std::invalid_argument("dbilstm_forward: training dropout needs an Rng");
      for (auto& x : current) x = dropout(x, dropout_p, *rng, true);
    }
    const auto fwd = lstm_sequence(current, bind(tape, layer[0]), params.dims.direction_dim(), false);
    const auto bwd = lstm_sequence(current, bind(tape, layer[1]), params.dims.direction_dim(), true);
    for (std::size_t t = 0; t < current.size(); ++t) current[t] = concat({fwd[t], bwd[t]});
  }
  return current;
}

}  // namespace kgran
