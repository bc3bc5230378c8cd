#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "kgran/memory.hpp"
#include "kgran/params.hpp"
#include "kgran/tensor.hpp"
#include "kgran/types.hpp"

namespace kgran {

struct RamDims {
  Index memory_dim = 301;  // fused state dimension + 1
  Index episode_dim = 300;
  Index query_dim = 300;  // aspect representation
  int layers = 3;
};

/// Per-layer attention scorers plus a GRU shared by all layers and the
/// softmax classifier.
template <typename Scalar>
struct RamParams {
  RamDims dims;
  std::vector<Tensor<Scalar>*> attention_w;  // 1 x (memory + episode + query)
  std::vector<Tensor<Scalar>*> attention_b;  // 1 x 1
  Tensor<Scalar>* w_r = nullptr;
  Tensor<Scalar>* u_r = nullptr;
  Tensor<Scalar>* w_z = nullptr;
  Tensor<Scalar>* u_z = nullptr;
  Tensor<Scalar>* w_x = nullptr;
  Tensor<Scalar>* w_g = nullptr;
  Tensor<Scalar>* w_out = nullptr;
  Tensor<Scalar>* b_out = nullptr;
};

template <typename Scalar>
RamParams<Scalar> register_ram(ParameterSet<Scalar>& params, const RamDims& dims) {
  if (dims.layers < 1) throw ShapeError("ram: need at least one attention layer");
  RamParams<Scalar> r;
  r.dims = dims;
  const Index score_in = dims.memory_dim + dims.episode_dim + dims.query_dim;
  for (int t = 0; t < dims.layers; ++t) {
    const std::string prefix = "ram.layer" + std::to_string(t + 1);
    r.attention_w.push_back(&params.add(prefix + ".W_AL", 1, score_in));
    r.attention_b.push_back(&params.add(prefix + ".b_AL", 1, 1));
  }
  const Index h = dims.episode_dim;
  r.w_r = &params.add("ram.gru.W_r", h, dims.memory_dim);
  r.u_r = &params.add("ram.gru.U_r", h, h);
  r.w_z = &params.add("ram.gru.W_z", h, dims.memory_dim);
  r.u_z = &params.add("ram.gru.U_z", h, h);
  r.w_x = &params.add("ram.gru.W_x", h, dims.memory_dim);
  r.w_g = &params.add("ram.gru.W_g", h, h);
  r.w_out = &params.add("classifier.W_out", static_cast<Index>(kNumClasses), h);
  r.b_out = &params.add("classifier.b_out", static_cast<Index>(kNumClasses), 1);
  return r;
}

template <typename Scalar>
struct BoundGru {
  Var<Scalar> w_r, u_r, w_z, u_z, w_x, w_g;
};

template <typename Scalar>
struct AttentionStep {
  Var<Scalar> attended;  // i^AL
  Var<Scalar> weights;   // N x 1
};

/// g_j = W^AL (m_j ; e_prev ; v_a) + b^AL, alpha = softmax(g), i^AL = sum_j alpha_j m_j.
template <typename Scalar>
AttentionStep<Scalar> attend_layer(const std::vector<Var<Scalar>>& memory, const Var<Scalar>& memory_matrix,
                                   const Var<Scalar>& e_prev, const Var<Scalar>& query, const Var<Scalar>& w,
                                   const Var<Scalar>& b) {
  if (memory.empty()) throw ShapeError("attend_layer: empty memory");
  std::vector<Var<Scalar>> scores;
  scores.reserve(memory.size());
  for (const auto& m : memory) scores.push_back(matmul(w, concat({m, e_prev, query})) + b);
  AttentionStep<Scalar> out;
  out.weights = softmax(concat(std::span<const Var<Scalar>>(scores)));
  out.attended = matmul(memory_matrix, out.weights);
  return out;
}

template <typename Scalar>
AttentionStep<Scalar> attend_layer(const std::vector<Var<Scalar>>& memory, const Var<Scalar>& e_prev,
                                   const Var<Scalar>& query, const Var<Scalar>& w, const Var<Scalar>& b) {
  if (memory.empty()) throw ShapeError("attend_layer: empty memory");
  return attend_layer(memory, hstack(std::span<const Var<Scalar>>(memory)), e_prev, query, w, b);
}

/// r = sigmoid(W_r i + U_r e), z = sigmoid(W_z i + U_z e),
/// e~ = tanh(W_x i + W_g (r * e)), e' = (1 - z) * e + z * e~.
template <typename Scalar>
Var<Scalar> gru_update(const Var<Scalar>& input, const Var<Scalar>& e_prev, const BoundGru<Scalar>& g) {
  const auto r = sigmoid(matmul(g.w_r, input) + matmul(g.u_r, e_prev));
  const auto z = sigmoid(matmul(g.w_z, input) + matmul(g.u_z, e_prev));
  const auto candidate = tanh(matmul(g.w_x, input) + matmul(g.w_g, mul(r, e_prev)));
  return mul(one_minus(z), e_prev) + mul(z, candidate);
}

template <typename Scalar>
struct RamOutput {
  Var<Scalar> episode;                     // e_T
  std::vector<Var<Scalar>> layer_weights;  // T rows of N attention weights
};

template <typename Scalar>
RamOutput<Scalar> run_ram(const PositionedMemory<Scalar>& memory, const Var<Scalar>& query,
                          const RamParams<Scalar>& params) {
  if (memory.blocks.empty()) throw ShapeError("run_ram: empty memory");
  Tape<Scalar>& tape = *memory.blocks.front().tape();
  const BoundGru<Scalar> gru{tape.leaf(*params.w_r), tape.leaf(*params.u_r), tape.leaf(*params.w_z),
                             tape.leaf(*params.u_z), tape.leaf(*params.w_x), tape.leaf(*params.w_g)};
  const auto memory_matrix = hstack(std::span<const Var<Scalar>>(memory.blocks));
  RamOutput<Scalar> out;
  Var<Scalar> e = tape.constant(Matrix<Scalar>::Zero(params.dims.episode_dim, 1));
  for (std::size_t t = 0; t < params.attention_w.size(); ++t) {
    const auto step = attend_layer(memory.blocks, memory_matrix, e, query, tape.leaf(*params.attention_w[t]),
                                   tape.leaf(*params.attention_b[t]));
    e = gru_update(step.attended, e, gru);
    out.layer_weights.push_back(step.weights);
  }
  out.episode = e;
  return out;
}

/// softmax(W_out e + b_out) over {positive, negative, neutral}.
template <typename Scalar>
Var<Scalar> classify(const Var<Scalar>& episode, const RamParams<Scalar>& params) {
  Tape<Scalar>& tape = *episode.tape();
  return softmax(matmul(tape.leaf(*params.w_out), episode) + tape.leaf(*params.b_out));
}

inline constexpr double kProbabilityFloor = 1e-12;

/// Negative log-likelihood summed over samples, plus lambda * ||theta||^2.
template <typename Derived>
double loss(std::span<const Derived> predictions, std::span<const Polarity> gold, double theta_squared_norm,
            double lambda) {
  if (predictions.size() != gold.size()) throw ShapeError("loss: prediction and label counts differ");
  double total = 0.0;
  for (std::size_t s = 0; s < predictions.size(); ++s) {
    const double p = static_cast<double>(predictions[s](static_cast<Index>(class_index(gold[s]))));
    total -= std::log(std::max(p, kProbabilityFloor));
  }
  return total + lambda * theta_squared_norm;
}

}  // namespace kgran
