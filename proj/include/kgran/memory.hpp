#pragma once

#include <cstddef>
#include <vector>

#include "kgran/tensor.hpp"
#include "kgran/types.hpp"

namespace kgran {

/// Token distance from a 1-based position to the aspect span: measured from
/// the leftmost aspect word for context on the left, from the rightmost one
/// for context on the right, 0 inside the span.
std::size_t relative_distance(std::size_t position, const AspectSpan& span, std::size_t length);

template <typename Scalar>
struct PositionWeight {
  Scalar w;  // 1 - dist / t_max
  Scalar u;  // dist / t_max
};

/// u = dist / t_max and w = 1 - u. Computing w from the rounded u keeps
/// w + u == 1 exact in floating point.
template <typename Scalar>
PositionWeight<Scalar> position_weights(std::size_t dist, std::size_t t_max) {
  if (t_max == 0) throw std::invalid_argument("position_weights: t_max must be positive");
  if (dist > t_max) throw std::invalid_argument("position_weights: distance exceeds t_max");
  const Scalar u = Scalar(dist) / Scalar(t_max);
  return {Scalar(1) - u, u};
}

template <typename Scalar>
struct PositionedMemory {
  std::vector<Var<Scalar>> blocks;  // m_i = (w_i m*_i ; u_i)
  std::vector<PositionWeight<Scalar>> weights;
};

template <typename Scalar>
PositionedMemory<Scalar> build_memory(const std::vector<Var<Scalar>>& states, const AspectSpan& span,
                                      std::size_t t_max) {
  PositionedMemory<Scalar> out;
  if (states.empty()) return out;
  Tape<Scalar>& tape = *states.front().tape();
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto pw = position_weights<Scalar>(relative_distance(i + 1, span, states.size()), t_max);
    Matrix<Scalar> tail(1, 1);
    tail(0, 0) = pw.u;
    const auto scaled = pw.w == Scalar(1) ? states[i] : scale(states[i], pw.w);
    out.blocks.push_back(concat({scaled, tape.constant(std::move(tail))}));
    out.weights.push_back(pw);
  }
  return out;
}

}  // namespace kgran
