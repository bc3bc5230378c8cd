#pragma once

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgran/rng.hpp"
#include "kgran/tensor.hpp"

namespace kgran {

template <typename Scalar>
struct Parameter {
  std::string name;
  Tensor<Scalar> tensor;
  bool regularized = true;
};

/// Named, insertion-ordered parameter collection. References handed out by
/// add() stay valid for the lifetime of the set.
template <typename Scalar>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;

  Tensor<Scalar>& add(const std::string& name, Index rows, Index cols, bool regularized = true) {
    if (find(name) != nullptr) throw std::invalid_argument("duplicate parameter name: " + name);
    items_.push_back(Parameter<Scalar>{name, Tensor<Scalar>(rows, cols, true), regularized});
    return items_.back().tensor;
  }

  Parameter<Scalar>* find(const std::string& name) {
    for (auto& p : items_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }
  const Parameter<Scalar>* find(const std::string& name) const {
    return const_cast<ParameterSet*>(this)->find(name);
  }

  std::deque<Parameter<Scalar>>& items() { return items_; }
  const std::deque<Parameter<Scalar>>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }

  Index scalar_count() const {
    Index n = 0;
    for (const auto& p : items_) n += p.tensor.size();
    return n;
  }

  /// Fills every parameter, in insertion order, from uniform(-range, range).
  void initialize_uniform(Rng& rng, double range) {
    for (auto& p : items_) {
      auto& v = p.tensor.values();
      for (Index j = 0; j < v.cols(); ++j) {
        for (Index i = 0; i < v.rows(); ++i) v(i, j) = Scalar(rng.uniform(-range, range));
      }
    }
  }

  void zero_grad() {
    for (auto& p : items_) p.tensor.zero_grad();
  }

  /// Sum of squared entries over regularized parameters.
  double regularized_squared_norm() const {
    double total = 0.0;
    for (const auto& p : items_) {
      if (p.regularized) total += static_cast<double>(p.tensor.values().squaredNorm());
    }
    return total;
  }

  bool all_finite() const {
    for (const auto& p : items_) {
      if (!p.tensor.values().allFinite()) return false;
    }
    return true;
  }

  std::vector<Matrix<Scalar>> snapshot() const {
    std::vector<Matrix<Scalar>> out;
    out.reserve(items_.size());
    for (const auto& p : items_) out.push_back(p.tensor.values());
    return out;
  }

  void restore(const std::vector<Matrix<Scalar>>& values) {
    if (values.size() != items_.size()) throw ShapeError("restore: parameter count mismatch");
    for (std::size_t i = 0; i < items_.size(); ++i) {
      if (values[i].rows() != items_[i].tensor.rows() || values[i].cols() != items_[i].tensor.cols()) {
        throw ShapeError("restore: shape mismatch for " + items_[i].name);
      }
      items_[i].tensor.values() = values[i];
    }
  }

 private:
  std::deque<Parameter<Scalar>> items_;
};

struct AdamOptions {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double l2_lambda = 0.0;
};

template <typename Scalar>
class AdamState {
 public:
  explicit AdamState(AdamOptions options = {}) : options_(options) {}

  const AdamOptions& options() const { return options_; }
  long step_count() const { return step_; }
  const std::vector<Matrix<Scalar>>& first_moments() const { return m_; }
  const std::vector<Matrix<Scalar>>& second_moments() const { return v_; }

 private:
  template <typename S>
  friend void adam_step(ParameterSet<S>& params, AdamState<S>& state);

  AdamOptions options_;
  long step_ = 0;
  std::vector<Matrix<Scalar>> m_;
  std::vector<Matrix<Scalar>> v_;
};

/// One bias-corrected Adam update using each parameter's accumulated gradient.
/// Regularized parameters receive the additional L2 gradient 2*lambda*theta.
template <typename Scalar>
void adam_step(ParameterSet<Scalar>& params, AdamState<Scalar>& state) {
  auto& items = params.items();
  if (state.m_.empty() && state.step_ == 0) {
    for (const auto& p : items) {
      state.m_.push_back(Matrix<Scalar>::Zero(p.tensor.rows(), p.tensor.cols()));
      state.v_.push_back(Matrix<Scalar>::Zero(p.tensor.rows(), p.tensor.cols()));
    }
  }
  if (state.m_.size() != items.size()) {
    throw ShapeError("adam_step: optimizer state tracks " + std::to_string(state.m_.size()) +
                     " parameters, set has " + std::to_string(items.size()));
  }
  const AdamOptions& o = state.options_;
  ++state.step_;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step_));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step_));
  for (std::size_t k = 0; k < items.size(); ++k) {
    auto& p = items[k];
    auto& theta = p.tensor.values();
    const auto& raw = p.tensor.grad();
    if (raw.rows() != theta.rows() || raw.cols() != theta.cols() ||
        state.m_[k].rows() != theta.rows() || state.m_[k].cols() != theta.cols()) {
      throw ShapeError("adam_step: shape mismatch for " + p.name + " " + shape_string(theta) +
                       " grad " + shape_string(raw) + " state " + shape_string(state.m_[k]));
    }
    Matrix<Scalar> g = raw;
    if (p.regularized && o.l2_lambda != 0.0) g += Scalar(2.0 * o.l2_lambda) * theta;
    auto& m = state.m_[k];
    auto& v = state.v_[k];
    m = Scalar(o.beta1) * m + Scalar(1.0 - o.beta1) * g;
    v = Scalar(o.beta2) * v + Scalar(1.0 - o.beta2) * g.cwiseProduct(g);
    const Scalar lr = Scalar(o.learning_rate);
    const Scalar c1 = Scalar(bc1), c2 = Scalar(bc2), eps = Scalar(o.epsilon);
    theta.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
  }
}

}  // namespace kgran
