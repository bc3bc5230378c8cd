#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kgran/rng.hpp"

namespace kgran {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline std::string shape_string(Index rows, Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

template <typename Derived>
std::string shape_string(const Eigen::EigenBase<Derived>& m) {
  return shape_string(m.rows(), m.cols());
}

/// Dense rank-2 array of reals. Vectors are stored as n x 1 columns.
template <typename Scalar>
class Tensor {
 public:
  using MatrixType = Matrix<Scalar>;

  Tensor() = default;

  explicit Tensor(MatrixType values, bool requires_grad = false)
      : values_(std::move(values)), requires_grad_(requires_grad) {
    if (values_.rows() <= 0 || values_.cols() <= 0) {
      throw ShapeError("Tensor: extents must be positive, got " + shape_string(values_));
    }
    if (requires_grad_) grad_ = MatrixType::Zero(values_.rows(), values_.cols());
  }

  Tensor(Index rows, Index cols, bool requires_grad = false)
      : Tensor(MatrixType::Zero(std::max<Index>(rows, 0), std::max<Index>(cols, 0)),
               requires_grad) {}

  std::vector<Index> shape() const { return {values_.rows(), values_.cols()}; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  Index size() const { return values_.size(); }

  const MatrixType& values() const { return values_; }
  MatrixType& values() { return values_; }

  bool requires_grad() const { return requires_grad_; }
  const MatrixType& grad() const { return grad_; }
  MatrixType& grad() { return grad_; }

  void zero_grad() {
    if (requires_grad_) grad_.setZero(values_.rows(), values_.cols());
  }

 private:
  MatrixType values_;
  MatrixType grad_;
  bool requires_grad_ = false;
};

template <typename Scalar>
class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
template <typename Scalar>
class Var {
 public:
  Var() = default;

  bool valid() const { return tape_ != nullptr; }
  Tape<Scalar>* tape() const { return tape_; }
  std::size_t id() const { return id_; }

  const Matrix<Scalar>& value() const { return tape_->value(id_); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Scalar scalar() const {
    if (rows() != 1 || cols() != 1) throw ShapeError("Var::scalar on " + shape_string(value()));
    return value()(0, 0);
  }

 private:
  friend class Tape<Scalar>;
  Var(Tape<Scalar>* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape<Scalar>* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in execution order and replays their adjoints in reverse.
/// A tape can be run backward once; record a fresh tape for the next step.
template <typename Scalar>
class Tape {
 public:
  using MatrixType = Matrix<Scalar>;
  using VarType = Var<Scalar>;
  /// Adjoint rule: reads tape.grad(self) and accumulates into the inputs.
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  VarType constant(MatrixType value) {
    nodes_.push_back(Node{std::move(value), {}, nullptr, false, {}});
    return VarType(this, nodes_.size() - 1);
  }

  /// Leaf bound to a persistent tensor. Gradients flow into tensor.grad() on backward.
  VarType leaf(Tensor<Scalar>& tensor) {
    nodes_.push_back(Node{{}, {}, &tensor, tensor.requires_grad(), {}});
    return VarType(this, nodes_.size() - 1);
  }

  VarType record(MatrixType value, std::initializer_list<VarType> inputs, Backward backward) {
    return record_span(std::move(value), std::span<const VarType>(inputs.begin(), inputs.size()),
                       std::move(backward));
  }

  VarType record_span(MatrixType value, std::span<const VarType> inputs, Backward backward) {
    bool needs = false;
    for (const VarType& v : inputs) {
      check_owner(v);
      needs = needs || nodes_[v.id()].needs_grad;
    }
    nodes_.push_back(Node{std::move(value), {}, nullptr, needs, needs ? std::move(backward) : Backward{}});
    return VarType(this, nodes_.size() - 1);
  }

  const MatrixType& value(std::size_t id) const {
    const Node& n = nodes_[id];
    return n.source != nullptr ? n.source->values() : n.value;
  }

  /// Adjoint of a node; empty when no gradient reached it.
  const MatrixType& grad(std::size_t id) const { return nodes_[id].grad; }

  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  template <typename Derived>
  void accumulate(std::size_t id, const Eigen::MatrixBase<Derived>& g) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  void backward(VarType loss) {
    check_owner(loss);
    if (consumed_) throw TapeError("backward: tape already consumed; record a new tape");
    const MatrixType& out = value(loss.id());
    if (out.rows() != 1 || out.cols() != 1) {
      throw ShapeError("backward: loss must be scalar, got " + shape_string(out));
    }
    consumed_ = true;
    if (!nodes_[loss.id()].needs_grad) return;
    nodes_[loss.id()].grad = MatrixType::Ones(1, 1);
    for (std::size_t i = loss.id() + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0) continue;
      if (n.backward) {
        n.backward(*this, i);
      } else if (n.source != nullptr && n.source->requires_grad()) {
        n.source->grad() += n.grad;
      }
    }
  }

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

  void check_owner(const VarType& v) const {
    if (v.tape() != this) throw TapeError("variable belongs to a different tape");
  }

 private:
  struct Node {
    MatrixType value;
    MatrixType grad;
    Tensor<Scalar>* source;
    bool needs_grad;
    Backward backward;
  };

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// ---------------------------------------------------------------------------
// Differentiable operations.

namespace detail {

template <typename Scalar>
void require_same_shape(const char* op, const Var<Scalar>& a, const Var<Scalar>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_string(a.value()) + " vs " +
                     shape_string(b.value()));
  }
}

template <typename Scalar>
Tape<Scalar>& tape_of(const Var<Scalar>& v) {
  if (!v.valid()) throw TapeError("operation on an unbound variable");
  return *v.tape();
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> matmul(const Var<Scalar>& a, const Var<Scalar>& b) {
  Tape<Scalar>& tape = detail::tape_of(a);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " + shape_string(a.value()) + " * " +
                     shape_string(b.value()));
  }
  Matrix<Scalar> out = a.value() * b.value();
  const std::size_t ia = a.id(), ib = b.id();
  return tape.record(std::move(out), {a, b}, [ia, ib](Tape<Scalar>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.needs_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.needs_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

template <typename Scalar>
Var<Scalar> add(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape("add", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return detail::tape_of(a).record(a.value() + b.value(), {a, b},
                                   [ia, ib](Tape<Scalar>& t, std::size_t self) {
                                     t.accumulate(ia, t.grad(self));
                                     t.accumulate(ib, t.grad(self));
                                   });
}

template <typename Scalar>
Var<Scalar> sub(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape("sub", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return detail::tape_of(a).record(a.value() - b.value(), {a, b},
                                   [ia, ib](Tape<Scalar>& t, std::size_t self) {
                                     t.accumulate(ia, t.grad(self));
                                     t.accumulate(ib, -t.grad(self));
                                   });
}

/// Elementwise (Hadamard) product.
template <typename Scalar>
Var<Scalar> mul(const Var<Scalar>& a, const Var<Scalar>& b) {
  detail::require_same_shape("mul", a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return detail::tape_of(a).record(a.value().cwiseProduct(b.value()), {a, b},
                                   [ia, ib](Tape<Scalar>& t, std::size_t self) {
                                     const auto& g = t.grad(self);
                                     t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                                     t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                                   });
}

template <typename Scalar>
Var<Scalar> scale(const Var<Scalar>& a, Scalar factor) {
  const std::size_t ia = a.id();
  return detail::tape_of(a).record(a.value() * factor, {a},
                                   [ia, factor](Tape<Scalar>& t, std::size_t self) {
                                     t.accumulate(ia, t.grad(self) * factor);
                                   });
}

/// 1 - a, elementwise.
template <typename Scalar>
Var<Scalar> one_minus(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  Matrix<Scalar> out = (Scalar(1) - a.value().array()).matrix();
  return detail::tape_of(a).record(std::move(out), {a}, [ia](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, -t.grad(self));
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  Matrix<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return detail::tape_of(a).record(std::move(out), {a}, [ia](Tape<Scalar>& t, std::size_t self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * y * (Scalar(1) - y)).matrix());
  });
}

template <typename Scalar>
Var<Scalar> tanh(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  Matrix<Scalar> out = a.value().array().tanh().matrix();
  return detail::tape_of(a).record(std::move(out), {a}, [ia](Tape<Scalar>& t, std::size_t self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.grad(self).array() * (Scalar(1) - y * y)).matrix());
  });
}

/// Stacks inputs along the row axis (the element axis of column vectors).
/// All inputs must have the same column count.
template <typename Scalar>
Var<Scalar> concat(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Tape<Scalar>& tape = detail::tape_of(parts.front());
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) {
      throw ShapeError("concat: column count mismatch " + shape_string(parts.front().value()) +
                       " vs " + shape_string(p.value()));
    }
    rows += p.rows();
  }
  Matrix<Scalar> out(rows, cols);
  std::vector<std::pair<std::size_t, Index>> layout;
  layout.reserve(parts.size());
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    layout.emplace_back(p.id(), p.rows());
    offset += p.rows();
  }
  return tape.record_span(std::move(out), parts,
                          [layout = std::move(layout)](Tape<Scalar>& t, std::size_t self) {
                            const auto& g = t.grad(self);
                            Index off = 0;
                            for (const auto& [id, n] : layout) {
                              t.accumulate(id, g.middleRows(off, n));
                              off += n;
                            }
                          });
}

template <typename Scalar>
Var<Scalar> concat(std::initializer_list<Var<Scalar>> parts) {
  return concat(std::span<const Var<Scalar>>(parts.begin(), parts.size()));
}

/// Places inputs side by side as columns. All inputs must have the same row count.
template <typename Scalar>
Var<Scalar> hstack(std::span<const Var<Scalar>> parts) {
  if (parts.empty()) throw ShapeError("hstack: no inputs");
  Tape<Scalar>& tape = detail::tape_of(parts.front());
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) {
      throw ShapeError("hstack: row count mismatch " + shape_string(parts.front().value()) +
                       " vs " + shape_string(p.value()));
    }
    cols += p.cols();
  }
  Matrix<Scalar> out(rows, cols);
  std::vector<std::pair<std::size_t, Index>> layout;
  layout.reserve(parts.size());
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    layout.emplace_back(p.id(), p.cols());
    offset += p.cols();
  }
  return tape.record_span(std::move(out), parts,
                          [layout = std::move(layout)](Tape<Scalar>& t, std::size_t self) {
                            const auto& g = t.grad(self);
                            Index off = 0;
                            for (const auto& [id, n] : layout) {
                              t.accumulate(id, g.middleCols(off, n));
                              off += n;
                            }
                          });
}

/// Numerically stable softmax of a plain vector.
template <typename Derived>
Vector<typename Derived::Scalar> softmax_values(const Eigen::MatrixBase<Derived>& scores) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() == 0) throw ShapeError("softmax: empty input");
  const Scalar peak = scores.maxCoeff();
  Vector<Scalar> e = (scores.array() - peak).exp().matrix();
  return e / e.sum();
}

/// Softmax over a column vector.
template <typename Scalar>
Var<Scalar> softmax(const Var<Scalar>& scores) {
  if (scores.cols() != 1) throw ShapeError("softmax: expected column vector, got " + shape_string(scores.value()));
  const std::size_t is = scores.id();
  Matrix<Scalar> out = softmax_values(scores.value().col(0));
  return detail::tape_of(scores).record(std::move(out), {scores},
                                        [is](Tape<Scalar>& t, std::size_t self) {
                                          const auto& y = t.value(self);
                                          const auto& g = t.grad(self);
                                          const Scalar inner = g.cwiseProduct(y).sum();
                                          t.accumulate(is, (y.array() * (g.array() - inner)).matrix());
                                        });
}

template <typename Scalar>
Var<Scalar> sum(const Var<Scalar>& a) {
  const std::size_t ia = a.id();
  Matrix<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  const Index r = a.rows(), c = a.cols();
  return detail::tape_of(a).record(std::move(out), {a}, [ia, r, c](Tape<Scalar>& t, std::size_t self) {
    t.accumulate(ia, Matrix<Scalar>::Constant(r, c, t.grad(self)(0, 0)));
  });
}

/// -log(max(p[index], floor)). The gradient is zero where the floor is active.
template <typename Scalar>
Var<Scalar> negative_log(const Var<Scalar>& p, Index index, Scalar floor) {
  if (p.cols() != 1 || index < 0 || index >= p.rows()) {
    throw ShapeError("negative_log: index " + std::to_string(index) + " outside " +
                     shape_string(p.value()));
  }
  const std::size_t ip = p.id();
  const Scalar raw = p.value()(index, 0);
  const bool clamped = !(raw > floor);
  Matrix<Scalar> out(1, 1);
  out(0, 0) = -std::log(clamped ? floor : raw);
  const Index n = p.rows();
  return detail::tape_of(p).record(std::move(out), {p},
                                   [ip, index, raw, clamped, n](Tape<Scalar>& t, std::size_t self) {
                                     if (clamped) return;
                                     Matrix<Scalar> g = Matrix<Scalar>::Zero(n, 1);
                                     g(index, 0) = -t.grad(self)(0, 0) / raw;
                                     t.accumulate(ip, g);
                                   });
}

class DropoutError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inverted dropout. Identity (the same variable) in evaluation mode or when p == 0.
template <typename Scalar>
Var<Scalar> dropout(const Var<Scalar>& x, double p, Rng& rng, bool training) {
  if (!(p >= 0.0 && p < 1.0)) throw DropoutError("dropout: probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const Scalar keep_scale = Scalar(1.0 / (1.0 - p));
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Index j = 0; j < mask.cols(); ++j) {
    for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = rng.uniform() < p ? Scalar(0) : keep_scale;
  }
  Matrix<Scalar> out = x.value().cwiseProduct(mask);
  const std::size_t ix = x.id();
  return detail::tape_of(x).record(std::move(out), {x},
                                   [ix, mask = std::move(mask)](Tape<Scalar>& t, std::size_t self) {
                                     t.accumulate(ix, t.grad(self).cwiseProduct(mask));
                                   });
}

template <typename Scalar>
Var<Scalar> operator+(const Var<Scalar>& a, const Var<Scalar>& b) {
  return add(a, b);
}

template <typename Scalar>
Var<Scalar> operator-(const Var<Scalar>& a, const Var<Scalar>& b) {
  return sub(a, b);
}

}  // namespace kgran
