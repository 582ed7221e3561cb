#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "swae/types.hpp"

namespace swae {

class Tape;

/// Trainable array with a persistent gradient buffer. Models own their
/// Parameters; each training step binds them onto a fresh Tape.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v)
      : name(std::move(n)), value(std::move(v)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
};

/// Handle to a node on a gradient tape. Cheap to copy; the backing value
/// and gradient live on the Tape.
class Tensor {
public:
  Tensor() = default;

  Index rows() const;
  Index cols() const;
  const Matrix& value() const;
  const Matrix& grad() const;

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Tensor(Tape* t, int id) : tape_(t), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode gradient tape over dense matrices. Nodes are appended in
/// forward order; backward() sweeps them once in reverse, so a tensor that
/// feeds several consumers accumulates the sum of its branch gradients.
/// One tape per training step; tapes are never shared across threads.
class Tape {
public:
  using BackwardFn = std::function<void(Tape&, const Matrix& upstream)>;

  /// Leaf that does not require a gradient (inputs, masks, prior samples).
  Tensor constant(Matrix v) { return push(std::move(v), nullptr, nullptr); }

  /// Leaf bound to a Parameter; backward() adds the leaf gradient into
  /// Parameter::grad.
  Tensor param(Parameter& p) { return push(p.value, nullptr, &p); }

  /// Interior node. `fn` receives the upstream gradient and must add each
  /// operand's contribution via grad_ref().
  Tensor make(Matrix v, BackwardFn fn) {
    return push(std::move(v), std::move(fn), nullptr);
  }

  /// Attaches the backward rule after the node exists, for rules that need
  /// a handle to their own output (e.g. tanh reuses the forward result).
  void set_backprop(const Tensor& t, BackwardFn fn) {
    nodes_[t.id_].backprop = std::move(fn);
  }

  const Matrix& value(const Tensor& t) const { return nodes_[t.id_].value; }

  /// Gradient buffer of a node, allocated (zeroed) on first use.
  Matrix& grad_ref(const Tensor& t) {
    Node& n = nodes_[t.id_];
    if (n.grad.size() == 0) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  /// Reverse sweep from a scalar loss. Seeds d(loss)/d(loss) = 1, applies
  /// every recorded backward rule, then accumulates leaf gradients into
  /// their bound Parameters.
  void backward(const Tensor& loss) {
    if (loss.tape_ != this) throw std::invalid_argument("backward: tensor from another tape");
    const Matrix& lv = nodes_[loss.id_].value;
    if (lv.rows() != 1 || lv.cols() != 1)
      throw std::invalid_argument("backward: loss must be scalar, got " +
                                  shape_str(lv));
    grad_ref(loss)(0, 0) += 1.0;
    for (int i = loss.id_; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.grad.size() == 0) continue; // unreached by the loss
      if (n.backprop) n.backprop(*this, n.grad);
      if (n.source) n.source->grad += n.grad;
    }
  }

  std::size_t size() const { return nodes_.size(); }

  static std::string shape_str(const Matrix& m) {
    return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
  }

private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backprop;
    Parameter* source = nullptr;
  };

  Tensor push(Matrix v, BackwardFn fn, Parameter* src) {
    nodes_.push_back(Node{std::move(v), Matrix(), std::move(fn), src});
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
};

/// Binds Parameters onto a tape, one leaf per Parameter no matter how often
/// it is requested within the graph.
class Binder {
public:
  explicit Binder(Tape& t) : tape_(&t) {}

  Tensor operator()(Parameter& p) {
    auto it = cache_.find(&p);
    if (it != cache_.end()) return it->second;
    Tensor t = tape_->param(p);
    cache_.emplace(&p, t);
    return t;
  }

  Tape& tape() { return *tape_; }

private:
  Tape* tape_;
  std::unordered_map<Parameter*, Tensor> cache_;
};

inline Index Tensor::rows() const { return tape_->value(*this).rows(); }
inline Index Tensor::cols() const { return tape_->value(*this).cols(); }
inline const Matrix& Tensor::value() const { return tape_->value(*this); }
inline const Matrix& Tensor::grad() const { return tape_->grad_ref(*this); }

} // namespace swae
