#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "atn/tensor.hpp"

namespace atn {

class Tape;

// Handle to one node of a Tape. Cheap to copy; only valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }

  const Tensor& value() const;
  const Dims& dims() const { return value().dims(); }
  std::size_t size() const { return value().size(); }
  double item() const { return value().item(); }
  // Gradient of the last backward() call w.r.t. this node; empty if unreached.
  std::span<const double> grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records operations in execution order. Node ids are assigned sequentially,
// so the record order is a topological order and backward() simply walks it
// in reverse. One tape per forward pass.
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf owning a copy of t. Differentiable iff t.requires_grad().
  Var constant(Tensor t);
  // Leaf aliasing an external tensor (typically a model parameter). When
  // t.requires_grad(), backward() adds the leaf gradient into t.grad().
  Var bind(Tensor& t);
  // Read-only alias; never receives gradient. Safe to share t across tapes
  // on different threads.
  Var bind(const Tensor& t);

  Var record(Tensor value, std::vector<std::size_t> inputs, Backward backward);

  // Seeds d(loss)/d(loss) = 1 and propagates. Gradients from repeated uses
  // of a node accumulate additively.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  const Tensor& value(std::size_t id) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  // Gradient buffer of a node, zero-allocated on first access.
  std::span<double> grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    Tensor* grad_sink = nullptr;
    std::vector<std::size_t> inputs;
    Backward backward;
    std::vector<double> grad;
    bool needs_grad = false;
  };
  std::vector<Node> nodes_;
};

// Affine and elementwise algebra. Shapes must match exactly; a rank-0 operand
// broadcasts against anything.
Var matmul(Var a, Var b);  // [m x k] * [k x n] or [m x k] * [k]
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double s);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var abs(Var a);
// log(max(a, floor)); the gradient is zero where the floor is active.
Var log_floor(Var a, double floor);

// Row-wise softmax of a matrix; a vector is treated as one row.
Var softmax_rows(Var a);

// Stacks equal-length vectors (or equal-width matrices) into a matrix.
Var concat_rows(std::span<const Var> parts);
// Flattens and joins any tensors into one vector.
Var concat_vec(std::span<const Var> parts);
Var sum_rows(Var a);  // [r x n] -> [n]
Var sum_all(Var a);   // -> scalar
Var mean_all(Var a);  // -> scalar
Var add_n(std::span<const Var> parts);
Var transpose(Var a);  // matrix, or vector -> [n x 1]
Var reshape(Var a, Dims dims);
Var row(Var a, std::size_t r);      // [r x n] -> [n]
Var pick(Var a, std::size_t index);  // flat element -> scalar

}  // namespace atn
