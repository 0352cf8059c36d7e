// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "xgbl/tensor.hpp"

namespace xgbl {

// F32 mode rounds every recorded value through float, so the f64 and f32
// code paths are the same kernels.
enum class Precision { F64, F32 };

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view s);
double round_to(Precision p, double v);
void round_inplace(Precision p, Tensor& t);

enum class OpKind {
  Leaf,
  MatMul,
  Transpose,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  Relu,
  Gelu,
  Softmax,
  LayerNorm,
  Gather,
  Reshape,
  Sum,
  Mean,
  CrossEntropy,
  Mse,
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Append-only computation graph. Nodes are recorded in execution order, so
// reverse id order is a valid topological order for the backward pass.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(Precision precision = Precision::F64) : precision_(precision) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Tensor value, bool requires_grad = false);
  Var constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(Var v) const { return nodes_.at(v.id()).value; }
  // Gradient of the last backward() target w.r.t. `v`; zeros if `v` did not
  // participate.
  Tensor grad(Var v) const;
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }
  OpKind op(Var v) const { return nodes_.at(v.id()).op; }

  // Populates gradients for every node that requires grad. `loss` must hold
  // a single element.
  void backward(Var loss);

  std::size_t size() const noexcept { return nodes_.size(); }
  Precision precision() const noexcept { return precision_; }

  // Kernel-author interface.
  Var record(OpKind op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward);
  const Tensor& node_value(std::size_t id) const { return nodes_[id].value; }
  const Tensor& node_grad(std::size_t id) const { return nodes_[id].grad; }
  bool node_requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const std::vector<std::size_t>& node_inputs(std::size_t id) const { return nodes_[id].inputs; }
  void accumulate(std::size_t id, const Tensor& g);

 private:
  struct Node {
    OpKind op = OpKind::Leaf;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  Precision precision_;
  std::vector<Node> nodes_;
};

// Differentiable kernels. Every op validates shapes and rejects non-finite
// results.
namespace ag {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
// tanh approximation.
Var gelu(Var a);
// Row-wise, max-subtracted.
Var softmax_rows(Var a);
// Row-wise normalization without affine parameters.
Var layer_norm_rows(Var a, double eps = 1e-5);
// Row gather: out[i] = table[ids[i]].
Var gather_rows(Var table, const std::vector<std::size_t>& ids);
Var reshape(Var a, Shape shape);
Var sum(Var a);
Var mean(Var a);
// Mean over rows of -log softmax(logits)[target].
Var cross_entropy(Var logits, const std::vector<std::size_t>& targets);
// Mean over rows of 0.5 * ||pred_row - target_row||^2.
Var mse(Var pred, const Tensor& target);
// sum(a * a)
Var sum_squares(Var a);

}  // namespace ag

// Scalar-valued gelu and its derivative, shared with tests.
double gelu_value(double x);
double gelu_derivative(double x);

}  // namespace xgbl
