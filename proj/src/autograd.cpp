// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xgbl {

std::string_view to_string(Precision p) { return p == Precision::F64 ? "f64" : "f32"; }

Precision parse_precision(std::string_view s) {
  if (s == "f64") return Precision::F64;
  if (s == "f32") return Precision::F32;
  throw ConfigError("precision", "expected f64 or f32, got '" + std::string(s) + "'");
}

double round_to(Precision p, double v) {
  return p == Precision::F32 ? static_cast<double>(static_cast<float>(v)) : v;
}

void round_inplace(Precision p, Tensor& t) {
  if (p == Precision::F64) return;
  for (auto& v : t.data()) v = static_cast<double>(static_cast<float>(v));
}

const Tensor& Var::value() const {
  require(tape_ != nullptr, "use of an unbound Var");
  return tape_->value(*this);
}

Var Tape::leaf(Tensor value, bool requires_grad) {
  check_finite(value, "leaf");
  round_inplace(precision_, value);
  Node n;
  n.op = OpKind::Leaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind op, std::vector<std::size_t> inputs, Tensor value, BackwardFn backward) {
  round_inplace(precision_, value);
  Node n;
  n.op = op;
  n.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](std::size_t i) { return nodes_[i].requires_grad; });
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id());
  if (n.grad.empty() && !n.value.empty()) return Tensor::zeros_like(n.value);
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Tensor& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
  } else {
    kernels::add_inplace(n.grad, g);
  }
}

void Tape::backward(Var loss) {
  require(loss.tape() == this, "backward: loss belongs to a different tape");
  const Node& root = nodes_.at(loss.id());
  require(root.value.numel() == 1, "backward: loss must be a scalar, got shape " + to_string(root.value.shape()));
  for (auto& n : nodes_) n.grad = Tensor();
  if (!root.requires_grad) return;
  nodes_[loss.id()].grad = Tensor(root.value.shape(), 1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, id);
  }
}

double gelu_value(double x) {
  constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
  return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double gelu_derivative(double x) {
  constexpr double c = 0.7978845608028654;
  const double t = std::tanh(c * (x + 0.044715 * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * 0.044715 * x * x);
}

namespace ag {

namespace {

Tape& same_tape(Var a, Var b, const char* op) {
  require(a.valid() && b.valid(), std::string(op) + ": unbound Var");
  require(a.tape() == b.tape(), std::string(op) + ": operands live on different tapes");
  return *a.tape();
}

Var emit(Tape& tape, OpKind op, std::vector<std::size_t> inputs, Tensor out, Tape::BackwardFn fn, const char* name) {
  check_finite(out, name);
  return tape.record(op, std::move(inputs), std::move(out), std::move(fn));
}

void require_matrix(const Tensor& t, const char* op) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + ": expected a matrix, got " + to_string(t.shape()));
}

template <typename F, typename DF>
Var unary_map(Var a, OpKind op, const char* name, F f, DF df) {
  Tape& tape = *a.tape();
  Tensor out = a.value();
  for (auto& v : out.data()) v = f(v);
  const std::size_t ia = a.id();
  return emit(tape, op, {ia}, std::move(out),
              [ia, df](Tape& t, std::size_t self) {
                const Tensor& x = t.node_value(ia);
                Tensor g = t.node_grad(self);
                for (std::size_t i = 0; i < g.numel(); ++i) g[i] *= df(x[i]);
                t.accumulate(ia, g);
              },
              name);
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "matmul");
  Tensor out = kernels::matmul(a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return emit(tape, OpKind::MatMul, {ia, ib}, std::move(out),
              [ia, ib](Tape& t, std::size_t self) {
                const Tensor& g = t.node_grad(self);
                if (t.node_requires_grad(ia)) t.accumulate(ia, kernels::matmul(g, kernels::transpose(t.node_value(ib))));
                if (t.node_requires_grad(ib)) t.accumulate(ib, kernels::matmul(kernels::transpose(t.node_value(ia)), g));
              },
              "matmul");
}

Var transpose(Var a) {
  require_matrix(a.value(), "transpose");
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Transpose, {ia}, kernels::transpose(a.value()),
              [ia](Tape& t, std::size_t self) { t.accumulate(ia, kernels::transpose(t.node_grad(self))); },
              "transpose");
}

Var add(Var a, Var b) {
  Tape& tape = same_tape(a, b, "add");
  const std::size_t ia = a.id(), ib = b.id();
  return emit(tape, OpKind::Add, {ia, ib}, kernels::add(a.value(), b.value()),
              [ia, ib](Tape& t, std::size_t self) {
                t.accumulate(ia, t.node_grad(self));
                t.accumulate(ib, t.node_grad(self));
              },
              "add");
}

Var sub(Var a, Var b) {
  Tape& tape = same_tape(a, b, "sub");
  const std::size_t ia = a.id(), ib = b.id();
  return emit(tape, OpKind::Sub, {ia, ib}, kernels::sub(a.value(), b.value()),
              [ia, ib](Tape& t, std::size_t self) {
                t.accumulate(ia, t.node_grad(self));
                if (t.node_requires_grad(ib)) t.accumulate(ib, kernels::scale(t.node_grad(self), -1.0));
              },
              "sub");
}

Var mul(Var a, Var b) {
  Tape& tape = same_tape(a, b, "mul");
  const std::size_t ia = a.id(), ib = b.id();
  return emit(tape, OpKind::Mul, {ia, ib}, kernels::mul(a.value(), b.value()),
              [ia, ib](Tape& t, std::size_t self) {
                const Tensor& g = t.node_grad(self);
                if (t.node_requires_grad(ia)) t.accumulate(ia, kernels::mul(g, t.node_value(ib)));
                if (t.node_requires_grad(ib)) t.accumulate(ib, kernels::mul(g, t.node_value(ia)));
              },
              "mul");
}

Var scale(Var a, double s) {
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Scale, {ia}, kernels::scale(a.value(), s),
              [ia, s](Tape& t, std::size_t self) { t.accumulate(ia, kernels::scale(t.node_grad(self), s)); }, "scale");
}

Var add_scalar(Var a, double s) {
  Tensor out = a.value();
  for (auto& v : out.data()) v += s;
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::AddScalar, {ia}, std::move(out),
              [ia](Tape& t, std::size_t self) { t.accumulate(ia, t.node_grad(self)); }, "add_scalar");
}

Var relu(Var a) {
  return unary_map(
      a, OpKind::Relu, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(Var a) { return unary_map(a, OpKind::Gelu, "gelu", gelu_value, gelu_derivative); }

Var softmax_rows(Var a) {
  const Tensor& x = a.value();
  require_matrix(x, "softmax_rows");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    double mx = x.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, x.at(i, j));
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      y.at(i, j) = std::exp(x.at(i, j) - mx);
      z += y.at(i, j);
    }
    for (std::size_t j = 0; j < n; ++j) y.at(i, j) /= z;
  }
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Softmax, {ia}, std::move(y),
              [ia](Tape& t, std::size_t self) {
                const Tensor& yv = t.node_value(self);
                const Tensor& g = t.node_grad(self);
                const std::size_t rows = yv.rows(), cols = yv.cols();
                Tensor dx({rows, cols});
                for (std::size_t i = 0; i < rows; ++i) {
                  double s = 0.0;
                  for (std::size_t j = 0; j < cols; ++j) s += g.at(i, j) * yv.at(i, j);
                  for (std::size_t j = 0; j < cols; ++j) dx.at(i, j) = yv.at(i, j) * (g.at(i, j) - s);
                }
                t.accumulate(ia, dx);
              },
              "softmax_rows");
}

Var layer_norm_rows(Var a, double eps) {
  const Tensor& x = a.value();
  require_matrix(x, "layer_norm_rows");
  const std::size_t m = x.rows(), n = x.cols();
  Tensor y({m, n});
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += x.at(i, j);
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (x.at(i, j) - mu) * (x.at(i, j) - mu);
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) y.at(i, j) = (x.at(i, j) - mu) * inv_std[i];
  }
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::LayerNorm, {ia}, std::move(y),
              [ia, inv_std](Tape& t, std::size_t self) {
                const Tensor& yv = t.node_value(self);
                const Tensor& g = t.node_grad(self);
                const std::size_t rows = yv.rows(), cols = yv.cols();
                const double inv_n = 1.0 / static_cast<double>(cols);
                Tensor dx({rows, cols});
                for (std::size_t i = 0; i < rows; ++i) {
                  double mg = 0.0, mgy = 0.0;
                  for (std::size_t j = 0; j < cols; ++j) {
                    mg += g.at(i, j);
                    mgy += g.at(i, j) * yv.at(i, j);
                  }
                  mg *= inv_n;
                  mgy *= inv_n;
                  for (std::size_t j = 0; j < cols; ++j) {
                    dx.at(i, j) = inv_std[i] * (g.at(i, j) - mg - yv.at(i, j) * mgy);
                  }
                }
                t.accumulate(ia, dx);
              },
              "layer_norm_rows");
}

Var gather_rows(Var table, const std::vector<std::size_t>& ids) {
  const Tensor& w = table.value();
  require_matrix(w, "gather_rows");
  const std::size_t n = w.cols();
  Tensor out({ids.size(), n});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= w.rows()) {
      throw ShapeError("gather_rows: index " + std::to_string(ids[i]) + " out of range for table " +
                       to_string(w.shape()));
    }
    std::copy_n(w.data().begin() + static_cast<std::ptrdiff_t>(ids[i] * n), n,
                out.data().begin() + static_cast<std::ptrdiff_t>(i * n));
  }
  const std::size_t it = table.id();
  return emit(*table.tape(), OpKind::Gather, {it}, std::move(out),
              [it, ids](Tape& t, std::size_t self) {
                const Tensor& g = t.node_grad(self);
                Tensor dw = Tensor::zeros_like(t.node_value(it));
                const std::size_t cols = dw.cols();
                for (std::size_t i = 0; i < ids.size(); ++i)
                  for (std::size_t j = 0; j < cols; ++j) dw.at(ids[i], j) += g.at(i, j);
                t.accumulate(it, dw);
              },
              "gather_rows");
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Reshape, {ia}, std::move(out),
              [ia](Tape& t, std::size_t self) {
                t.accumulate(ia, t.node_grad(self).reshaped(t.node_value(ia).shape()));
              },
              "reshape");
}

Var sum(Var a) {
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Sum, {ia}, Tensor::scalar(kernels::sum(a.value())),
              [ia](Tape& t, std::size_t self) {
                Tensor g = Tensor::zeros_like(t.node_value(ia));
                g.fill(t.node_grad(self)[0]);
                t.accumulate(ia, g);
              },
              "sum");
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().numel());
  require(n > 0, "mean of an empty tensor");
  const std::size_t ia = a.id();
  return emit(*a.tape(), OpKind::Mean, {ia}, Tensor::scalar(kernels::sum(a.value()) / n),
              [ia, n](Tape& t, std::size_t self) {
                Tensor g = Tensor::zeros_like(t.node_value(ia));
                g.fill(t.node_grad(self)[0] / n);
                t.accumulate(ia, g);
              },
              "mean");
}

Var cross_entropy(Var logits, const std::vector<std::size_t>& targets) {
  const Tensor& z = logits.value();
  require_matrix(z, "cross_entropy");
  const std::size_t m = z.rows(), n = z.cols();
  if (targets.size() != m) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " + to_string(z.shape()));
  }
  require(m > 0, "cross_entropy on zero rows");
  Tensor probs({m, n});
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (targets[i] >= n) throw ShapeError("cross_entropy: target class out of range");
    double mx = z.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, z.at(i, j));
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::exp(z.at(i, j) - mx);
    const double lse = mx + std::log(s);
    total += lse - z.at(i, targets[i]);
    for (std::size_t j = 0; j < n; ++j) probs.at(i, j) = std::exp(z.at(i, j) - lse);
  }
  const std::size_t il = logits.id();
  return emit(*logits.tape(), OpKind::CrossEntropy, {il}, Tensor::scalar(total / static_cast<double>(m)),
              [il, probs, targets](Tape& t, std::size_t self) {
                const double g = t.node_grad(self)[0] / static_cast<double>(targets.size());
                Tensor dz = probs;
                for (std::size_t i = 0; i < targets.size(); ++i) dz.at(i, targets[i]) -= 1.0;
                t.accumulate(il, kernels::scale(dz, g));
              },
              "cross_entropy");
}

Var mse(Var pred, const Tensor& target) {
  const Tensor& p = pred.value();
  if (!p.same_shape(target)) {
    throw ShapeError("mse: prediction " + to_string(p.shape()) + " vs target " + to_string(target.shape()));
  }
  require(p.rank() >= 1 && p.dim(0) > 0, "mse on zero rows");
  const double rows = static_cast<double>(p.dim(0));
  Tensor diff = kernels::sub(p, target);
  const double loss = 0.5 * kernels::dot(diff, diff) / rows;
  const std::size_t ip = pred.id();
  return emit(*pred.tape(), OpKind::Mse, {ip}, Tensor::scalar(loss),
              [ip, diff, rows](Tape& t, std::size_t self) {
                t.accumulate(ip, kernels::scale(diff, t.node_grad(self)[0] / rows));
              },
              "mse");
}

Var sum_squares(Var a) { return sum(mul(a, a)); }

}  // namespace ag
}  // namespace xgbl
