// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "xgbl/autograd.hpp"
#include "xgbl/rng.hpp"
#include "xgbl/tensor.hpp"

namespace xgbl::testing {

// Builds a scalar from leaf handles on a fresh tape.
using GraphFn = std::function<Var(Tape&, const std::vector<Var>&)>;

struct GradCheck {
  double max_rel = 0.0;  // worst relative error over all inputs
};

// Analytic gradients from the tape against our own central differences.
// Relative error is ||g - g_fd|| / max(||g||, ||g_fd||, floor).
inline GradCheck check_gradients(const GraphFn& fn, const std::vector<Tensor>& inputs, double eps = 1e-6,
                                 double floor = 1e-8) {
  auto eval = [&](const std::vector<Tensor>& xs) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& x : xs) vars.push_back(tape.leaf(x, true));
    return fn(tape, vars).value().item();
  };
  Tape tape;
  std::vector<Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.leaf(x, true));
  tape.backward(fn(tape, vars));

  GradCheck out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor g = tape.grad(vars[k]);
    Tensor fd(inputs[k].shape());
    std::vector<Tensor> xs = inputs;
    for (std::size_t i = 0; i < fd.numel(); ++i) {
      const double orig = xs[k][i];
      xs[k][i] = orig + eps;
      const double up = eval(xs);
      xs[k][i] = orig - eps;
      const double down = eval(xs);
      xs[k][i] = orig;
      fd[i] = (up - down) / (2 * eps);
    }
    double diff = 0.0, ng = 0.0, nf = 0.0;
    for (std::size_t i = 0; i < fd.numel(); ++i) {
      diff += (g[i] - fd[i]) * (g[i] - fd[i]);
      ng += g[i] * g[i];
      nf += fd[i] * fd[i];
    }
    const double denom = std::max({std::sqrt(ng), std::sqrt(nf), floor});
    out.max_rel = std::max(out.max_rel, std::sqrt(diff) / denom);
  }
  return out;
}

inline Tensor randn(Rng& rng, Shape shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = scale * rng.gaussian();
  return t;
}

// Weighted sum with fixed random weights so every output entry matters.
inline Var weighted_sum(Var out, std::uint64_t seed = 99) {
  Rng rng(seed);
  Tensor w = randn(rng, out.shape());
  return ag::sum(ag::mul(out, out.tape()->constant(w)));
}

}  // namespace xgbl::testing
