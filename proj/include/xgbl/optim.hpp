// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <span>

#include "xgbl/autograd.hpp"
#include "xgbl/tensor.hpp"

namespace xgbl {

// Central differences (f(t + eps e_i) - f(t - eps e_i)) / (2 eps) for every
// coordinate of `theta`.
Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& theta, double eps);

// theta <- theta - lr * g for every pair, then zeroes each gradient.
void sgd_step(std::span<Tensor* const> params, std::span<Tensor* const> grads, double lr,
              Precision precision = Precision::F64);

// Heavy-ball momentum. Not used by the theory probes.
class MomentumSgd {
 public:
  MomentumSgd(double lr, double momentum) : lr_(lr), momentum_(momentum) {}
  void step(std::span<Tensor* const> params, std::span<Tensor* const> grads, Precision precision = Precision::F64);
  void reset() { velocity_.clear(); }

 private:
  double lr_;
  double momentum_;
  std::vector<Tensor> velocity_;
};

}  // namespace xgbl
