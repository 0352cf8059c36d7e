// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/optim.hpp"

namespace xgbl {

Tensor finite_diff_gradient(const std::function<double(const Tensor&)>& f, const Tensor& theta, double eps) {
  require(eps > 0.0, "finite_diff_gradient: eps must be positive");
  Tensor grad = Tensor::zeros_like(theta);
  Tensor probe = theta;
  for (std::size_t i = 0; i < theta.numel(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double up = f(probe);
    probe[i] = orig - eps;
    const double down = f(probe);
    probe[i] = orig;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

void sgd_step(std::span<Tensor* const> params, std::span<Tensor* const> grads, double lr, Precision precision) {
  require(params.size() == grads.size(), "sgd_step: parameter and gradient counts differ");
  require(lr >= 0.0, "sgd_step: learning rate must be non-negative");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i]->same_shape(*grads[i])) {
      throw ContractError("sgd_step: parameter " + to_string(params[i]->shape()) + " vs gradient " +
                          to_string(grads[i]->shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& g = *grads[i];
    for (std::size_t j = 0; j < p.numel(); ++j) p[j] -= lr * g[j];
    round_inplace(precision, p);
    g.fill(0.0);
  }
}

void MomentumSgd::step(std::span<Tensor* const> params, std::span<Tensor* const> grads, Precision precision) {
  require(params.size() == grads.size(), "MomentumSgd: parameter and gradient counts differ");
  if (velocity_.size() != params.size()) {
    velocity_.clear();
    for (auto* p : params) velocity_.push_back(Tensor::zeros_like(*p));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& v = velocity_[i];
    Tensor& g = *grads[i];
    require(v.same_shape(g), "MomentumSgd: gradient shape changed between steps");
    for (std::size_t j = 0; j < v.numel(); ++j) v[j] = momentum_ * v[j] + g[j];
    Tensor& p = *params[i];
    for (std::size_t j = 0; j < p.numel(); ++j) p[j] -= lr_ * v[j];
    round_inplace(precision, p);
    g.fill(0.0);
  }
}

}  // namespace xgbl
