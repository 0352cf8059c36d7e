// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "xgbl/rng.hpp"
#include "xgbl/tensor.hpp"

namespace xgbl {

enum class WeakKind { Linear, Stump };
enum class RatePolicy { LineSearch, Fixed };

// Least-squares regressor on the feature rows. Linear: bias + w.x.
// Stump: one split on one feature, a constant on each side.
struct WeakLearner {
  WeakKind kind = WeakKind::Linear;
  double bias = 0.0;
  std::vector<double> w;
  std::size_t feature = 0;
  double threshold = 0.0;
  double left = 0.0;
  double right = 0.0;

  double predict(std::span<const double> x) const;
};

struct ClassicGbModel {
  std::vector<WeakLearner> learners;
  std::vector<double> rates;        // alpha_m
  std::vector<double> train_mse;    // entry m is the MSE of F_m; entry 0 is F_0 = 0

  std::size_t size() const noexcept { return learners.size(); }
  double predict(std::span<const double> x) const;
  std::vector<double> predict(const Tensor& x) const;
};

struct ClassicGbConfig {
  std::size_t M = 50;
  WeakKind weak = WeakKind::Linear;
  RatePolicy rate = RatePolicy::LineSearch;
  double fixed_rate = 0.1;
};

// x is (n x p), y has n entries. Starts from F_0 = 0 and adds one weak
// learner per round fitted to the current residuals.
ClassicGbModel classic_gb_fit(const Tensor& x, std::span<const double> y, const ClassicGbConfig& cfg);

WeakLearner fit_weak_learner(const Tensor& x, std::span<const double> r, WeakKind kind);

struct Regression1d {
  Tensor x;  // (n x 1)
  std::vector<double> y;
};

// y = slope*x + offset + wiggle*sin(3x) + noise*N(0,1), x ~ U[-2, 2].
Regression1d make_regression_1d(std::size_t n, Rng& rng, double slope = 2.0, double offset = 1.0,
                                double wiggle = 0.3, double noise = 0.1);

}  // namespace xgbl
