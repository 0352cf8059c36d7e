// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/classic_gb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "xgbl/error.hpp"

namespace xgbl {

namespace {

double mse(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s / static_cast<double>(r.size());
}

// Solves the p x p system in place by Gaussian elimination with partial
// pivoting. Directions with a negligible pivot get a zero coefficient.
std::vector<double> solve_small(std::vector<double> a, std::vector<double> b, std::size_t p) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  const double tol = 1e-12 * std::max(scale, 1e-300);
  std::vector<bool> dead(p, false);
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < p; ++i)
      if (std::abs(a[i * p + c]) > std::abs(a[piv * p + c])) piv = i;
    if (std::abs(a[piv * p + c]) <= tol) {
      dead[c] = true;
      continue;
    }
    if (piv != c) {
      for (std::size_t j = 0; j < p; ++j) std::swap(a[c * p + j], a[piv * p + j]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t i = c + 1; i < p; ++i) {
      const double f = a[i * p + c] / a[c * p + c];
      if (f == 0.0) continue;
      for (std::size_t j = c; j < p; ++j) a[i * p + j] -= f * a[c * p + j];
      b[i] -= f * b[c];
    }
  }
  std::vector<double> x(p, 0.0);
  for (std::size_t c = p; c-- > 0;) {
    if (dead[c]) continue;
    double s = b[c];
    for (std::size_t j = c + 1; j < p; ++j) s -= a[c * p + j] * x[j];
    x[c] = s / a[c * p + c];
  }
  return x;
}

WeakLearner fit_linear(const Tensor& x, std::span<const double> r) {
  const std::size_t n = x.rows(), p = x.cols();
  std::vector<double> mean(p, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) mean[j] += x.at(i, j);
  for (double& m : mean) m /= static_cast<double>(n);
  const double rbar = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);

  std::vector<double> cov(p * p, 0.0), rhs(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = x.at(i, j) - mean[j];
      rhs[j] += xj * (r[i] - rbar);
      for (std::size_t k = 0; k < p; ++k) cov[j * p + k] += xj * (x.at(i, k) - mean[k]);
    }
  }
  WeakLearner f;
  f.kind = WeakKind::Linear;
  f.w = solve_small(std::move(cov), std::move(rhs), p);
  f.bias = rbar;
  for (std::size_t j = 0; j < p; ++j) f.bias -= f.w[j] * mean[j];
  return f;
}

WeakLearner fit_stump(const Tensor& x, std::span<const double> r) {
  const std::size_t n = x.rows(), p = x.cols();
  const double total = std::accumulate(r.begin(), r.end(), 0.0);
  WeakLearner best;
  best.kind = WeakKind::Stump;
  best.left = best.right = total / static_cast<double>(n);
  best.threshold = std::numeric_limits<double>::infinity();
  // Maximising sum_L^2/n_L + sum_R^2/n_R minimises the split SSE.
  double best_gain = total * total / static_cast<double>(n);
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < p; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x.at(a, j) < x.at(b, j); });
    double left_sum = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += r[order[k]];
      const double xa = x.at(order[k], j), xb = x.at(order[k + 1], j);
      if (xa == xb) continue;
      const double nl = static_cast<double>(k + 1), nr = static_cast<double>(n - k - 1);
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr;
      if (gain > best_gain) {
        best_gain = gain;
        best.feature = j;
        best.threshold = 0.5 * (xa + xb);
        best.left = left_sum / nl;
        best.right = right_sum / nr;
      }
    }
  }
  return best;
}

}  // namespace

double WeakLearner::predict(std::span<const double> x) const {
  if (kind == WeakKind::Stump) return x[feature] <= threshold ? left : right;
  double s = bias;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * x[j];
  return s;
}

double ClassicGbModel::predict(std::span<const double> x) const {
  double s = 0.0;
  for (std::size_t m = 0; m < learners.size(); ++m) s += rates[m] * learners[m].predict(x);
  return s;
}

std::vector<double> ClassicGbModel::predict(const Tensor& x) const {
  require(x.rank() == 2, "ClassicGbModel::predict: expected a matrix");
  std::vector<double> out(x.rows());
  const auto d = x.data();
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = predict(d.subspan(i * x.cols(), x.cols()));
  return out;
}

WeakLearner fit_weak_learner(const Tensor& x, std::span<const double> r, WeakKind kind) {
  require(x.rank() == 2 && x.rows() > 0 && x.cols() > 0, "fit_weak_learner: empty feature matrix");
  require(r.size() == x.rows(), "fit_weak_learner: residual count differs from row count");
  return kind == WeakKind::Linear ? fit_linear(x, r) : fit_stump(x, r);
}

ClassicGbModel classic_gb_fit(const Tensor& x, std::span<const double> y, const ClassicGbConfig& cfg) {
  require(x.rank() == 2 && x.rows() > 0 && x.cols() > 0, "classic_gb_fit: empty data");
  require(y.size() == x.rows(), "classic_gb_fit: target count differs from row count");
  if (cfg.M < 1) throw ConfigError("M", "must be at least 1");
  const std::size_t n = x.rows(), p = x.cols();
  const auto xd = x.data();

  ClassicGbModel model;
  std::vector<double> resid(y.begin(), y.end());
  model.train_mse.push_back(mse(resid));
  std::vector<double> f(n);
  for (std::size_t m = 0; m < cfg.M; ++m) {
    WeakLearner h = fit_weak_learner(x, resid, cfg.weak);
    double rf = 0.0, ff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      f[i] = h.predict(xd.subspan(i * p, p));
      rf += resid[i] * f[i];
      ff += f[i] * f[i];
    }
    double rate = cfg.fixed_rate;
    if (cfg.rate == RatePolicy::LineSearch) rate = ff > 0.0 ? rf / ff : 0.0;
    std::vector<double> next(resid);
    for (std::size_t i = 0; i < n; ++i) next[i] -= rate * f[i];
    double next_mse = mse(next);
    // Once the residual is orthogonal to the learner's span the optimal rate
    // is noise and can cost an ulp; alpha = 0 is then the better line point.
    if (cfg.rate == RatePolicy::LineSearch && next_mse > model.train_mse.back()) {
      rate = 0.0;
      next = resid;
      next_mse = model.train_mse.back();
    }
    resid = std::move(next);
    model.learners.push_back(std::move(h));
    model.rates.push_back(rate);
    model.train_mse.push_back(next_mse);
  }
  return model;
}

Regression1d make_regression_1d(std::size_t n, Rng& rng, double slope, double offset, double wiggle, double noise) {
  require(n >= 1, "make_regression_1d: n must be positive");
  Regression1d d{Tensor({n, 1}), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = -2.0 + 4.0 * rng.uniform();
    d.x[i] = xi;
    d.y[i] = slope * xi + offset + wiggle * std::sin(3.0 * xi) + noise * rng.gaussian();
  }
  return d;
}

}  // namespace xgbl
