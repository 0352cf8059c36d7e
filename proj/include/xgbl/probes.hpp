// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xgbl/boosting.hpp"
#include "xgbl/tasks.hpp"

namespace xgbl {

// One replicate at one grid point.
struct ProbeRow {
  std::vector<double> params;
  std::uint64_t seed = 0;
  std::vector<double> metrics;
};

struct PointSummary {
  std::vector<double> params;
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> std;  // sample std (n - 1); 0 for a single replicate
};

struct FitResult {
  std::string name;
  std::vector<std::string> features;
  std::vector<double> coefs;  // non-negative
  double r2 = 0.0;
  double rss = 0.0;
};

struct ProbeCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ProbeReport {
  std::string probe;
  std::vector<std::string> param_names;
  std::vector<std::string> metric_names;
  std::vector<ProbeRow> rows;
  std::vector<FitResult> fits;
  std::vector<ProbeCheck> checks;
  // Measured theory constants (G, L_prime, beta, mu, fitted C_i, ...).
  std::map<std::string, double> constants;

  std::size_t metric_index(const std::string& name) const;
  // Grid points in first-seen order.
  std::vector<PointSummary> summarize() const;
  std::optional<PointSummary> point(const std::vector<double>& params) const;
  bool all_passed() const;

  // One row per grid point per seed, preceded by a schema line.
  std::string to_csv() const;
  std::string summary_json() const;
};

// Non-negative least squares fit y ~ X c; rows of x are feature vectors.
FitResult fit_nonneg(std::string name, std::vector<std::string> features, const std::vector<std::vector<double>>& x,
                     const std::vector<double>& y);

// Full-batch gradient of the mean task loss w.r.t. every weight, taken at
// the adapted point when adapters are given.
std::map<WeightId, Tensor> full_gradient(const ModelSpec& model, const Dataset& data,
                                         const AdapterSet* adapters = nullptr);

// Random orthonormal d x r frame; the columns for r are a prefix of those
// for any larger r drawn from the same rng state.
Tensor orthonormal_frame(Rng& rng, std::size_t d, std::size_t r);

// Rank-r gradient approximation. One booster of M plain SGD steps starts
// from an orthonormal A; its accumulated update -alpha A B / (eta M) is
// compared with the full-batch gradient at the updated point.
struct GradApproxConfig {
  std::vector<std::size_t> r_grid{1, 2, 4, 8, 16};
  std::vector<std::size_t> M_grid{32};
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  double lr = 1e-4;
  std::size_t batch_size = 2;
  AdaptOptions adapt{};
};
ProbeReport gradient_approx_probe(const ModelSpec& model, const Dataset& data, const GradApproxConfig& cfg);

// Accumulated-update bound per trace: ||A - A_init||_F and ||B - B_init||_F
// against eta * steps * G_t. `slack` is a relative allowance for rounding.
struct UpdateNormOptions {
  double lr = 0.05;
  double lambda = 0.0;
  double slack = 1e-9;
  double alpha = 1.0;
};
ProbeReport update_norm_probe(const std::vector<BoosterTrace>& traces, const UpdateNormOptions& opts);

// Runs `runs` xgblora fits cycling over the (r, kappa) grid and feeds all
// their traces through update_norm_probe.
struct UpdateNormSuite {
  std::vector<std::size_t> r_grid{1, 4, 8};
  std::vector<std::size_t> kappa_grid{1, 8, 32};
  std::size_t runs = 9;
  std::size_t T = 6;
  BoostConfig base{};
};
ProbeReport update_norm_suite(const ModelSpec& start, const Dataset& data, const UpdateNormSuite& suite);

// Gradient Lipschitz estimate. Pairs come in chains: each chain starts at a
// random point within `radius` of the model weights and follows the
// gradient-difference direction, so the ratio climbs toward the top Hessian
// eigenvalue on quadratic losses.
struct LipschitzConfig {
  std::size_t n_pairs = 64;
  double radius = 0.1;
  std::size_t chain_length = 16;
};
struct LipschitzEstimate {
  double L_prime = 0.0;
  std::size_t best_pair = 0;
  std::vector<double> ratios;       // per valid pair
  std::vector<double> running_max;  // prefix maxima
  std::size_t skipped = 0;          // W1 == W2 pairs
};
LipschitzEstimate lipschitz_probe(const ModelSpec& model, const Dataset& data, const LipschitzConfig& cfg, Rng& rng);

// Closed-form optimum and curvature of a single linear layer under squared
// loss. Throws ContractError for any other model or when N < d_in.
struct QuadraticOptimum {
  ModelSpec optimum;
  double loss = 0.0;  // L*
  double beta = 0.0;  // largest Hessian eigenvalue
  double mu = 0.0;    // smallest Hessian eigenvalue
};
QuadraticOptimum quadratic_optimum(const ModelSpec& model, const Dataset& data);

// Optimality gap after T boosters for each (T, r) grid point.
struct ConvergenceConfig {
  std::vector<std::size_t> T_grid{1, 4, 16, 64};
  std::vector<std::size_t> r_grid{1};
  std::size_t kappa = 8;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  double lr = 0.05;
  std::size_t batch_size = 16;
  double init_scale = kDefaultAdapterInitScale;
};
ProbeReport convergence_sweep(const ModelSpec& start, const Dataset& data, const ConvergenceConfig& cfg);

// Held-out teacher gap after xgblora fits at each (r, T) point with
// kappa = K / T; T = 0 leaves the start model untouched.
struct ExpressivenessConfig {
  std::vector<std::size_t> r_grid{1, 8};
  std::vector<std::size_t> T_grid{1, 64};
  std::size_t K = 512;
  std::size_t seeds = 5;
  std::uint64_t seed = 0;
  double lr = 0.05;
  std::size_t batch_size = 16;
  double init_scale = kDefaultAdapterInitScale;
  std::size_t layers_sampled = 8;
};
ProbeReport expressiveness_sweep(const TeacherTask& task, const Dataset& train, const ExpressivenessConfig& cfg);

// Pooled sample std of two grid points with equal replicate counts.
double pooled_std(const PointSummary& a, const PointSummary& b, std::size_t metric);

}  // namespace xgbl
