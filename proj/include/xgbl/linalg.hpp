// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "xgbl/rng.hpp"
#include "xgbl/tensor.hpp"

namespace xgbl {

// Thin SVD: M = U diag(s) V^T with U (m x k), V (n x k), s non-increasing.
struct Svd {
  Tensor u;
  std::vector<double> s;
  Tensor v;

  std::size_t rank() const noexcept { return s.size(); }
  Tensor reconstruct() const;
};

struct SvdOptions {
  double tol = 1e-15;          // Jacobi off-diagonal threshold (relative)
  std::size_t max_sweeps = 1000;
  double power_tol = 1e-10;    // power-iteration convergence
  std::size_t power_max_iter = 1000;
  std::size_t jacobi_max_elems = 512 * 512;
};

// Full thin SVD by one-sided Jacobi. k = min(m, n); U and V are completed to
// orthonormal columns when M is rank deficient.
Svd svd_jacobi(const Tensor& m, const SvdOptions& opts = {});

// Top-r singular triplets by power iteration on M^T M with deflation.
Svd svd_power(const Tensor& m, std::size_t r, Rng& rng, const SvdOptions& opts = {});

// Truncated SVD. Jacobi up to opts.jacobi_max_elems entries, power iteration
// beyond. r must be in [1, min(m, n)].
Svd svd_topr(const Tensor& m, std::size_t r, const SvdOptions& opts = {});

// ||M - M_r||_F from the singular values: sqrt(sum_{i>r} s_i^2).
double eckart_young_floor(std::span<const double> s, std::size_t r);

// Largest eigenvalue of a symmetric PSD operator by power iteration.
double power_iteration(const std::function<std::vector<double>(const std::vector<double>&)>& matvec, std::size_t dim,
                       Rng& rng, double tol = 1e-12, std::size_t max_iter = 5000);

// Extremal eigenvalues of a symmetric PSD matrix; the smallest uses the
// shifted operator (lambda_max I - A).
struct EigenRange {
  double min = 0.0;
  double max = 0.0;
};
EigenRange extremal_eigenvalues(const Tensor& sym, Rng& rng, double tol = 1e-12, std::size_t max_iter = 20000);

// Cholesky solve of A X = B for SPD A (n x n), B (n x m).
Tensor solve_spd(const Tensor& a, const Tensor& b);

// min ||A x - b||_2 subject to x >= 0 (Lawson-Hanson active set).
std::vector<double> nnls(const Tensor& a, std::span<const double> b, std::size_t max_iter = 0);

// Coefficient of determination of a fit; 1 when y is constant and matched.
double r_squared(std::span<const double> y, std::span<const double> yhat);

}  // namespace xgbl
