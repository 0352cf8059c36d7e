// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xgbl/probes.hpp"

namespace xgbl {

// Canned desk-scale setups shared by the CLI `probe` command and the
// acceptance suite. Each fixes its task and step sizes; only the seeds and
// replicate counts are free.

// Rank-r gradient approximation on a 16x16 noisy matrix teacher. Two
// reports: r in {1,2,4,8,16} at M=32, and M in {4,16,64} at r=2.
struct GradApproxExperiment {
  ProbeReport rank_sweep;
  ProbeReport batch_sweep;
};
GradApproxExperiment lemma1_experiment(std::uint64_t seed, std::size_t seeds = 5);

// Accumulated-update bound over `runs` xgblora fits on a 3-layer MLP
// teacher, cycling (r, kappa) over {1,4,8} x {1,8,32}.
ProbeReport lemma2_experiment(std::uint64_t seed, std::size_t runs = 9);

// Gradient Lipschitz estimate on the quadratic task, checked against the
// exact top Hessian eigenvalue.
ProbeReport lemma3_experiment(std::uint64_t seed, std::size_t n_pairs = 64);

// Optimality gap vs T on a 32->4 least-squares task with decaying input
// spectrum (r = 1, kappa = 8).
ProbeReport theorem1_experiment(std::uint64_t seed, std::size_t seeds = 5);

// Held-out teacher gap at fixed K = 512 on a noise-free 16x16 matrix
// teacher, grid r in {1,8} x T in {0,1,64}.
ProbeReport theorem2_experiment(std::uint64_t seed, std::size_t seeds = 5);

// Final training accuracy on parity (seq_len 4) for each kappa at fixed K.
// Model seeds are 100 + s; fit seeds are seed + s.
struct KappaSweepPoint {
  std::size_t kappa = 0;
  std::vector<double> accuracy;  // per seed
  double mean() const;
};
std::vector<KappaSweepPoint> kappa_sweep_experiment(std::uint64_t seed, const std::vector<std::size_t>& kappas,
                                                    std::size_t K = 3072, std::size_t seeds = 5);

}  // namespace xgbl
