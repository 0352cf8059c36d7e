// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/experiments.hpp"

#include <cmath>
#include <numeric>

#include "xgbl/forward.hpp"

namespace xgbl {

GradApproxExperiment lemma1_experiment(std::uint64_t seed, std::size_t seeds) {
  TeacherConfig tc;
  tc.dims = {16, 16};
  tc.N = 512;
  tc.noise = 0.5;
  tc.seed = 7;
  auto [data, task] = gen_teacher_dataset(tc);
  GradApproxConfig g;
  g.seeds = seeds;
  g.seed = seed;
  g.lr = 1e-4;
  g.batch_size = 2;
  g.r_grid = {1, 2, 4, 8, 16};
  g.M_grid = {32};
  GradApproxExperiment out;
  out.rank_sweep = gradient_approx_probe(task.start, data, g);
  g.r_grid = {2};
  g.M_grid = {4, 16, 64};
  out.batch_sweep = gradient_approx_probe(task.start, data, g);
  return out;
}

ProbeReport lemma2_experiment(std::uint64_t seed, std::size_t runs) {
  TeacherConfig tc;
  tc.kind = TeacherKind::Mlp;
  tc.dims = {16, 32, 32, 16};
  tc.N = 256;
  tc.noise = 0.1;
  tc.seed = 5;
  auto [data, task] = gen_teacher_dataset(tc);
  UpdateNormSuite suite;
  suite.runs = runs;
  suite.T = 6;
  suite.base.seed = seed;
  suite.base.lr = 0.05;
  suite.base.layers_sampled = 2;
  suite.base.policy = AdaptPolicy::All;
  suite.base.lambda = 1e-3;
  return update_norm_suite(task.start, data, suite);
}

ProbeReport lemma3_experiment(std::uint64_t seed, std::size_t n_pairs) {
  TeacherConfig tc;
  tc.dims = {32, 4};
  tc.N = 512;
  tc.noise = 0.5;
  tc.feature_decay = 1.0;
  tc.seed = 3;
  auto [data, task] = gen_teacher_dataset(tc);
  const QuadraticOptimum q = quadratic_optimum(task.start, data);
  LipschitzConfig lc;
  lc.n_pairs = n_pairs;
  Rng rng(seed);
  const LipschitzEstimate est = lipschitz_probe(task.start, data, lc, rng);

  ProbeReport rep;
  rep.probe = "lipschitz";
  rep.param_names = {"pair"};
  rep.metric_names = {"ratio", "running_max"};
  for (std::size_t i = 0; i < est.ratios.size(); ++i) {
    rep.rows.push_back({{static_cast<double>(i)}, seed, {est.ratios[i], est.running_max[i]}});
  }
  rep.constants["L_prime"] = est.L_prime;
  rep.constants["best_pair"] = static_cast<double>(est.best_pair);
  rep.constants["beta"] = q.beta;
  rep.constants["skipped"] = static_cast<double>(est.skipped);
  const double rel = std::abs(est.L_prime - q.beta) / q.beta;
  rep.checks.push_back({"L_prime within 5% of top Hessian eigenvalue", rel <= 0.05,
                        "L'=" + std::to_string(est.L_prime) + " beta=" + std::to_string(q.beta)});
  // Any sampled ratio above beta would contradict the curvature bound.
  rep.checks.push_back({"L_prime does not exceed beta", est.L_prime <= q.beta * (1.0 + 1e-9),
                        "rel excess " + std::to_string(est.L_prime / q.beta - 1.0)});
  return rep;
}

ProbeReport theorem1_experiment(std::uint64_t seed, std::size_t seeds) {
  TeacherConfig tc;
  tc.dims = {32, 4};
  tc.N = 512;
  tc.noise = 0.5;
  tc.feature_decay = 1.0;
  tc.seed = 3;
  auto [data, task] = gen_teacher_dataset(tc);
  ConvergenceConfig c;
  c.T_grid = {1, 4, 16, 64};
  c.r_grid = {1};
  c.kappa = 8;
  c.seeds = seeds;
  c.seed = seed;
  c.lr = 0.1;
  c.init_scale = 1.0;
  c.batch_size = 16;
  return convergence_sweep(task.start, data, c);
}

ProbeReport theorem2_experiment(std::uint64_t seed, std::size_t seeds) {
  TeacherConfig tc;
  tc.dims = {16, 16};
  tc.N = 1024;
  tc.noise = 0.0;
  tc.seed = 11;
  auto [data, task] = gen_teacher_dataset(tc);
  ExpressivenessConfig c;
  c.r_grid = {1, 8};
  c.T_grid = {0, 1, 64};
  c.K = 512;
  c.seeds = seeds;
  c.seed = seed;
  c.lr = 0.3;
  c.init_scale = 0.25;
  c.batch_size = 16;
  return expressiveness_sweep(task, data, c);
}

double KappaSweepPoint::mean() const {
  return accuracy.empty() ? 0.0
                          : std::accumulate(accuracy.begin(), accuracy.end(), 0.0) /
                                static_cast<double>(accuracy.size());
}

std::vector<KappaSweepPoint> kappa_sweep_experiment(std::uint64_t seed, const std::vector<std::size_t>& kappas,
                                                    std::size_t K, std::size_t seeds) {
  const Dataset data = gen_sequence_dataset(SequenceTask::Parity, 4, 2000, 1);
  TransformerShape ts;
  ts.vocab = 2;
  ts.d_model = 16;
  ts.n_layers = 2;
  ts.n_heads = 2;
  ts.d_ff = 32;
  ts.max_seq = 4;
  std::vector<KappaSweepPoint> out;
  for (std::size_t kappa : kappas) {
    KappaSweepPoint p;
    p.kappa = kappa;
    for (std::size_t s = 0; s < seeds; ++s) {
      Rng rng(100 + s);
      ModelSpec m = build_transformer(ts, Activation::Gelu, rng);
      BoostConfig c;
      c.K = K;
      c.kappa = kappa;
      c.rank = 1;
      c.layers_sampled = 2;
      c.lr = 0.5;
      c.batch_size = 16;
      c.seed = seed + s;
      c.init_scale = 0.25;
      c.policy = AdaptPolicy::All;
      xgblora_fit(m, data, c);
      p.accuracy.push_back(accuracy(m, data));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace xgbl
