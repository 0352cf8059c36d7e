// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/tasks.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "xgbl/forward.hpp"

namespace xgbl {

namespace {

Tensor sample_inputs(std::size_t n, std::size_t d, double decay, Rng& rng) {
  Tensor x = prng_gaussian(rng, {n, d}, 1.0);
  if (decay != 0.0) {
    for (std::size_t j = 0; j < d; ++j) {
      const double s = std::pow(static_cast<double>(j + 1), -decay);
      for (std::size_t i = 0; i < n; ++i) x.at(i, j) *= s;
    }
  }
  return x;
}

}  // namespace

std::string_view to_string(TeacherKind k) { return k == TeacherKind::Matrix ? "teacher-matrix" : "teacher-mlp"; }

std::pair<Dataset, TeacherTask> gen_teacher_dataset(const TeacherConfig& cfg) {
  if (cfg.N < 1) throw ConfigError("N", "must be at least 1");
  if (cfg.n_test < 1) throw ConfigError("n_test", "must be at least 1");
  if (cfg.dims.size() < 2) throw ConfigError("dims", "need at least input and output widths");
  if (cfg.kind == TeacherKind::Matrix && cfg.dims.size() != 2) {
    throw ConfigError("dims", "teacher-matrix takes exactly two widths");
  }
  if (!(cfg.noise >= 0.0)) throw ConfigError("noise", "must be non-negative");

  const Rng root(cfg.seed);
  Rng init_rng = root.split(0), delta_rng = root.split(1), x_rng = root.split(2), noise_rng = root.split(3),
      test_rng = root.split(4);

  TeacherTask task;
  task.kind = cfg.kind;
  task.noise = cfg.noise;
  task.start = build_mlp(cfg.dims, cfg.activation, OutputMap::IdentityMse, init_rng);
  task.teacher = task.start;
  for (auto& [id, w] : task.teacher.weights) {
    const double std = cfg.delta_scale / std::sqrt(static_cast<double>(w.cols()));
    Tensor d = prng_gaussian(delta_rng, w.shape(), std);
    kernels::add_inplace(w, d);
    task.delta.emplace(id, std::move(d));
  }

  const std::size_t d_in = cfg.dims.front();
  Dataset train{sample_inputs(cfg.N, d_in, cfg.feature_decay, x_rng), Tensor()};
  train.targets = forward(task.teacher, full_batch(Dataset{train.inputs, Tensor({cfg.N, 1})}));
  if (cfg.noise > 0.0) {
    for (std::size_t i = 0; i < train.targets.numel(); ++i) train.targets[i] += cfg.noise * noise_rng.gaussian();
  }
  task.test.inputs = sample_inputs(cfg.n_test, d_in, cfg.feature_decay, test_rng);
  task.test.targets = forward(task.teacher, Batch{task.test.inputs, Tensor({cfg.n_test, 1})});
  return {std::move(train), std::move(task)};
}

double teacher_gap(const ModelSpec& model, const TeacherTask& task) {
  const Tensor pred = forward(model, full_batch(task.test));
  const Tensor diff = kernels::sub(pred, task.test.targets);
  return kernels::dot(diff, diff) / static_cast<double>(task.test.size());
}

std::string_view to_string(SequenceTask t) { return t == SequenceTask::Parity ? "parity" : "copy"; }

SequenceTask parse_sequence_task(std::string_view s) {
  if (s == "parity") return SequenceTask::Parity;
  if (s == "copy") return SequenceTask::Copy;
  throw ConfigError("task", "expected parity or copy, got '" + std::string(s) + "'");
}

Dataset gen_sequence_dataset(SequenceTask task, std::size_t seq_len, std::size_t N, std::uint64_t seed,
                             std::size_t vocab) {
  if (seq_len < 2) throw ConfigError("seq_len", "must be at least 2");
  if (N < 1) throw ConfigError("N", "must be at least 1");
  if (vocab < 2) throw ConfigError("vocab", "must be at least 2");
  if (task == SequenceTask::Parity && vocab != 2) throw ConfigError("vocab", "parity uses a binary vocabulary");

  const std::size_t classes = task == SequenceTask::Parity ? 2 : vocab;
  Rng rng(seed);
  Tensor inputs({N, seq_len});
  Tensor targets({N, 1});
  for (std::size_t i = 0; i < N; ++i) {
    const std::size_t label = i % classes;
    if (task == SequenceTask::Parity) {
      std::size_t x = 0;
      for (std::size_t j = 0; j + 1 < seq_len; ++j) {
        const std::size_t bit = rng.below(2);
        inputs.at(i, j) = static_cast<double>(bit);
        x ^= bit;
      }
      inputs.at(i, seq_len - 1) = static_cast<double>(x ^ label);
    } else {
      inputs.at(i, 0) = static_cast<double>(label);
      for (std::size_t j = 1; j < seq_len; ++j) inputs.at(i, j) = static_cast<double>(rng.below(vocab));
    }
    targets[i] = static_cast<double>(label);
  }
  // Shuffle rows so classes are not interleaved by index.
  for (std::size_t i = N; i > 1; --i) {
    const std::size_t j = rng.below(i);
    if (j == i - 1) continue;
    for (std::size_t c = 0; c < seq_len; ++c) std::swap(inputs.at(i - 1, c), inputs.at(j, c));
    std::swap(targets[i - 1], targets[j]);
  }
  return Dataset{std::move(inputs), std::move(targets)};
}

}  // namespace xgbl
