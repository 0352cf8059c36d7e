// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "xgbl/model.hpp"

namespace xgbl {

// Matrix: a single linear layer (d_out x d_in) with squared loss.
// Mlp: a multi-layer perceptron of the given dims.
enum class TeacherKind { Matrix, Mlp };

std::string_view to_string(TeacherKind k);

struct TeacherConfig {
  TeacherKind kind = TeacherKind::Matrix;
  std::vector<std::size_t> dims{16, 16};
  std::size_t N = 512;
  std::size_t n_test = 256;
  double noise = 0.0;
  // Entries of each delta matrix are N(0, (delta_scale / sqrt(fan_in))^2).
  double delta_scale = 1.0;
  // Feature j of x is scaled by (j + 1)^(-feature_decay); 0 gives isotropic x.
  double feature_decay = 0.0;
  Activation activation = Activation::Gelu;
  std::uint64_t seed = 0;
};

// Realizable student/teacher pair: teacher = start + delta on every weight.
struct TeacherTask {
  TeacherKind kind = TeacherKind::Matrix;
  ModelSpec start;
  ModelSpec teacher;
  std::map<WeightId, Tensor> delta;
  double noise = 0.0;
  Dataset test;  // held-out inputs with noise-free teacher outputs
};

// x ~ N(0, I) (optionally rescaled per feature), y = teacher(x) + noise.
std::pair<Dataset, TeacherTask> gen_teacher_dataset(const TeacherConfig& cfg);

// Mean over test rows of ||f(x) - f*(x)||^2.
double teacher_gap(const ModelSpec& model, const TeacherTask& task);

enum class SequenceTask { Parity, Copy };

std::string_view to_string(SequenceTask t);
SequenceTask parse_sequence_task(std::string_view s);

// Token sequences (N x seq_len) with one class per row (N x 1).
// Parity: class = xor of the bits. Copy: class = first token.
// Classes are balanced to within one example.
Dataset gen_sequence_dataset(SequenceTask task, std::size_t seq_len, std::size_t N, std::uint64_t seed,
                             std::size_t vocab = 2);

}  // namespace xgbl
