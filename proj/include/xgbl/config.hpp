// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xgbl/boosting.hpp"
#include "xgbl/tasks.hpp"

namespace xgbl {

enum class Method { XgbLora, Lora, FullFt };
enum class TaskKind { TeacherMatrix, TeacherMlp, ParitySeq, CharClassify };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);
std::string_view to_string(TaskKind t);
TaskKind parse_task(std::string_view s);

// Everything a run needs. Serialized as flat `key=value` lines; keys match
// the CLI flag names.
struct RunConfig {
  Method method = Method::XgbLora;
  TaskKind task = TaskKind::TeacherMatrix;

  std::size_t T = 0;
  std::size_t kappa = 8;
  std::size_t K = 512;
  std::size_t r = 1;
  std::size_t layers = 8;  // L_s
  double lambda = 0.0;
  double lr = 0.05;
  std::size_t batch = 16;
  std::uint64_t seed = 0;
  AdaptPolicy policy = AdaptPolicy::QV;
  bool embed_output = false;
  double alpha = 1.0;
  double init_scale = kDefaultAdapterInitScale;
  double momentum = 0.0;
  Precision precision = Precision::F64;

  // Task and model shape.
  std::uint64_t data_seed = 0;
  std::vector<std::size_t> dims{16, 16};
  Activation activation = Activation::Gelu;
  std::size_t N = 512;
  std::size_t n_test = 256;
  double noise = 0.0;
  double delta_scale = 1.0;
  double feature_decay = 0.0;
  std::size_t seq_len = 8;
  std::size_t vocab = 2;
  std::size_t d_model = 16;
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_ff = 32;

  // Output.
  std::string out = "runs";
  std::string run_id = "run";
  bool verbose_metrics = false;
  std::size_t checkpoint_every = 0;  // global steps; 0 disables

  bool operator==(const RunConfig&) const = default;

  BoostConfig boost_config() const;
  LoraConfig lora_config() const;
  FullFtConfig fullft_config() const;
};

// Names of all keys in serialization order.
const std::vector<std::string>& config_keys();

// Sets one field from its text form; unknown keys and bad values throw
// ConfigError naming the key.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);
std::string get_config_value(const RunConfig& cfg, std::string_view key);

std::string serialize_config(const RunConfig& cfg);
// Applies `key=value` lines on top of `base`. `#` starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});
RunConfig load_config_file(const std::string& path, RunConfig base = {});

// Model and data for a run. `eval` is the held-out set for teacher tasks
// and the training set for sequence tasks.
struct TaskBundle {
  ModelSpec model;
  Dataset train;
  Dataset eval;
  std::optional<TeacherTask> teacher;
};
TaskBundle make_task(const RunConfig& cfg);

}  // namespace xgbl
