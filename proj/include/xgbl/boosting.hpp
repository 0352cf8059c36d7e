// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "xgbl/autograd.hpp"
#include "xgbl/forward.hpp"
#include "xgbl/lora.hpp"
#include "xgbl/optim.hpp"
#include "xgbl/model.hpp"
#include "xgbl/rng.hpp"

namespace xgbl {

// Boosting schedule. Give any two of (T, kappa, K); zero means "derive".
// When all three are given K must equal kappa * T.
struct BoostConfig {
  std::size_t T = 0;
  std::size_t kappa = 8;
  std::size_t K = 0;
  std::size_t rank = 1;
  std::size_t layers_sampled = 8;  // L_s
  double lambda = 0.0;
  double lr = 0.05;  // eta_m
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  AdaptPolicy policy = AdaptPolicy::QV;
  bool include_embedding_output = false;
  double alpha = 1.0;
  double init_scale = kDefaultAdapterInitScale;
  double momentum = 0.0;
  Precision precision = Precision::F64;
  // Evaluate the full-data loss just before and just after every merge.
  bool track_merge_loss = false;

  AdaptOptions adapt_options() const { return {policy, include_embedding_output}; }
};

// Steps per booster; the last entry holds K mod kappa when kappa does not
// divide K.
struct Schedule {
  std::vector<std::size_t> steps;
  std::size_t total_steps() const;
};

// Validates the config (ConfigError names the field) and expands the
// schedule. Warns when the final booster is short.
Schedule resolve_schedule(const BoostConfig& cfg);

// Sorted sample of L_s distinct layers from 1..L. L_s > L is clamped with a
// warning.
std::vector<int> select_layers(Rng& rng, std::size_t L, std::size_t L_s);

// Per-booster record.
struct BoosterTrace {
  std::size_t t = 0;
  std::vector<int> selected_layers;
  std::size_t steps = 0;
  double lr = 0.0;
  std::size_t trainable_params = 0;
  std::vector<double> losses;          // objective before each step
  std::vector<double> grad_norms;      // ||grad wrt W + alpha A B|| per step
  std::vector<double> grad_norms_a;    // ||grad wrt A|| per step
  std::vector<double> grad_norms_b;    // ||grad wrt B|| per step
  double a_norm = 0.0;                 // ||A||_F at merge, over all pairs
  double b_norm = 0.0;
  double a_update_norm = 0.0;          // ||A - A_init||_F
  double b_update_norm = 0.0;          // ||B - B_init||_F (B_init = 0)
  double a_init_norm = 0.0;            // ||A_init||_F
  double b_init_norm = 0.0;
  double loss_before_merge = std::numeric_limits<double>::quiet_NaN();
  double loss_after_merge = std::numeric_limits<double>::quiet_NaN();

  // Largest gradient norm observed during the booster across the adapted
  // weights and both adapter factors.
  double grad_bound() const;
};

struct BoosterOptions {
  double lambda = 0.0;
  double lr = 0.05;
  std::size_t batch_size = 16;
  double momentum = 0.0;
  Precision precision = Precision::F64;
};

// Runs `steps` optimizer steps on the adapters only. Appends to `trace`.
void train_booster_steps(const ModelSpec& model, AdapterSet& adapters, const Dataset& data, std::size_t steps,
                         const BoosterOptions& opts, Rng& batch_rng, BoosterTrace& trace,
                         MomentumSgd* momentum = nullptr);

// Exactly `kappa` SGD steps on A and B of a fresh adapter set; the base
// model is read-only. Norms are filled in at return.
BoosterTrace train_booster(const ModelSpec& model, AdapterSet& adapters, const Dataset& data, std::size_t kappa,
                           const BoosterOptions& opts, Rng& batch_rng);

// Resumable state of an in-progress fit.
struct TrainerState {
  std::size_t global_step = 0;
  std::size_t booster = 0;
  std::size_t step_in_booster = 0;
  std::optional<AdapterSet> live;
  std::optional<AdapterSet> origin;  // live adapters as initialized
  std::uint64_t batch_rng_state = 0;
  // Per-step records of the in-flight booster, so a resumed trace matches.
  std::vector<double> losses;
  std::vector<double> grad_norms;
  std::vector<double> grad_norms_a;
  std::vector<double> grad_norms_b;
};

// Stepwise XGBLoRA loop: select layers, init adapters, train kappa steps,
// merge, repeat.
class BoostTrainer {
 public:
  using BoosterCallback = std::function<void(const BoosterTrace&)>;

  BoostTrainer(ModelSpec& model, const Dataset& data, BoostConfig cfg);

  bool done() const noexcept { return state_.booster >= schedule_.steps.size(); }
  void step();
  void run();
  void run_until(std::size_t global_step);

  const std::vector<BoosterTrace>& traces() const noexcept { return traces_; }
  const Schedule& schedule() const noexcept { return schedule_; }
  const BoostConfig& config() const noexcept { return cfg_; }
  std::size_t global_step() const noexcept { return state_.global_step; }
  // Snapshot for checkpointing, including the in-flight booster's records.
  TrainerState state() const;
  // Trace of the booster in progress; empty between boosters.
  const BoosterTrace& current() const noexcept { return current_; }
  void restore(TrainerState state);
  void on_booster_end(BoosterCallback cb) { on_booster_end_ = std::move(cb); }

 private:
  void begin_booster();
  void finish_booster();

  ModelSpec& model_;
  const Dataset& data_;
  BoostConfig cfg_;
  Schedule schedule_;
  TrainerState state_;
  BoosterTrace current_;
  std::vector<BoosterTrace> traces_;
  std::optional<MomentumSgd> momentum_;
  BoosterCallback on_booster_end_;
};

// Per-booster random streams derived from the run seed.
struct BoosterStreams {
  Rng layers;
  Rng init;
  Rng batches;
};
BoosterStreams booster_streams(std::uint64_t seed, std::size_t booster);

std::vector<BoosterTrace> xgblora_fit(ModelSpec& model, const Dataset& data, const BoostConfig& cfg);

struct LoraConfig {
  std::size_t rank = 8;
  std::size_t K = 100;
  double lambda = 0.0;
  double lr = 0.05;
  std::size_t batch_size = 16;
  std::uint64_t seed = 0;
  AdaptPolicy policy = AdaptPolicy::QV;
  bool include_embedding_output = false;
  double alpha = 1.0;
  double init_scale = kDefaultAdapterInitScale;
  double momentum = 0.0;
  Precision precision = Precision::F64;
};

// Plain LoRA: one adapter set on every adaptable weight, K steps, one merge
// at the end.
BoosterTrace lora_fit(ModelSpec& model, const Dataset& data, const LoraConfig& cfg);

struct FullFtConfig {
  std::size_t K = 100;
  double lr = 0.05;
  std::size_t batch_size = 16;
  double momentum = 0.0;
  Precision precision = Precision::F64;
};

struct FitTrace {
  std::vector<double> losses;
};

// K SGD steps on every weight.
FitTrace full_finetune(ModelSpec& model, const Dataset& data, const FullFtConfig& cfg, Rng& rng);

}  // namespace xgbl
