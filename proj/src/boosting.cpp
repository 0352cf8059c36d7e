// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "xgbl/log.hpp"

namespace xgbl {

std::size_t Schedule::total_steps() const { return std::accumulate(steps.begin(), steps.end(), std::size_t{0}); }

Schedule resolve_schedule(const BoostConfig& cfg) {
  if (cfg.rank < 1) throw ConfigError("r", "must be at least 1");
  if (cfg.kappa < 1) throw ConfigError("kappa", "must be at least 1");
  if (cfg.layers_sampled < 1) throw ConfigError("layers", "must be at least 1");
  if (!(cfg.lr > 0.0)) throw ConfigError("lr", "must be positive");
  if (!(cfg.lambda >= 0.0)) throw ConfigError("lambda", "must be non-negative");
  if (cfg.batch_size < 1) throw ConfigError("batch", "must be at least 1");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw ConfigError("momentum", "must be in [0, 1)");
  if (!(cfg.init_scale > 0.0)) throw ConfigError("init_scale", "must be positive");

  Schedule s;
  if (cfg.T > 0 && cfg.K > 0) {
    if (cfg.K != cfg.kappa * cfg.T) {
      throw ConfigError("K", "K=" + std::to_string(cfg.K) + " differs from kappa*T=" + std::to_string(cfg.kappa * cfg.T));
    }
    s.steps.assign(cfg.T, cfg.kappa);
  } else if (cfg.T > 0) {
    s.steps.assign(cfg.T, cfg.kappa);
  } else if (cfg.K > 0) {
    s.steps.assign(cfg.K / cfg.kappa, cfg.kappa);
    if (const std::size_t tail = cfg.K % cfg.kappa; tail != 0) {
      warn("kappa=" + std::to_string(cfg.kappa) + " does not divide K=" + std::to_string(cfg.K) +
           "; final booster trains " + std::to_string(tail) + " steps");
      s.steps.push_back(tail);
    }
  } else {
    throw ConfigError("K", "either K or T must be given");
  }
  return s;
}

std::vector<int> select_layers(Rng& rng, std::size_t L, std::size_t L_s) {
  require(L_s >= 1, "select_layers: L_s must be at least 1");
  require(L >= 1, "select_layers: model has no layers");
  if (L_s > L) {
    warn("L_s=" + std::to_string(L_s) + " exceeds L=" + std::to_string(L) + "; clamping");
    L_s = L;
  }
  std::vector<int> pool(L);
  std::iota(pool.begin(), pool.end(), 1);
  for (std::size_t i = 0; i < L_s; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(L - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(L_s);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double BoosterTrace::grad_bound() const {
  double g = 0.0;
  for (const auto* v : {&grad_norms, &grad_norms_a, &grad_norms_b})
    for (double x : *v) g = std::max(g, x);
  return g;
}

namespace {

void fill_norms(BoosterTrace& trace, const AdapterSet& adapters, const AdapterSet& origin) {
  double a2 = 0.0, b2 = 0.0, da2 = 0.0, db2 = 0.0, a02 = 0.0, b02 = 0.0;
  for (const auto& [id, p] : adapters.pairs()) {
    const LoraPair* o = origin.find(id);
    require(o != nullptr, "adapter origin is missing " + to_string(id));
    a2 += kernels::dot(p.a, p.a);
    b2 += kernels::dot(p.b, p.b);
    const Tensor da = kernels::sub(p.a, o->a);
    const Tensor db = kernels::sub(p.b, o->b);
    a02 += kernels::dot(o->a, o->a);
    b02 += kernels::dot(o->b, o->b);
    da2 += kernels::dot(da, da);
    db2 += kernels::dot(db, db);
  }
  trace.a_norm = std::sqrt(a2);
  trace.b_norm = std::sqrt(b2);
  trace.a_update_norm = std::sqrt(da2);
  trace.b_update_norm = std::sqrt(db2);
  trace.a_init_norm = std::sqrt(a02);
  trace.b_init_norm = std::sqrt(b02);
}

void require_booster_options(const BoosterOptions& opts) {
  require(opts.lr >= 0.0, "train_booster: learning rate must be non-negative");
  require(opts.lambda >= 0.0, "train_booster: lambda must be non-negative");
  require(opts.batch_size >= 1, "train_booster: batch size must be at least 1");
}

}  // namespace

void train_booster_steps(const ModelSpec& model, AdapterSet& adapters, const Dataset& data, std::size_t steps,
                         const BoosterOptions& opts, Rng& batch_rng, BoosterTrace& trace, MomentumSgd* momentum) {
  require(!adapters.merged(), "train_booster: adapter set was already merged");
  require_booster_options(opts);
  for (std::size_t s = 0; s < steps; ++s) {
    const Batch batch = sample_batch(data, opts.batch_size, batch_rng);
    Tape tape(opts.precision);
    const BoundModel bound = bind_model(tape, model, &adapters, GradTarget::Adapters);
    const Var loss = objective_graph(tape, model, bound, batch, opts.lambda);
    tape.backward(loss);

    std::vector<Tensor*> params;
    std::vector<Tensor> grads;
    double geff2 = 0.0, ga2 = 0.0, gb2 = 0.0;
    for (auto& [id, pair] : adapters.pairs()) {
      const auto& [va, vb] = bound.adapters.at(id);
      const Tensor geff = tape.grad(bound.effective.at(id));
      grads.push_back(tape.grad(va));
      grads.push_back(tape.grad(vb));
      geff2 += kernels::dot(geff, geff);
      ga2 += kernels::dot(grads[grads.size() - 2], grads[grads.size() - 2]);
      gb2 += kernels::dot(grads.back(), grads.back());
      params.push_back(&pair.a);
      params.push_back(&pair.b);
    }
    std::vector<Tensor*> grad_ptrs;
    for (auto& g : grads) grad_ptrs.push_back(&g);
    if (momentum != nullptr) {
      momentum->step(params, grad_ptrs, opts.precision);
    } else {
      sgd_step(params, grad_ptrs, opts.lr, opts.precision);
    }
    trace.losses.push_back(loss.value()[0]);
    trace.grad_norms.push_back(std::sqrt(geff2));
    trace.grad_norms_a.push_back(std::sqrt(ga2));
    trace.grad_norms_b.push_back(std::sqrt(gb2));
    ++trace.steps;
  }
}

BoosterTrace train_booster(const ModelSpec& model, AdapterSet& adapters, const Dataset& data, std::size_t kappa,
                           const BoosterOptions& opts, Rng& batch_rng) {
  require(kappa >= 1, "train_booster: kappa must be at least 1");
  require(!adapters.merged(), "train_booster: adapter set was already merged");
  const AdapterSet origin = adapters;
  BoosterTrace trace;
  trace.t = static_cast<std::size_t>(adapters.booster_index());
  trace.lr = opts.lr;
  trace.trainable_params = adapters.trainable_params();
  for (const auto& [id, p] : adapters.pairs()) {
    if (trace.selected_layers.empty() || trace.selected_layers.back() != id.layer) trace.selected_layers.push_back(id.layer);
  }
  std::optional<MomentumSgd> mom;
  if (opts.momentum > 0.0) mom.emplace(opts.lr, opts.momentum);
  train_booster_steps(model, adapters, data, kappa, opts, batch_rng, trace, mom ? &*mom : nullptr);
  fill_norms(trace, adapters, origin);
  return trace;
}

BoosterStreams booster_streams(std::uint64_t seed, std::size_t booster) {
  const Rng root = Rng(seed).split(booster);
  return BoosterStreams{root.split(0), root.split(1), root.split(2)};
}

BoostTrainer::BoostTrainer(ModelSpec& model, const Dataset& data, BoostConfig cfg)
    : model_(model), data_(data), cfg_(cfg), schedule_(resolve_schedule(cfg_)) {
  data_.validate();
  if (cfg_.layers_sampled > model_.num_layers) {
    warn("L_s=" + std::to_string(cfg_.layers_sampled) + " exceeds L=" + std::to_string(model_.num_layers) +
         "; clamping");
    cfg_.layers_sampled = model_.num_layers;
  }
}

void BoostTrainer::begin_booster() {
  BoosterStreams streams = booster_streams(cfg_.seed, state_.booster);
  const std::vector<int> layers = select_layers(streams.layers, model_.num_layers, cfg_.layers_sampled);
  AdapterSet set(static_cast<int>(state_.booster));
  for (const WeightId& id : adaptable_in_layers(model_, layers, cfg_.adapt_options())) {
    set.add(init_adapter(model_, id, cfg_.rank, streams.init, cfg_.init_scale, cfg_.alpha));
  }
  require(!set.empty(), "booster " + std::to_string(state_.booster) + " has no adaptable weights");
  current_ = BoosterTrace{};
  current_.t = state_.booster;
  current_.selected_layers = layers;
  current_.lr = cfg_.lr;
  current_.trainable_params = set.trainable_params();
  state_.origin = set;
  state_.live = std::move(set);
  state_.step_in_booster = 0;
  state_.batch_rng_state = streams.batches.state();
  momentum_.reset();
  if (cfg_.momentum > 0.0) momentum_.emplace(cfg_.lr, cfg_.momentum);
}

void BoostTrainer::finish_booster() {
  AdapterSet& live = *state_.live;
  fill_norms(current_, live, *state_.origin);
  if (cfg_.track_merge_loss) {
    current_.loss_before_merge = loss_eval(model_, data_, &live, 0.0, cfg_.precision);
  }
  merge_adapters(model_, live, cfg_.precision);
  if (cfg_.track_merge_loss) {
    current_.loss_after_merge = loss_eval(model_, data_, nullptr, 0.0, cfg_.precision);
  }
  traces_.push_back(current_);
  if (on_booster_end_) on_booster_end_(traces_.back());
  state_.live.reset();
  state_.origin.reset();
  state_.step_in_booster = 0;
  ++state_.booster;
}

void BoostTrainer::step() {
  require(!done(), "BoostTrainer: training already finished");
  if (!state_.live) begin_booster();
  const BoosterOptions opts{cfg_.lambda, cfg_.lr, cfg_.batch_size, cfg_.momentum, cfg_.precision};
  Rng batch_rng(state_.batch_rng_state);
  train_booster_steps(model_, *state_.live, data_, 1, opts, batch_rng, current_, momentum_ ? &*momentum_ : nullptr);
  state_.batch_rng_state = batch_rng.state();
  ++state_.step_in_booster;
  ++state_.global_step;
  if (state_.step_in_booster == schedule_.steps[state_.booster]) finish_booster();
}

void BoostTrainer::run() {
  while (!done()) step();
}

void BoostTrainer::run_until(std::size_t global_step) {
  while (!done() && state_.global_step < global_step) step();
}

TrainerState BoostTrainer::state() const {
  TrainerState s = state_;
  if (s.live) {
    s.losses = current_.losses;
    s.grad_norms = current_.grad_norms;
    s.grad_norms_a = current_.grad_norms_a;
    s.grad_norms_b = current_.grad_norms_b;
  }
  return s;
}

void BoostTrainer::restore(TrainerState state) {
  require(state.booster <= schedule_.steps.size(), "restore: booster index beyond schedule");
  require(state.live.has_value() == state.origin.has_value(), "restore: live adapters need their origin");
  if (state.live) {
    require(state.step_in_booster < schedule_.steps[state.booster], "restore: step beyond booster budget");
    current_ = BoosterTrace{};
    current_.t = state.booster;
    current_.lr = cfg_.lr;
    current_.trainable_params = state.live->trainable_params();
    current_.losses = std::move(state.losses);
    current_.grad_norms = std::move(state.grad_norms);
    current_.grad_norms_a = std::move(state.grad_norms_a);
    current_.grad_norms_b = std::move(state.grad_norms_b);
    for (const auto& [id, p] : state.live->pairs()) {
      if (current_.selected_layers.empty() || current_.selected_layers.back() != id.layer) {
        current_.selected_layers.push_back(id.layer);
      }
    }
  }
  // Momentum buffers are not part of the resumable state.
  momentum_.reset();
  if (cfg_.momentum > 0.0) momentum_.emplace(cfg_.lr, cfg_.momentum);
  state_ = std::move(state);
}

std::vector<BoosterTrace> xgblora_fit(ModelSpec& model, const Dataset& data, const BoostConfig& cfg) {
  BoostTrainer trainer(model, data, cfg);
  trainer.run();
  return trainer.traces();
}

BoosterTrace lora_fit(ModelSpec& model, const Dataset& data, const LoraConfig& cfg) {
  if (cfg.rank < 1) throw ConfigError("r", "must be at least 1");
  if (cfg.K < 1) throw ConfigError("K", "must be at least 1");
  data.validate();
  BoosterStreams streams = booster_streams(cfg.seed, 0);
  AdapterSet set(0);
  for (const WeightId& id : list_adaptable_weights(model, {cfg.policy, cfg.include_embedding_output})) {
    set.add(init_adapter(model, id, cfg.rank, streams.init, cfg.init_scale, cfg.alpha));
  }
  const BoosterOptions opts{cfg.lambda, cfg.lr, cfg.batch_size, cfg.momentum, cfg.precision};
  BoosterTrace trace = train_booster(model, set, data, cfg.K, opts, streams.batches);
  merge_adapters(model, set, cfg.precision);
  return trace;
}

FitTrace full_finetune(ModelSpec& model, const Dataset& data, const FullFtConfig& cfg, Rng& rng) {
  require(cfg.lr >= 0.0, "full_finetune: learning rate must be non-negative");
  data.validate();
  FitTrace trace;
  std::optional<MomentumSgd> mom;
  if (cfg.momentum > 0.0) mom.emplace(cfg.lr, cfg.momentum);
  for (std::size_t k = 0; k < cfg.K; ++k) {
    const Batch batch = sample_batch(data, cfg.batch_size, rng);
    Tape tape(cfg.precision);
    const BoundModel bound = bind_model(tape, model, nullptr, GradTarget::Weights);
    const Var loss = objective_graph(tape, model, bound, batch, 0.0);
    tape.backward(loss);
    std::vector<Tensor*> params;
    std::vector<Tensor> grads;
    for (auto& [id, w] : model.weights) {
      params.push_back(&w);
      grads.push_back(tape.grad(bound.base.at(id)));
    }
    std::vector<Tensor*> grad_ptrs;
    for (auto& g : grads) grad_ptrs.push_back(&g);
    if (mom) {
      mom->step(params, grad_ptrs, cfg.precision);
    } else {
      sgd_step(params, grad_ptrs, cfg.lr, cfg.precision);
    }
    trace.losses.push_back(loss.value()[0]);
  }
  return trace;
}

}  // namespace xgbl
