// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <map>
#include <span>

#include "xgbl/autograd.hpp"
#include "xgbl/model.hpp"
#include "xgbl/rng.hpp"

namespace xgbl {

// Low-rank correction W0 + alpha * A B for a (d x k) target: A is (d x r),
// B is (r x k).
struct LoraPair {
  WeightId target;
  Tensor a;
  Tensor b;
  std::size_t rank = 1;
  double alpha = 1.0;
};

// One booster's adapters, at most one per weight. Consumed by a merge.
class AdapterSet {
 public:
  AdapterSet() = default;
  explicit AdapterSet(int booster_index) : booster_index_(booster_index) {}

  void add(LoraPair pair);
  const LoraPair* find(const WeightId& id) const;
  LoraPair* find(const WeightId& id);
  const std::map<WeightId, LoraPair>& pairs() const noexcept { return pairs_; }
  std::map<WeightId, LoraPair>& pairs() noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  int booster_index() const noexcept { return booster_index_; }
  bool merged() const noexcept { return merged_; }
  void mark_merged() noexcept { merged_ = true; }

  // sum over pairs of ||A||_F^2 + ||B||_F^2
  double penalty() const;
  std::size_t trainable_params() const;

 private:
  std::map<WeightId, LoraPair> pairs_;
  int booster_index_ = 0;
  bool merged_ = false;
};

inline constexpr double kDefaultAdapterInitScale = 0.01;

// A ~ init_scale * N(0, 1/r), B = 0, so the pair starts as a zero update.
LoraPair init_adapter(const ModelSpec& model, const WeightId& target, std::size_t r, Rng& rng,
                      double init_scale = kDefaultAdapterInitScale, double alpha = 1.0);

// W0 + alpha * A B. Uses the same kernel sequence as the adapted forward
// pass, so merged and adapted evaluations agree bit for bit.
Tensor effective_weight(const Tensor& w0, const LoraPair& pair, Precision precision = Precision::F64);

// W <- W + alpha * A B for every pair; the set is marked merged.
void merge_adapters(ModelSpec& model, AdapterSet& set, Precision precision = Precision::F64);

struct ParamCount {
  std::size_t trainable = 0;
  std::size_t total = 0;
  double permille = 0.0;
};

ParamCount param_count(const ModelSpec& model, const AdapterSet& set);
// sum over targets of (d + k) r
ParamCount param_count(const ModelSpec& model, std::span<const WeightId> targets, std::size_t r);
ParamCount full_param_count(const ModelSpec& model);

// Live trainable parameters plus their gradients.
std::size_t update_bytes(std::size_t trainable, Precision precision);

}  // namespace xgbl
