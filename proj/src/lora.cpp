// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/lora.hpp"

#include <cmath>

namespace xgbl {

void AdapterSet::add(LoraPair pair) {
  require(!merged_, "AdapterSet: cannot add to a merged set");
  const WeightId id = pair.target;
  auto [it, inserted] = pairs_.emplace(id, std::move(pair));
  require(inserted, "AdapterSet: duplicate adapter for " + to_string(id));
}

const LoraPair* AdapterSet::find(const WeightId& id) const {
  auto it = pairs_.find(id);
  return it == pairs_.end() ? nullptr : &it->second;
}

LoraPair* AdapterSet::find(const WeightId& id) {
  auto it = pairs_.find(id);
  return it == pairs_.end() ? nullptr : &it->second;
}

double AdapterSet::penalty() const {
  double s = 0.0;
  for (const auto& [id, p] : pairs_) s += kernels::dot(p.a, p.a) + kernels::dot(p.b, p.b);
  return s;
}

std::size_t AdapterSet::trainable_params() const {
  std::size_t n = 0;
  for (const auto& [id, p] : pairs_) n += p.a.numel() + p.b.numel();
  return n;
}

LoraPair init_adapter(const ModelSpec& model, const WeightId& target, std::size_t r, Rng& rng, double init_scale,
                      double alpha) {
  require(r >= 1, "init_adapter: rank must be at least 1");
  const Tensor& w = model.weight(target);
  const std::size_t d = w.rows(), k = w.cols();
  LoraPair p;
  p.target = target;
  p.rank = r;
  p.alpha = alpha;
  p.a = prng_gaussian(rng, {d, r}, init_scale / std::sqrt(static_cast<double>(r)));
  p.b = Tensor({r, k});
  return p;
}

Tensor effective_weight(const Tensor& w0, const LoraPair& pair, Precision precision) {
  if (pair.a.rank() != 2 || pair.b.rank() != 2 || w0.rank() != 2 || pair.a.rows() != w0.rows() ||
      pair.b.cols() != w0.cols() || pair.a.cols() != pair.b.rows()) {
    throw ContractError("effective_weight: adapter A" + to_string(pair.a.shape()) + " B" + to_string(pair.b.shape()) +
                        " does not fit weight " + to_string(w0.shape()));
  }
  Tensor delta = kernels::matmul(pair.a, pair.b);
  round_inplace(precision, delta);
  delta = kernels::scale(delta, pair.alpha);
  round_inplace(precision, delta);
  Tensor out = kernels::add(w0, delta);
  round_inplace(precision, out);
  return out;
}

void merge_adapters(ModelSpec& model, AdapterSet& set, Precision precision) {
  require(!set.merged(), "merge_adapters: adapter set " + std::to_string(set.booster_index()) + " already merged");
  for (const auto& [id, pair] : set.pairs()) {
    require(model.has_weight(id), "merge_adapters: no weight " + to_string(id));
  }
  for (const auto& [id, pair] : set.pairs()) {
    Tensor& w = model.weight(id);
    w = effective_weight(w, pair, precision);
  }
  set.mark_merged();
}

namespace {

ParamCount make_count(std::size_t trainable, std::size_t total) {
  ParamCount c{trainable, total, 0.0};
  c.permille = total == 0 ? 0.0 : 1000.0 * static_cast<double>(trainable) / static_cast<double>(total);
  return c;
}

}  // namespace

ParamCount param_count(const ModelSpec& model, const AdapterSet& set) {
  return make_count(set.trainable_params(), model.total_params());
}

ParamCount param_count(const ModelSpec& model, std::span<const WeightId> targets, std::size_t r) {
  std::size_t trainable = 0;
  for (const auto& id : targets) {
    const Tensor& w = model.weight(id);
    trainable += (w.rows() + w.cols()) * r;
  }
  return make_count(trainable, model.total_params());
}

ParamCount full_param_count(const ModelSpec& model) {
  const std::size_t total = model.total_params();
  return make_count(total, total);
}

std::size_t update_bytes(std::size_t trainable, Precision precision) {
  return 2 * trainable * (precision == Precision::F64 ? sizeof(double) : sizeof(float));
}

}  // namespace xgbl
