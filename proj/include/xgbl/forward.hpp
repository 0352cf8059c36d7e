// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <utility>

#include "xgbl/autograd.hpp"
#include "xgbl/lora.hpp"
#include "xgbl/model.hpp"

namespace xgbl {

// Which leaves of a bound model receive gradients.
enum class GradTarget { None, Adapters, Weights };

// Tape handles for one forward pass. `effective` holds W (or W + alpha A B
// when an adapter targets it); its gradient is the gradient w.r.t. the
// adapted weight.
struct BoundModel {
  std::map<WeightId, Var> base;
  std::map<WeightId, Var> effective;
  std::map<WeightId, std::pair<Var, Var>> adapters;
};

BoundModel bind_model(Tape& tape, const ModelSpec& model, const AdapterSet* adapters, GradTarget target);

// Logits as a matrix: (b x out) for an Mlp, (b*seq x vocab) for a transformer.
Var forward_graph(Tape& tape, const ModelSpec& model, const BoundModel& bound, const Tensor& inputs);

// Mean task loss of a batch: mse for identity outputs, cross-entropy for
// softmax outputs (last position only for a transformer).
Var task_loss_graph(const ModelSpec& model, Var logits, const Batch& batch);

// task loss + lambda * sum over adapters of (||A||^2 + ||B||^2)
Var objective_graph(Tape& tape, const ModelSpec& model, const BoundModel& bound, const Batch& batch, double lambda);

// Logits tensor: (b x out) for an Mlp, (b x seq x vocab) for a transformer.
// Stored weights are never mutated.
Tensor forward(const ModelSpec& model, const Batch& batch, const AdapterSet* adapters = nullptr,
               Precision precision = Precision::F64);

// Mean task loss over the dataset plus lambda times the adapter penalty.
// Evaluated in chunks of `chunk` rows.
double loss_eval(const ModelSpec& model, const Dataset& data, const AdapterSet* adapters, double lambda,
                 Precision precision = Precision::F64, std::size_t chunk = 256);

// Fraction of rows whose arg-max logit equals the class target.
double accuracy(const ModelSpec& model, const Dataset& data, const AdapterSet* adapters = nullptr,
                std::size_t chunk = 256);

}  // namespace xgbl
