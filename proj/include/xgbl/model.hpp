// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xgbl/rng.hpp"
#include "xgbl/tensor.hpp"

namespace xgbl {

enum class ModelKind { Mlp, TinyTransformer };
enum class Activation { Relu, Gelu };
enum class OutputMap { SoftmaxCe, IdentityMse };

enum class MatrixRole {
  Embedding,
  Position,
  AttnQ,
  AttnK,
  AttnV,
  AttnO,
  FfnUp,
  FfnDown,
  MlpDense,
  Output,
};

std::string_view to_string(MatrixRole role);
MatrixRole parse_role(std::string_view s);
std::string_view to_string(Activation a);
Activation parse_activation(std::string_view s);
std::string_view to_string(OutputMap m);
OutputMap parse_output_map(std::string_view s);

// Addresses one weight matrix. Layers are 1-based.
struct WeightId {
  int layer = 1;
  MatrixRole role = MatrixRole::MlpDense;

  auto operator<=>(const WeightId&) const = default;
};

std::string to_string(const WeightId& id);

struct TransformerShape {
  std::size_t vocab = 2;
  std::size_t d_model = 16;
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_ff = 32;
  std::size_t max_seq = 16;
  bool tied_output = false;
};

// A layered network whose weights are addressable by WeightId. Weight
// matrices are stored (out x in) and applied to row-major activations as
// Y = X W^T.
struct ModelSpec {
  ModelKind kind = ModelKind::Mlp;
  std::size_t num_layers = 0;
  std::vector<std::size_t> dims;  // Mlp only: d_0 .. d_L
  Activation activation = Activation::Relu;
  OutputMap output = OutputMap::IdentityMse;
  TransformerShape transformer;
  std::map<WeightId, Tensor> weights;

  const Tensor& weight(const WeightId& id) const;
  Tensor& weight(const WeightId& id);
  bool has_weight(const WeightId& id) const { return weights.count(id) != 0; }
  std::size_t total_params() const;
};

// Layer 1 is linear, layers 2..L-1 apply the activation, layer L feeds the
// output map. L = dims.size() - 1.
ModelSpec build_mlp(std::vector<std::size_t> dims, Activation act, OutputMap out, Rng& rng);

// Pre-norm decoder blocks with learned positions and causal attention.
ModelSpec build_transformer(const TransformerShape& shape, Activation act, Rng& rng);

enum class AdaptPolicy { QV, All };
std::string_view to_string(AdaptPolicy p);
AdaptPolicy parse_policy(std::string_view s);

struct AdaptOptions {
  AdaptPolicy policy = AdaptPolicy::QV;
  // Also expose Embedding/Position/Output tables.
  bool include_embedding_output = false;
};

// Layer-major, role-minor order.
std::vector<WeightId> list_adaptable_weights(const ModelSpec& model, const AdaptOptions& opts = {});
// The adaptable weights belonging to the given layers.
std::vector<WeightId> adaptable_in_layers(const ModelSpec& model, std::span<const int> layers,
                                          const AdaptOptions& opts = {});

// Inputs are (N x features) for an Mlp or (N x seq) token ids for a
// transformer. Targets are (N x outputs) for mse or (N) class ids for ce.
struct Dataset {
  Tensor inputs;
  Tensor targets;

  std::size_t size() const { return inputs.empty() ? 0 : inputs.dim(0); }
  void validate() const;
};

struct Batch {
  Tensor inputs;
  Tensor targets;

  std::size_t size() const { return inputs.empty() ? 0 : inputs.dim(0); }
};

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows);
Batch full_batch(const Dataset& data);
// b rows drawn uniformly with replacement.
Batch sample_batch(const Dataset& data, std::size_t b, Rng& rng);

}  // namespace xgbl
