// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace xgbl {

namespace {

constexpr std::array<std::pair<MatrixRole, std::string_view>, 10> kRoleNames{{
    {MatrixRole::Embedding, "Embedding"},
    {MatrixRole::Position, "Position"},
    {MatrixRole::AttnQ, "AttnQ"},
    {MatrixRole::AttnK, "AttnK"},
    {MatrixRole::AttnV, "AttnV"},
    {MatrixRole::AttnO, "AttnO"},
    {MatrixRole::FfnUp, "FfnUp"},
    {MatrixRole::FfnDown, "FfnDown"},
    {MatrixRole::MlpDense, "MlpDense"},
    {MatrixRole::Output, "Output"},
}};

Tensor init_weight(Rng& rng, std::size_t out, std::size_t in) {
  return prng_gaussian(rng, {out, in}, 1.0 / std::sqrt(static_cast<double>(in)));
}

bool is_table_role(MatrixRole r) {
  return r == MatrixRole::Embedding || r == MatrixRole::Position || r == MatrixRole::Output;
}

bool policy_allows(AdaptPolicy p, MatrixRole r) {
  switch (r) {
    case MatrixRole::AttnQ:
    case MatrixRole::AttnV:
      return true;
    case MatrixRole::AttnK:
    case MatrixRole::AttnO:
    case MatrixRole::FfnUp:
    case MatrixRole::FfnDown:
      return p == AdaptPolicy::All;
    default:
      return false;
  }
}

}  // namespace

std::string_view to_string(MatrixRole role) {
  for (const auto& [r, name] : kRoleNames)
    if (r == role) return name;
  return "?";
}

MatrixRole parse_role(std::string_view s) {
  for (const auto& [r, name] : kRoleNames)
    if (name == s) return r;
  throw ContractError("unknown matrix role '" + std::string(s) + "'");
}

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "gelu"; }

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::Relu;
  if (s == "gelu") return Activation::Gelu;
  throw ConfigError("activation", "expected relu or gelu, got '" + std::string(s) + "'");
}

std::string_view to_string(OutputMap m) { return m == OutputMap::SoftmaxCe ? "softmax-ce" : "identity-mse"; }

OutputMap parse_output_map(std::string_view s) {
  if (s == "softmax-ce") return OutputMap::SoftmaxCe;
  if (s == "identity-mse") return OutputMap::IdentityMse;
  throw ConfigError("output", "expected softmax-ce or identity-mse, got '" + std::string(s) + "'");
}

std::string_view to_string(AdaptPolicy p) { return p == AdaptPolicy::QV ? "qv" : "all"; }

AdaptPolicy parse_policy(std::string_view s) {
  if (s == "qv" || s == "QV") return AdaptPolicy::QV;
  if (s == "all" || s == "All") return AdaptPolicy::All;
  throw ConfigError("policy", "expected qv or all, got '" + std::string(s) + "'");
}

std::string to_string(const WeightId& id) { return "L" + std::to_string(id.layer) + "." + std::string(to_string(id.role)); }

const Tensor& ModelSpec::weight(const WeightId& id) const {
  auto it = weights.find(id);
  if (it == weights.end()) throw ContractError("model has no weight " + to_string(id));
  return it->second;
}

Tensor& ModelSpec::weight(const WeightId& id) {
  auto it = weights.find(id);
  if (it == weights.end()) throw ContractError("model has no weight " + to_string(id));
  return it->second;
}

std::size_t ModelSpec::total_params() const {
  std::size_t n = 0;
  for (const auto& [id, w] : weights) n += w.numel();
  return n;
}

ModelSpec build_mlp(std::vector<std::size_t> dims, Activation act, OutputMap out, Rng& rng) {
  require(dims.size() >= 2, "build_mlp: need at least input and output dims");
  require(std::all_of(dims.begin(), dims.end(), [](std::size_t d) { return d > 0; }), "build_mlp: zero-width layer");
  ModelSpec m;
  m.kind = ModelKind::Mlp;
  m.num_layers = dims.size() - 1;
  m.activation = act;
  m.output = out;
  for (std::size_t l = 1; l <= m.num_layers; ++l) {
    m.weights.emplace(WeightId{static_cast<int>(l), MatrixRole::MlpDense}, init_weight(rng, dims[l], dims[l - 1]));
  }
  m.dims = std::move(dims);
  return m;
}

ModelSpec build_transformer(const TransformerShape& shape, Activation act, Rng& rng) {
  require(shape.n_heads > 0 && shape.d_model % shape.n_heads == 0,
          "build_transformer: d_model (" + std::to_string(shape.d_model) + ") must be divisible by n_heads (" +
              std::to_string(shape.n_heads) + ")");
  require(shape.n_layers >= 1 && shape.vocab >= 1 && shape.d_ff >= 1 && shape.max_seq >= 1,
          "build_transformer: sizes must be positive");
  ModelSpec m;
  m.kind = ModelKind::TinyTransformer;
  m.num_layers = shape.n_layers;
  m.activation = act;
  m.output = OutputMap::SoftmaxCe;
  m.transformer = shape;
  const std::size_t d = shape.d_model;
  m.weights.emplace(WeightId{1, MatrixRole::Embedding}, init_weight(rng, shape.vocab, d));
  m.weights.emplace(WeightId{1, MatrixRole::Position}, init_weight(rng, shape.max_seq, d));
  for (std::size_t l = 1; l <= shape.n_layers; ++l) {
    const int li = static_cast<int>(l);
    for (MatrixRole r : {MatrixRole::AttnQ, MatrixRole::AttnK, MatrixRole::AttnV, MatrixRole::AttnO}) {
      m.weights.emplace(WeightId{li, r}, init_weight(rng, d, d));
    }
    m.weights.emplace(WeightId{li, MatrixRole::FfnUp}, init_weight(rng, shape.d_ff, d));
    m.weights.emplace(WeightId{li, MatrixRole::FfnDown}, init_weight(rng, d, shape.d_ff));
  }
  if (!shape.tied_output) {
    m.weights.emplace(WeightId{static_cast<int>(shape.n_layers), MatrixRole::Output}, init_weight(rng, shape.vocab, d));
  }
  return m;
}

std::vector<WeightId> list_adaptable_weights(const ModelSpec& model, const AdaptOptions& opts) {
  std::vector<WeightId> ids;
  for (const auto& [id, w] : model.weights) {
    if (model.kind == ModelKind::Mlp) {
      ids.push_back(id);
    } else if (is_table_role(id.role)) {
      if (opts.include_embedding_output) ids.push_back(id);
    } else if (policy_allows(opts.policy, id.role)) {
      ids.push_back(id);
    }
  }
  return ids;
}

std::vector<WeightId> adaptable_in_layers(const ModelSpec& model, std::span<const int> layers, const AdaptOptions& opts) {
  std::vector<WeightId> out;
  for (const auto& id : list_adaptable_weights(model, opts)) {
    if (std::find(layers.begin(), layers.end(), id.layer) != layers.end()) out.push_back(id);
  }
  return out;
}

void Dataset::validate() const {
  require(!inputs.empty() && inputs.rank() == 2, "dataset inputs must be a non-empty matrix");
  require(!targets.empty() && targets.dim(0) == inputs.dim(0), "dataset targets must have one row per input");
  require(inputs.all_finite() && targets.all_finite(), "dataset contains non-finite values");
}

Batch make_batch(const Dataset& data, std::span<const std::size_t> rows) {
  require(!rows.empty(), "make_batch: empty row selection");
  const std::size_t in_w = data.inputs.numel() / data.size();
  const std::size_t tg_w = data.targets.numel() / data.size();
  Shape in_shape = data.inputs.shape();
  Shape tg_shape = data.targets.shape();
  in_shape[0] = rows.size();
  tg_shape[0] = rows.size();
  Batch b{Tensor(in_shape), Tensor(tg_shape)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] < data.size(), "make_batch: row index out of range");
    for (std::size_t j = 0; j < in_w; ++j) b.inputs[i * in_w + j] = data.inputs[rows[i] * in_w + j];
    for (std::size_t j = 0; j < tg_w; ++j) b.targets[i * tg_w + j] = data.targets[rows[i] * tg_w + j];
  }
  return b;
}

Batch full_batch(const Dataset& data) { return Batch{data.inputs, data.targets}; }

Batch sample_batch(const Dataset& data, std::size_t b, Rng& rng) {
  require(b >= 1, "sample_batch: batch size must be at least 1");
  require(data.size() >= 1, "sample_batch: empty dataset");
  std::vector<std::size_t> rows(b);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(data.size()));
  return make_batch(data, rows);
}

}  // namespace xgbl
