// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/forward.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace xgbl {

namespace {

constexpr double kMaskValue = -1e9;

std::vector<std::size_t> to_indices(const Tensor& t, std::size_t limit, const char* what) {
  std::vector<std::size_t> ids(t.numel());
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const double v = t[i];
    if (!(v >= 0.0) || v != std::floor(v) || static_cast<std::size_t>(v) >= limit) {
      throw ContractError(std::string(what) + ": value " + std::to_string(v) + " is not an index below " +
                          std::to_string(limit));
    }
    ids[i] = static_cast<std::size_t>(v);
  }
  return ids;
}

void check_inputs(const ModelSpec& model, const Tensor& inputs) {
  if (inputs.rank() != 2 || inputs.dim(0) == 0) {
    throw ContractError("forward: inputs must be a non-empty matrix, got " + to_string(inputs.shape()));
  }
  if (model.kind == ModelKind::Mlp) {
    if (inputs.dim(1) != model.dims.front()) {
      throw ContractError("forward: Mlp expects " + std::to_string(model.dims.front()) + " features, got " +
                          to_string(inputs.shape()));
    }
  } else if (inputs.dim(1) > model.transformer.max_seq) {
    throw ContractError("forward: sequence length " + std::to_string(inputs.dim(1)) + " exceeds max_seq " +
                        std::to_string(model.transformer.max_seq));
  }
}

std::size_t output_width(const ModelSpec& model) {
  return model.kind == ModelKind::Mlp ? model.dims.back() : model.transformer.vocab;
}

Var activate(Activation a, Var x) { return a == Activation::Relu ? ag::relu(x) : ag::gelu(x); }

Var linear(Var x, Var w) { return ag::matmul(x, ag::transpose(w)); }

Var mlp_forward(const ModelSpec& model, const BoundModel& bound, Var x) {
  const std::size_t L = model.num_layers;
  Var h = x;
  for (std::size_t l = 1; l <= L; ++l) {
    h = linear(h, bound.effective.at(WeightId{static_cast<int>(l), MatrixRole::MlpDense}));
    if (l > 1 && l < L) h = activate(model.activation, h);
  }
  return h;
}

Var transformer_forward(Tape& tape, const ModelSpec& model, const BoundModel& bound, const Tensor& inputs) {
  const TransformerShape& ts = model.transformer;
  const std::size_t b = inputs.dim(0), s = inputs.dim(1), n = b * s;
  const std::size_t d = ts.d_model, heads = ts.n_heads, dh = d / heads;
  const auto ids = to_indices(inputs, ts.vocab, "token id");
  std::vector<std::size_t> pos(n);
  for (std::size_t i = 0; i < n; ++i) pos[i] = i % s;

  // Block-diagonal causal mask over the flattened (b*seq) rows.
  Tensor mask({n, n}, kMaskValue);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i - i % s; j <= i; ++j) mask.at(i, j) = 0.0;
  const Var mask_v = tape.constant(std::move(mask));

  std::vector<Var> selectors;
  if (heads > 1) {
    for (std::size_t hh = 0; hh < heads; ++hh) {
      Tensor sel({d, dh});
      for (std::size_t j = 0; j < dh; ++j) sel.at(hh * dh + j, j) = 1.0;
      selectors.push_back(tape.constant(std::move(sel)));
    }
  }
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Var emb = bound.effective.at(WeightId{1, MatrixRole::Embedding});
  Var h = ag::add(ag::gather_rows(emb, ids), ag::gather_rows(bound.effective.at(WeightId{1, MatrixRole::Position}), pos));

  for (std::size_t l = 1; l <= ts.n_layers; ++l) {
    const int li = static_cast<int>(l);
    const Var a = ag::layer_norm_rows(h);
    const Var q = linear(a, bound.effective.at(WeightId{li, MatrixRole::AttnQ}));
    const Var k = linear(a, bound.effective.at(WeightId{li, MatrixRole::AttnK}));
    const Var v = linear(a, bound.effective.at(WeightId{li, MatrixRole::AttnV}));
    Var attn;
    for (std::size_t hh = 0; hh < heads; ++hh) {
      const Var qh = heads > 1 ? ag::matmul(q, selectors[hh]) : q;
      const Var kh = heads > 1 ? ag::matmul(k, selectors[hh]) : k;
      const Var vh = heads > 1 ? ag::matmul(v, selectors[hh]) : v;
      const Var scores = ag::add(ag::scale(ag::matmul(qh, ag::transpose(kh)), att_scale), mask_v);
      Var oh = ag::matmul(ag::softmax_rows(scores), vh);
      if (heads > 1) oh = ag::matmul(oh, ag::transpose(selectors[hh]));
      attn = hh == 0 ? oh : ag::add(attn, oh);
    }
    h = ag::add(h, linear(attn, bound.effective.at(WeightId{li, MatrixRole::AttnO})));
    const Var a2 = ag::layer_norm_rows(h);
    const Var up = activate(model.activation, linear(a2, bound.effective.at(WeightId{li, MatrixRole::FfnUp})));
    h = ag::add(h, linear(up, bound.effective.at(WeightId{li, MatrixRole::FfnDown})));
  }
  const Var hf = ag::layer_norm_rows(h);
  const WeightId out_id = ts.tied_output ? WeightId{1, MatrixRole::Embedding}
                                         : WeightId{static_cast<int>(ts.n_layers), MatrixRole::Output};
  return linear(hf, bound.effective.at(out_id));
}

}  // namespace

BoundModel bind_model(Tape& tape, const ModelSpec& model, const AdapterSet* adapters, GradTarget target) {
  if (adapters != nullptr) {
    require(!adapters->merged(), "forward: adapter set " + std::to_string(adapters->booster_index()) +
                                     " was already merged");
    for (const auto& [id, pair] : adapters->pairs()) {
      require(model.has_weight(id), "forward: adapter targets missing weight " + to_string(id));
    }
  }
  BoundModel bound;
  for (const auto& [id, w] : model.weights) {
    const Var base = tape.leaf(w, target == GradTarget::Weights);
    bound.base.emplace(id, base);
    const LoraPair* pair = adapters ? adapters->find(id) : nullptr;
    if (pair == nullptr) {
      bound.effective.emplace(id, base);
      continue;
    }
    if (pair->a.rows() != w.rows() || pair->b.cols() != w.cols() || pair->a.cols() != pair->b.rows()) {
      throw ContractError("forward: adapter A" + to_string(pair->a.shape()) + " B" + to_string(pair->b.shape()) +
                          " does not fit " + to_string(id) + " " + to_string(w.shape()));
    }
    const bool train = target == GradTarget::Adapters;
    const Var a = tape.leaf(pair->a, train);
    const Var b = tape.leaf(pair->b, train);
    bound.adapters.emplace(id, std::make_pair(a, b));
    bound.effective.emplace(id, ag::add(base, ag::scale(ag::matmul(a, b), pair->alpha)));
  }
  return bound;
}

Var forward_graph(Tape& tape, const ModelSpec& model, const BoundModel& bound, const Tensor& inputs) {
  check_inputs(model, inputs);
  if (model.kind == ModelKind::Mlp) return mlp_forward(model, bound, tape.constant(inputs));
  return transformer_forward(tape, model, bound, inputs);
}

Var task_loss_graph(const ModelSpec& model, Var logits, const Batch& batch) {
  const std::size_t b = batch.size();
  const std::size_t width = output_width(model);
  if (model.kind == ModelKind::Mlp && model.output == OutputMap::IdentityMse) {
    if (batch.targets.numel() != b * width) {
      throw ContractError("loss: mse targets " + to_string(batch.targets.shape()) + " do not match outputs (" +
                          std::to_string(b) + "x" + std::to_string(width) + ")");
    }
    return ag::mse(logits, batch.targets.reshaped({b, width}));
  }
  if (batch.targets.numel() != b) {
    throw ContractError("loss: expected one class id per row, got targets " + to_string(batch.targets.shape()));
  }
  const auto classes = to_indices(batch.targets, width, "class target");
  if (model.kind == ModelKind::Mlp) return ag::cross_entropy(logits, classes);
  const std::size_t s = batch.inputs.dim(1);
  std::vector<std::size_t> last(b);
  for (std::size_t i = 0; i < b; ++i) last[i] = i * s + s - 1;
  return ag::cross_entropy(ag::gather_rows(logits, last), classes);
}

Var objective_graph(Tape& tape, const ModelSpec& model, const BoundModel& bound, const Batch& batch, double lambda) {
  require(lambda >= 0.0, "objective: lambda must be non-negative");
  Var loss = task_loss_graph(model, forward_graph(tape, model, bound, batch.inputs), batch);
  if (lambda > 0.0 && !bound.adapters.empty()) {
    Var penalty;
    bool first = true;
    for (const auto& [id, ab] : bound.adapters) {
      Var term = ag::add(ag::sum_squares(ab.first), ag::sum_squares(ab.second));
      penalty = first ? term : ag::add(penalty, term);
      first = false;
    }
    loss = ag::add(loss, ag::scale(penalty, lambda));
  }
  return loss;
}

Tensor forward(const ModelSpec& model, const Batch& batch, const AdapterSet* adapters, Precision precision) {
  Tape tape(precision);
  const BoundModel bound = bind_model(tape, model, adapters, GradTarget::None);
  const Var logits = forward_graph(tape, model, bound, batch.inputs);
  if (model.kind == ModelKind::Mlp) return logits.value();
  return logits.value().reshaped({batch.inputs.dim(0), batch.inputs.dim(1), model.transformer.vocab});
}

namespace {

template <typename F>
void for_each_chunk(const Dataset& data, std::size_t chunk, F&& f) {
  require(chunk >= 1, "chunk size must be positive");
  const std::size_t n = data.size();
  require(n >= 1, "empty dataset");
  if (n <= chunk) {
    f(full_batch(data));
    return;
  }
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < n; start += chunk) {
    rows.clear();
    for (std::size_t i = start; i < std::min(n, start + chunk); ++i) rows.push_back(i);
    f(make_batch(data, rows));
  }
}

}  // namespace

double loss_eval(const ModelSpec& model, const Dataset& data, const AdapterSet* adapters, double lambda,
                 Precision precision, std::size_t chunk) {
  require(lambda >= 0.0, "loss_eval: lambda must be non-negative");
  double total = 0.0;
  for_each_chunk(data, chunk, [&](const Batch& batch) {
    Tape tape(precision);
    const BoundModel bound = bind_model(tape, model, adapters, GradTarget::None);
    const Var loss = task_loss_graph(model, forward_graph(tape, model, bound, batch.inputs), batch);
    total += loss.value()[0] * static_cast<double>(batch.size());
  });
  double out = total / static_cast<double>(data.size());
  if (adapters != nullptr && lambda > 0.0) out += lambda * adapters->penalty();
  return out;
}

double accuracy(const ModelSpec& model, const Dataset& data, const AdapterSet* adapters, std::size_t chunk) {
  require(model.kind == ModelKind::TinyTransformer || model.output == OutputMap::SoftmaxCe,
          "accuracy: model has no class outputs");
  std::size_t correct = 0;
  const std::size_t width = output_width(model);
  for_each_chunk(data, chunk, [&](const Batch& batch) {
    const Tensor logits = forward(model, batch, adapters);
    const std::size_t b = batch.size();
    const std::size_t stride = model.kind == ModelKind::Mlp ? width : batch.inputs.dim(1) * width;
    const std::size_t offset = model.kind == ModelKind::Mlp ? 0 : (batch.inputs.dim(1) - 1) * width;
    for (std::size_t i = 0; i < b; ++i) {
      const double* row = logits.data().data() + i * stride + offset;
      const std::size_t pred = static_cast<std::size_t>(std::max_element(row, row + width) - row);
      if (static_cast<double>(pred) == batch.targets[i]) ++correct;
    }
  });
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace xgbl
