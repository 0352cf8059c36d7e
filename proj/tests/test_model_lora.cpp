// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "test_util.hpp"
#include "xgbl/forward.hpp"
#include "xgbl/lora.hpp"
#include "xgbl/model.hpp"
#include "xgbl/tasks.hpp"

namespace xgbl {
namespace {

using testing::check_gradients;

TEST(Mlp, ForwardMatchesNumpyOracle) {
  Rng rng(0);
  ModelSpec m = build_mlp({3, 2, 2, 1}, Activation::Gelu, OutputMap::IdentityMse, rng);
  m.weight({1, MatrixRole::MlpDense}) = Tensor::matrix({{0.2, -0.1, 0.4}, {0.3, 0.5, -0.2}});
  m.weight({2, MatrixRole::MlpDense}) = Tensor::matrix({{1.0, -0.5}, {0.25, 0.75}});
  m.weight({3, MatrixRole::MlpDense}) = Tensor::matrix({{0.6, -0.3}});
  Batch b{Tensor::matrix({{0.5, -1.0, 2.0}, {1.5, 0.25, -0.75}}), Tensor({2, 1})};
  const Tensor out = forward(m, b);
  ASSERT_EQ(out.numel(), 2u);
  EXPECT_NEAR(out[0], 0.7904687249588002, 1e-14);
  EXPECT_NEAR(out[1], -0.19479157312679152, 1e-14);
}

TEST(Model, TransformerWeightsAndAdaptableLists) {
  Rng rng(1);
  TransformerShape s;
  s.n_layers = 3;
  const ModelSpec m = build_transformer(s, Activation::Gelu, rng);
  EXPECT_EQ(m.num_layers, 3u);
  const auto qv = list_adaptable_weights(m, {AdaptPolicy::QV, false});
  EXPECT_EQ(qv.size(), 6u);
  for (const auto& id : qv) EXPECT_TRUE(id.role == MatrixRole::AttnQ || id.role == MatrixRole::AttnV);
  const auto all = list_adaptable_weights(m, {AdaptPolicy::All, false});
  EXPECT_EQ(all.size(), 18u);
  const auto with_tables = list_adaptable_weights(m, {AdaptPolicy::All, true});
  EXPECT_EQ(with_tables.size(), 21u);
  const int layers[] = {2};
  for (const auto& id : adaptable_in_layers(m, layers, {AdaptPolicy::All, false})) EXPECT_EQ(id.layer, 2);
}

TEST(Model, RoleAndPolicyNamesRoundTrip) {
  for (MatrixRole r : {MatrixRole::Embedding, MatrixRole::AttnQ, MatrixRole::FfnDown, MatrixRole::Output}) {
    EXPECT_EQ(parse_role(to_string(r)), r);
  }
  EXPECT_EQ(parse_policy(to_string(AdaptPolicy::All)), AdaptPolicy::All);
  EXPECT_EQ(parse_activation(to_string(Activation::Relu)), Activation::Relu);
}

TEST(Model, SampleBatchDrawsRowsFromData) {
  Dataset d{Tensor::matrix({{1, 1}, {2, 2}, {3, 3}}), Tensor::matrix({{1}, {2}, {3}})};
  Rng rng(3);
  const Batch b = sample_batch(d, 5, rng);
  ASSERT_EQ(b.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(b.inputs.at(i, 0), b.targets.at(i, 0));
}

TEST(Lora, InitStartsAtZeroUpdate) {
  Rng rng(2);
  const ModelSpec m = build_mlp({8, 6, 4}, Activation::Relu, OutputMap::IdentityMse, rng);
  const LoraPair p = init_adapter(m, {1, MatrixRole::MlpDense}, 3, rng);
  EXPECT_EQ(p.a.shape(), (Shape{6, 3}));
  EXPECT_EQ(p.b.shape(), (Shape{3, 8}));
  EXPECT_EQ(frobenius_norm(p.b), 0.0);
  EXPECT_GT(frobenius_norm(p.a), 0.0);
  const Tensor& w = m.weight({1, MatrixRole::MlpDense});
  EXPECT_TRUE(bitwise_equal(effective_weight(w, p), w));
}

TEST(Lora, MergeMatchesNumpyOracle) {
  Rng rng(0);
  ModelSpec m = build_mlp({3, 2}, Activation::Relu, OutputMap::IdentityMse, rng);
  m.weight({1, MatrixRole::MlpDense}) = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
  LoraPair p{{1, MatrixRole::MlpDense}, Tensor::matrix({{0.5}, {-1.0}}), Tensor::matrix({{2.0, 0.0, -1.0}}), 1, 0.5};
  AdapterSet set(0);
  set.add(p);
  merge_adapters(m, set);
  EXPECT_TRUE(set.merged());
  EXPECT_EQ(m.weight({1, MatrixRole::MlpDense}), Tensor::matrix({{1.5, 2.0, 2.75}, {3.0, 5.0, 6.5}}));
}

TEST(Lora, DuplicateTargetRejected) {
  Rng rng(0);
  const ModelSpec m = build_mlp({3, 2}, Activation::Relu, OutputMap::IdentityMse, rng);
  AdapterSet set;
  set.add(init_adapter(m, {1, MatrixRole::MlpDense}, 1, rng));
  EXPECT_THROW(set.add(init_adapter(m, {1, MatrixRole::MlpDense}, 1, rng)), Error);
}

// Adapted and merged forward passes agree (bitwise, which implies the
// 1e-12 relative bound) on random MLPs and transformers.
TEST(Lora, AdaptedEqualsMergedForward) {
  Rng rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 40; ++trial) {
    ModelSpec m;
    Batch b;
    if (trial % 2 == 0) {
      const std::size_t d = 3 + rng.below(6);
      m = build_mlp({d, 4 + rng.below(5), 2 + rng.below(4)}, Activation::Gelu, OutputMap::IdentityMse, rng);
      b.inputs = testing::randn(rng, {4, d});
    } else {
      TransformerShape s;
      s.vocab = 3;
      s.d_model = 8;
      s.n_heads = 2;
      s.d_ff = 12;
      s.max_seq = 5;
      m = build_transformer(s, Activation::Gelu, rng);
      b.inputs = Tensor({3, 5});
      for (auto& v : b.inputs.data()) v = static_cast<double>(rng.below(3));
    }
    AdapterSet set(trial);
    for (const auto& id : list_adaptable_weights(m, {AdaptPolicy::All, trial % 4 == 1})) {
      LoraPair p = init_adapter(m, id, 1 + rng.below(3), rng, 0.5);
      p.b = testing::randn(rng, p.b.shape(), 0.3);
      set.add(std::move(p));
    }
    const Tensor adapted = forward(m, b, &set);
    merge_adapters(m, set);
    const Tensor merged = forward(m, b);
    worst = std::max(worst, relative_error(adapted, merged));
    EXPECT_TRUE(bitwise_equal(adapted, merged)) << "trial " << trial;
  }
  EXPECT_LE(worst, 1e-12);
}

// Brute-force count: instantiate every adapter and sum tensor sizes.
TEST(Lora, ParamCountMatchesWalk) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    ModelSpec m;
    if (trial % 2) {
      TransformerShape s;
      s.vocab = 2 + rng.below(4);
      s.n_heads = 2;
      s.d_model = 2 * (2 + rng.below(6));
      s.d_ff = 4 + rng.below(20);
      s.n_layers = 1 + rng.below(3);
      s.max_seq = 3 + rng.below(6);
      m = build_transformer(s, Activation::Gelu, rng);
    } else {
      std::vector<std::size_t> dims;
      for (std::size_t i = 0, n = 2 + rng.below(4); i < n; ++i) dims.push_back(2 + rng.below(12));
      m = build_mlp(dims, Activation::Relu, OutputMap::IdentityMse, rng);
    }
    const AdaptOptions opts{rng.below(2) ? AdaptPolicy::All : AdaptPolicy::QV, rng.below(2) == 1};
    const std::size_t r = 1 + rng.below(4);
    const auto targets = list_adaptable_weights(m, opts);
    std::size_t total = 0;
    for (const auto& [id, w] : m.weights) total += w.numel();
    std::size_t trainable = 0;
    AdapterSet set;
    for (const auto& id : targets) {
      LoraPair p = init_adapter(m, id, r, rng);
      trainable += p.a.numel() + p.b.numel();
      set.add(std::move(p));
    }
    const ParamCount c = param_count(m, targets, r);
    EXPECT_EQ(c.trainable, trainable) << "trial " << trial;
    EXPECT_EQ(c.total, total);
    EXPECT_DOUBLE_EQ(c.permille, 1000.0 * trainable / total);
    EXPECT_EQ(param_count(m, set).trainable, trainable);
    EXPECT_EQ(full_param_count(m).permille, 1000.0);
  }
}

TEST(Lora, UpdateBytesLinearInRank) {
  Rng rng(4);
  const ModelSpec m = build_mlp({16, 16, 16}, Activation::Relu, OutputMap::IdentityMse, rng);
  const auto targets = list_adaptable_weights(m);
  const auto b1 = update_bytes(param_count(m, targets, 1).trainable, Precision::F64);
  const auto b8 = update_bytes(param_count(m, targets, 8).trainable, Precision::F64);
  EXPECT_EQ(b8, 8 * b1);
  EXPECT_EQ(update_bytes(10, Precision::F32) * 2, update_bytes(10, Precision::F64));
}

// Gradients through the adapted forward pass of a transformer.
TEST(Forward, AdapterGradientsMatchDifferences) {
  Rng rng(8);
  TransformerShape s;
  s.vocab = 3;
  s.d_model = 4;
  s.n_heads = 2;
  s.d_ff = 6;
  s.n_layers = 1;
  s.max_seq = 3;
  const ModelSpec m = build_transformer(s, Activation::Gelu, rng);
  Batch b{Tensor::matrix({{0, 2, 1}, {1, 1, 0}}), Tensor::matrix({{2}, {0}})};
  const WeightId q{1, MatrixRole::AttnQ};
  LoraPair p = init_adapter(m, q, 2, rng, 0.5);
  p.b = testing::randn(rng, p.b.shape(), 0.3);
  const double lambda = 0.01;
  auto objective = [&](const LoraPair& pair, GradTarget target, Tape& tape, BoundModel& bound) {
    AdapterSet set;
    set.add(pair);
    bound = bind_model(tape, m, &set, target);
    return objective_graph(tape, m, bound, b, lambda);
  };
  Tape tape;
  BoundModel bound;
  tape.backward(objective(p, GradTarget::Adapters, tape, bound));
  const Tensor ga = tape.grad(bound.adapters.at(q).first);
  const Tensor gb = tape.grad(bound.adapters.at(q).second);
  auto value = [&](const LoraPair& pair) {
    Tape t;
    BoundModel bm;
    return objective(pair, GradTarget::None, t, bm).value().item();
  };
  const double eps = 1e-6;
  for (int which = 0; which < 2; ++which) {
    const Tensor& g = which == 0 ? ga : gb;
    Tensor fd(g.shape());
    for (std::size_t i = 0; i < fd.numel(); ++i) {
      LoraPair up = p, down = p;
      (which == 0 ? up.a : up.b)[i] += eps;
      (which == 0 ? down.a : down.b)[i] -= eps;
      fd[i] = (value(up) - value(down)) / (2 * eps);
    }
    EXPECT_LT(relative_error(g, fd), 1e-4) << (which == 0 ? "A" : "B");
  }
}

TEST(Tasks, TeacherIsRealizableAndDeterministic) {
  TeacherConfig tc;
  tc.dims = {6, 4};
  tc.N = 64;
  tc.seed = 5;
  auto [d1, t1] = gen_teacher_dataset(tc);
  auto [d2, t2] = gen_teacher_dataset(tc);
  EXPECT_TRUE(bitwise_equal(d1.inputs, d2.inputs));
  EXPECT_TRUE(bitwise_equal(d1.targets, d2.targets));
  EXPECT_NEAR(teacher_gap(t1.teacher, t1), 0.0, 1e-24);
  EXPECT_GT(teacher_gap(t1.start, t1), 0.0);
  for (const auto& [id, w] : t1.teacher.weights) {
    EXPECT_LT(relative_error(w, kernels::add(t1.start.weight(id), t1.delta.at(id))), 1e-15);
  }
}

TEST(Tasks, SequenceDatasetsBalancedAndCorrect) {
  for (SequenceTask task : {SequenceTask::Parity, SequenceTask::Copy}) {
    for (std::size_t n : {1u, 7u, 200u}) {
      const Dataset d = gen_sequence_dataset(task, 6, n, 3);
      ASSERT_EQ(d.size(), n);
      std::size_t ones = 0;
      for (std::size_t i = 0; i < n; ++i) {
        int want = 0;
        if (task == SequenceTask::Parity) {
          for (std::size_t j = 0; j < 6; ++j) want ^= static_cast<int>(d.inputs.at(i, j));
        } else {
          want = static_cast<int>(d.inputs.at(i, 0));
        }
        EXPECT_EQ(static_cast<int>(d.targets[i]), want);
        ones += static_cast<std::size_t>(d.targets[i]);
      }
      const auto zeros = n - ones;
      EXPECT_LE(std::max(ones, zeros) - std::min(ones, zeros), 1u);
    }
  }
  EXPECT_THROW(gen_sequence_dataset(SequenceTask::Parity, 1, 10, 0), Error);
}

TEST(Tasks, ParityOfAllZerosIsZero) {
  const Dataset d = gen_sequence_dataset(SequenceTask::Parity, 4, 400, 9);
  bool found = false;
  for (std::size_t i = 0; i < d.size(); ++i) {
    bool zero = true;
    for (std::size_t j = 0; j < 4; ++j) zero = zero && d.inputs.at(i, j) == 0.0;
    if (zero) {
      found = true;
      EXPECT_EQ(d.targets[i], 0.0);
    }
  }
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace xgbl
