// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "test_util.hpp"
#include "xgbl/checkpoint.hpp"
#include "xgbl/config.hpp"
#include "xgbl/metrics.hpp"
#include "xgbl/report.hpp"
#include "xgbl/run.hpp"

namespace xgbl {
namespace {

namespace fs = std::filesystem;

// Fresh directory under the build tree, removed at scope exit.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("xgbl_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const { return (path / sub).generic_string(); }
};

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig random_config(Rng& rng) {
  RunConfig c;
  c.method = static_cast<Method>(rng.below(3));
  c.task = static_cast<TaskKind>(rng.below(4));
  c.T = rng.below(100);
  c.kappa = 1 + rng.below(64);
  c.K = 1 + rng.below(5000);
  c.r = 1 + rng.below(16);
  c.layers = 1 + rng.below(12);
  c.lambda = rng.uniform() * 1e-3;
  c.lr = rng.uniform();
  c.batch = 1 + rng.below(64);
  c.seed = rng.next_u64();
  c.policy = rng.below(2) ? AdaptPolicy::All : AdaptPolicy::QV;
  c.embed_output = rng.below(2) == 1;
  c.alpha = 0.1 + rng.uniform();
  c.init_scale = rng.uniform() / 3;
  c.momentum = rng.uniform() * 0.9;
  c.precision = rng.below(2) ? Precision::F32 : Precision::F64;
  c.data_seed = rng.next_u64();
  c.dims.clear();
  for (std::size_t i = 0, n = 2 + rng.below(3); i < n; ++i) c.dims.push_back(1 + rng.below(40));
  c.activation = rng.below(2) ? Activation::Relu : Activation::Gelu;
  c.N = 1 + rng.below(4000);
  c.noise = rng.uniform();
  c.feature_decay = rng.uniform() * 2;
  c.seq_len = 2 + rng.below(10);
  c.out = "dir" + std::to_string(rng.below(100));
  c.run_id = "id" + std::to_string(rng.below(100));
  c.verbose_metrics = rng.below(2) == 1;
  c.checkpoint_every = rng.below(50);
  return c;
}

TEST(Config, RoundTripsLosslessly) {
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    const RunConfig c = random_config(rng);
    EXPECT_EQ(parse_config(serialize_config(c)), c) << serialize_config(c);
  }
}

TEST(Config, CommentsBlankLinesAndOverrides) {
  const RunConfig c = parse_config("# header\n\n r = 4  # rank\nlr=0.5\n");
  EXPECT_EQ(c.r, 4u);
  EXPECT_EQ(c.lr, 0.5);
  RunConfig flags = c;
  set_config_value(flags, "r", "2");
  EXPECT_EQ(flags.r, 2u);
}

TEST(Config, ErrorsNameTheField) {
  auto field_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of("bogus=1"), "bogus");
  EXPECT_EQ(field_of("r=abc"), "r");
  EXPECT_EQ(field_of("method=adam"), "method");
  EXPECT_EQ(field_of("lr"), "lr");
}

ModelSpec small_model(std::uint64_t seed) {
  Rng rng(seed);
  TransformerShape s;
  s.d_model = 8;
  s.d_ff = 12;
  s.max_seq = 4;
  return build_transformer(s, Activation::Gelu, rng);
}

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.config_text = serialize_config(RunConfig{});
  ck.model = small_model(3);
  Rng rng(4);
  AdapterSet live(2);
  for (const auto& id : list_adaptable_weights(ck.model)) live.add(init_adapter(ck.model, id, 2, rng, 0.3));
  ck.state.origin = live;
  live.pairs().begin()->second.b[0] = 0.25;
  ck.state.live = live;
  ck.state.global_step = 17;
  ck.state.booster = 2;
  ck.state.step_in_booster = 1;
  ck.state.batch_rng_state = 0xdeadbeefULL;
  ck.state.losses = {0.5, 0.25};
  ck.rng_states = {1, 2, 3};
  return ck;
}

TEST(Checkpoint, RoundTripBitwise) {
  TempDir dir("ck_rt");
  const Checkpoint ck = sample_checkpoint();
  save_checkpoint(dir.str("a.xgbl"), ck);
  const Checkpoint back = load_checkpoint(dir.str("a.xgbl"));
  EXPECT_TRUE(back == ck);
  Batch b{Tensor::matrix({{0, 1, 1, 0}, {1, 0, 0, 1}}), Tensor::matrix({{0}, {1}})};
  EXPECT_TRUE(bitwise_equal(forward(ck.model, b, &*ck.state.live), forward(back.model, b, &*back.state.live)));
  EXPECT_EQ(encode_checkpoint(back), encode_checkpoint(ck));
}

TEST(Checkpoint, F32StoresFloats) {
  Checkpoint ck = sample_checkpoint();
  ck.precision = Precision::F32;
  for (auto& [id, w] : ck.model.weights) round_inplace(Precision::F32, w);
  ck.state.live.reset();
  ck.state.origin.reset();
  const auto bytes32 = encode_checkpoint(ck);
  const Checkpoint back = decode_checkpoint(bytes32);
  EXPECT_TRUE(back == ck);
  ck.precision = Precision::F64;
  EXPECT_LT(bytes32.size(), encode_checkpoint(ck).size());
}

TEST(Checkpoint, TypedErrors) {
  auto bytes = encode_checkpoint(sample_checkpoint());
  auto bad = bytes;
  bad[0] = 'Y';
  EXPECT_THROW(decode_checkpoint(bad), BadMagicError);
  bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_checkpoint(bad), VersionMismatchError);
  bad = bytes;
  bad.resize(bytes.size() - 10);
  EXPECT_THROW(decode_checkpoint(bad), TruncatedError);
  bad = bytes;
  bad[8] ^= 0x40;  // corrupt the length field
  EXPECT_THROW(decode_checkpoint(bad), TruncatedError);
  EXPECT_THROW(decode_checkpoint({}), BadMagicError);
}

TEST(Metrics, CsvRoundTripAndSchemaErrors) {
  TempDir dir("metrics");
  {
    MetricsWriter w(dir.str("m.csv"));
    w.write({"run", 0, 8, 1.5, 0.1, 0.2, 3.0, 12.5, 512});
    w.write({"run", 1, 16, 1.25, 0.1, 0.2, 3.0, 25.0, 512});
  }
  const auto rows = read_metrics_csv(dir.str("m.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1].step, 16u);
  EXPECT_EQ(rows[1].loss, 1.25);
  std::ofstream(dir.str("bad.csv")) << kMetricsSchema << "\nrun_id,t,steps,loss\n";
  try {
    read_metrics_csv(dir.str("bad.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "step");
  }
  EXPECT_THROW(MetricsWriter(dir.str("x.csv")).write({"a,b", 0, 0, 0, 0, 0, 0, 0, 0}), ConfigError);
}

TEST(Report, EmptyDirectoryGivesValidReport) {
  TempDir dir("report_empty");
  fs::create_directories(dir.path / "csv");
  const Report r = emit_report(dir.str("csv"), dir.str("out"));
  EXPECT_NE(r.markdown.find("No runs found."), std::string::npos);
  for (const char* f : {"report.md", "kappa_sweep.svg", "r_sweep.svg", "loss.svg"}) {
    EXPECT_TRUE(fs::exists(dir.path / "out" / f)) << f;
  }
  EXPECT_NE(r.loss_svg.find("</svg>"), std::string::npos);
}

TEST(Report, SchemaMismatchNamesColumn) {
  TempDir dir("report_bad");
  std::ofstream(dir.str("x_summary.csv")) << kSummarySchema << "\nrun_id,method,task,rank\n";
  try {
    build_report(dir.str());
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "r");
  }
}

RunConfig tiny_run(const std::string& out, const std::string& id) {
  RunConfig c;
  c.task = TaskKind::TeacherMlp;
  c.dims = {6, 8, 8, 3};
  c.N = 64;
  c.n_test = 32;
  c.noise = 0.05;
  c.K = 48;
  c.kappa = 4;
  c.layers = 2;
  c.init_scale = 0.2;
  c.seed = 5;
  c.out = out;
  c.run_id = id;
  return c;
}

TEST(Run, WritesArtifactsAndPermilleMatchesParamCount) {
  TempDir dir("run_artifacts");
  const RunConfig c = tiny_run(dir.str(), "a");
  const RunResult res = run_training(c);
  EXPECT_TRUE(res.finished);
  for (const char* f : {"config.txt", "metrics.csv", "summary.csv", "checkpoint.xgbl"}) {
    EXPECT_TRUE(fs::exists(dir.path / "a" / f)) << f;
  }
  EXPECT_EQ(read_metrics_csv(dir.str("a/metrics.csv")).size(), 12u);  // one row per booster
  const auto sum = read_summary_csv(dir.str("a/summary.csv"));
  ASSERT_EQ(sum.size(), 1u);
  const ModelSpec start = make_task(c).model;
  EXPECT_LE(sum[0].trainable, param_count(start, list_adaptable_weights(start), c.r).trainable);
  EXPECT_DOUBLE_EQ(sum[0].permille, 1000.0 * sum[0].trainable / full_param_count(start).total);
  EXPECT_EQ(load_config_file(dir.str("a/config.txt")), c);

  RunConfig v = c;
  v.run_id = "v";
  v.verbose_metrics = true;
  run_training(v);
  EXPECT_EQ(read_metrics_csv(dir.str("v/metrics.csv")).size(), 48u);
}

TEST(Run, InterruptedAndResumedEqualsUninterrupted) {
  TempDir dir("run_resume");
  const RunConfig c = tiny_run(dir.str(), "x");
  const RunResult full = run_training(c);
  const std::string full_ck = slurp(dir.str("x/checkpoint.xgbl"));
  const std::string full_metrics_losses = [&] {
    std::string s;
    for (const auto& r : full.metrics) s += format_number(r.loss) + format_number(r.a_norm) + ";";
    return s;
  }();
  fs::remove_all(dir.path / "x");

  RunOptions stop;
  stop.stop_after = 19;  // mid-booster
  EXPECT_FALSE(run_training(c, stop).finished);
  RunOptions resume;
  resume.resume_path = dir.str("x/checkpoint.xgbl");
  const RunResult rest = run_training(c, resume);
  EXPECT_TRUE(rest.finished);
  EXPECT_EQ(slurp(dir.str("x/checkpoint.xgbl")), full_ck);
  for (const auto& [id, w] : full.model.weights) EXPECT_TRUE(bitwise_equal(w, rest.model.weight(id)));
  const auto rows = read_metrics_csv(dir.str("x/metrics.csv"));
  std::string s;
  for (const auto& r : rows) s += format_number(r.loss) + format_number(r.a_norm) + ";";
  EXPECT_EQ(s, full_metrics_losses);
}

TEST(Report, ByteDeterministicAndPermilleColumn) {
  TempDir dir("report_det");
  for (std::size_t r : {1u, 8u}) {
    RunConfig c = tiny_run(dir.str("runs"), "r" + std::to_string(r));
    c.r = r;
    run_training(c);
  }
  emit_report(dir.str("runs"), dir.str("o1"));
  emit_report(dir.str("runs"), dir.str("o2"));
  for (const char* f : {"report.md", "kappa_sweep.svg", "r_sweep.svg", "loss.svg"}) {
    EXPECT_EQ(slurp(dir.str(std::string("o1/") + f)), slurp(dir.str(std::string("o2/") + f))) << f;
  }
  const auto s1 = read_summary_csv(dir.str("runs/r1/summary.csv"))[0];
  const auto s8 = read_summary_csv(dir.str("runs/r8/summary.csv"))[0];
  EXPECT_NE(slurp(dir.str("o1/report.md")).find(std::to_string(s1.trainable)), std::string::npos);
  // Same adapted layers per booster size here, so bytes scale with r.
  EXPECT_NEAR(static_cast<double>(s8.peak_update_bytes) / static_cast<double>(s1.peak_update_bytes), 8.0, 1e-12);
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "xgblora");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

TEST(Cli, ExitCodes) {
  TempDir dir("cli");
  EXPECT_EQ(run_cli({}), kExitUsage);
  EXPECT_EQ(run_cli({"frobnicate"}), kExitUsage);
  EXPECT_EQ(run_cli({"train", "--bogus", "1", "--seed", "1"}), kExitUsage);
  EXPECT_EQ(run_cli({"train", "--kappa", "8"}), kExitUsage);  // --seed is mandatory
  EXPECT_EQ(run_cli({"probe", "lemma2"}), kExitUsage);
  std::string text;
  EXPECT_EQ(run_cli({"train", "--seed", "1", "--lr", "-2", "--out", dir.str()}, &text), kExitConfig);
  EXPECT_NE(text.find("'lr'"), std::string::npos);
  EXPECT_EQ(run_cli({"train", "--seed", "1", "--r", "x", "--out", dir.str()}, &text), kExitConfig);
  EXPECT_NE(text.find("'r'"), std::string::npos);
  EXPECT_EQ(run_cli({"--help"}), kExitOk);
}

TEST(Cli, TrainWithConfigFileAndFlagOverride) {
  TempDir dir("cli_train");
  std::ofstream(dir.str("run.cfg")) << "# tiny\ntask=teacher-mlp\ndims=4,6,6,2\nN=32\nK=16\nkappa=4\nr=3\nlayers=2\n";
  std::string text;
  ASSERT_EQ(run_cli({"train", "--config", dir.str("run.cfg"), "--r", "1", "--seed", "2", "--out", dir.str(),
                     "--run-id", "t"},
                    &text),
            kExitOk)
      << text;
  const RunConfig c = load_config_file(dir.str("t/config.txt"));
  EXPECT_EQ(c.r, 1u);
  EXPECT_EQ(c.K, 16u);
  EXPECT_EQ(c.seed, 2u);
}

TEST(Cli, CostModelPrintsTotals) {
  std::string text;
  ASSERT_EQ(run_cli({"cost-model", "--preset", "lora"}, &text), kExitOk);
  EXPECT_NE(text.find("L*alpha*K + beta = 32000.0"), std::string::npos) << text;
  ASSERT_EQ(run_cli({"cost-model"}, &text), kExitOk);
  EXPECT_NE(text.find("= 10666.7"), std::string::npos);
  EXPECT_NE(text.find("= 1333.3"), std::string::npos);
}

TEST(Cli, ProbeNormBoundPassesAndGbDemoRuns) {
  std::string text;
  EXPECT_EQ(run_cli({"probe", "lemma2", "--seed", "0", "--runs", "20"}, &text), kExitOk) << text;
  EXPECT_EQ(run_cli({"probe", "lemma3", "--seed", "1"}, &text), kExitOk) << text;
  EXPECT_EQ(run_cli({"gb-demo", "--M", "10"}, &text), kExitOk);
  EXPECT_NE(text.find("final/initial mse"), std::string::npos);
}

TEST(Cli, SweepAndReport) {
  TempDir dir("cli_sweep");
  std::string text;
  ASSERT_EQ(run_cli({"sweep", "--task", "teacher-mlp", "--dims", "4,6,6,2", "--N", "32", "--K", "16", "--layers",
                     "2", "--r-grid", "1,2", "--T-grid", "1,4", "--seed", "3", "--out", dir.str("runs")},
                    &text),
            kExitOk)
      << text;
  EXPECT_EQ(run_cli({"report", "--csv-dir", dir.str("runs")}, &text), kExitOk) << text;
  const std::string md = slurp(dir.str("runs/report/report.md"));
  EXPECT_NE(md.find("Runs: 4"), std::string::npos) << md;
  EXPECT_EQ(run_cli({"sweep", "--K", "16", "--T-grid", "3", "--seed", "1", "--out", dir.str("r2")}, &text),
            kExitConfig);
}

}  // namespace
}  // namespace xgbl
