// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <cstdlib>
#include <sstream>

namespace xgbl {

namespace {

// Shortest of %.15g / %.17g that reads back exactly.
std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError(std::string(key), "expected a number, got '" + s + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

std::vector<std::size_t> to_list(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    out.push_back(to_u64(key, trim(v.substr(0, comma))));
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  if (out.empty()) throw ConfigError(std::string(key), "expected a comma-separated list");
  return out;
}

struct Field {
  std::string name;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename T>
Field size_field(std::string name, T RunConfig::*m) {
  return {name, [m](const RunConfig& c) { return std::to_string(c.*m); },
          [m, name](RunConfig& c, std::string_view v) { c.*m = static_cast<T>(to_u64(name, v)); }};
}

Field double_field(std::string name, double RunConfig::*m) {
  return {name, [m](const RunConfig& c) { return fmt_double(c.*m); },
          [m, name](RunConfig& c, std::string_view v) { c.*m = to_double(name, v); }};
}

Field bool_field(std::string name, bool RunConfig::*m) {
  return {name, [m](const RunConfig& c) { return std::string(c.*m ? "true" : "false"); },
          [m, name](RunConfig& c, std::string_view v) { c.*m = to_bool(name, v); }};
}

Field string_field(std::string name, std::string RunConfig::*m) {
  return {name, [m](const RunConfig& c) { return c.*m; },
          [m](RunConfig& c, std::string_view v) { c.*m = std::string(v); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> f = [] {
    std::vector<Field> v;
    v.push_back({"method", [](const RunConfig& c) { return std::string(to_string(c.method)); },
                 [](RunConfig& c, std::string_view s) { c.method = parse_method(s); }});
    v.push_back({"task", [](const RunConfig& c) { return std::string(to_string(c.task)); },
                 [](RunConfig& c, std::string_view s) { c.task = parse_task(s); }});
    v.push_back(size_field("T", &RunConfig::T));
    v.push_back(size_field("kappa", &RunConfig::kappa));
    v.push_back(size_field("K", &RunConfig::K));
    v.push_back(size_field("r", &RunConfig::r));
    v.push_back(size_field("layers", &RunConfig::layers));
    v.push_back(double_field("lambda", &RunConfig::lambda));
    v.push_back(double_field("lr", &RunConfig::lr));
    v.push_back(size_field("batch", &RunConfig::batch));
    v.push_back(size_field("seed", &RunConfig::seed));
    v.push_back({"policy", [](const RunConfig& c) { return std::string(to_string(c.policy)); },
                 [](RunConfig& c, std::string_view s) { c.policy = parse_policy(s); }});
    v.push_back(bool_field("embed_output", &RunConfig::embed_output));
    v.push_back(double_field("alpha", &RunConfig::alpha));
    v.push_back(double_field("init_scale", &RunConfig::init_scale));
    v.push_back(double_field("momentum", &RunConfig::momentum));
    v.push_back({"precision", [](const RunConfig& c) { return std::string(to_string(c.precision)); },
                 [](RunConfig& c, std::string_view s) { c.precision = parse_precision(s); }});
    v.push_back(size_field("data_seed", &RunConfig::data_seed));
    v.push_back({"dims",
                 [](const RunConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.dims.size(); ++i) s += (i ? "," : "") + std::to_string(c.dims[i]);
                   return s;
                 },
                 [](RunConfig& c, std::string_view s) { c.dims = to_list("dims", s); }});
    v.push_back({"activation", [](const RunConfig& c) { return std::string(to_string(c.activation)); },
                 [](RunConfig& c, std::string_view s) { c.activation = parse_activation(s); }});
    v.push_back(size_field("N", &RunConfig::N));
    v.push_back(size_field("n_test", &RunConfig::n_test));
    v.push_back(double_field("noise", &RunConfig::noise));
    v.push_back(double_field("delta_scale", &RunConfig::delta_scale));
    v.push_back(double_field("feature_decay", &RunConfig::feature_decay));
    v.push_back(size_field("seq_len", &RunConfig::seq_len));
    v.push_back(size_field("vocab", &RunConfig::vocab));
    v.push_back(size_field("d_model", &RunConfig::d_model));
    v.push_back(size_field("n_layers", &RunConfig::n_layers));
    v.push_back(size_field("n_heads", &RunConfig::n_heads));
    v.push_back(size_field("d_ff", &RunConfig::d_ff));
    v.push_back(string_field("out", &RunConfig::out));
    v.push_back(string_field("run_id", &RunConfig::run_id));
    v.push_back(bool_field("verbose_metrics", &RunConfig::verbose_metrics));
    v.push_back(size_field("checkpoint_every", &RunConfig::checkpoint_every));
    return v;
  }();
  return f;
}

const Field& find_field(std::string_view key) {
  for (const Field& f : fields())
    if (f.name == key) return f;
  throw ConfigError(std::string(key), "unknown configuration key");
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::XgbLora: return "xgblora";
    case Method::Lora: return "lora";
    case Method::FullFt: return "full-ft";
  }
  return "?";
}

Method parse_method(std::string_view s) {
  if (s == "xgblora") return Method::XgbLora;
  if (s == "lora") return Method::Lora;
  if (s == "full-ft") return Method::FullFt;
  throw ConfigError("method", "expected xgblora, lora or full-ft, got '" + std::string(s) + "'");
}

std::string_view to_string(TaskKind t) {
  switch (t) {
    case TaskKind::TeacherMatrix: return "teacher-matrix";
    case TaskKind::TeacherMlp: return "teacher-mlp";
    case TaskKind::ParitySeq: return "parity-seq";
    case TaskKind::CharClassify: return "char-classify";
  }
  return "?";
}

TaskKind parse_task(std::string_view s) {
  if (s == "teacher-matrix") return TaskKind::TeacherMatrix;
  if (s == "teacher-mlp") return TaskKind::TeacherMlp;
  if (s == "parity-seq") return TaskKind::ParitySeq;
  if (s == "char-classify") return TaskKind::CharClassify;
  throw ConfigError("task", "expected teacher-matrix, teacher-mlp, parity-seq or char-classify, got '" +
                                std::string(s) + "'");
}

BoostConfig RunConfig::boost_config() const {
  BoostConfig b;
  b.T = T;
  b.kappa = kappa;
  b.K = K;
  b.rank = r;
  b.layers_sampled = layers;
  b.lambda = lambda;
  b.lr = lr;
  b.batch_size = batch;
  b.seed = seed;
  b.policy = policy;
  b.include_embedding_output = embed_output;
  b.alpha = alpha;
  b.init_scale = init_scale;
  b.momentum = momentum;
  b.precision = precision;
  return b;
}

LoraConfig RunConfig::lora_config() const {
  LoraConfig l;
  l.rank = r;
  l.K = K;
  l.lambda = lambda;
  l.lr = lr;
  l.batch_size = batch;
  l.seed = seed;
  l.policy = policy;
  l.include_embedding_output = embed_output;
  l.alpha = alpha;
  l.init_scale = init_scale;
  l.momentum = momentum;
  l.precision = precision;
  return l;
}

FullFtConfig RunConfig::fullft_config() const { return FullFtConfig{K, lr, batch, momentum, precision}; }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const Field& f : fields()) k.push_back(f.name);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_field(key).set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) { return find_field(key).get(cfg); }

std::string serialize_config(const RunConfig& cfg) {
  std::string out = "# xgbl run config\n";
  for (const Field& f : fields()) out += f.name + "=" + f.get(cfg) + "\n";
  return out;
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(line), "line " + std::to_string(line_no) + " is not key=value");
    }
    set_config_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig load_config_file(const std::string& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

TaskBundle make_task(const RunConfig& cfg) {
  TaskBundle b;
  switch (cfg.task) {
    case TaskKind::TeacherMatrix:
    case TaskKind::TeacherMlp: {
      TeacherConfig tc;
      tc.kind = cfg.task == TaskKind::TeacherMatrix ? TeacherKind::Matrix : TeacherKind::Mlp;
      tc.dims = cfg.dims;
      tc.N = cfg.N;
      tc.n_test = cfg.n_test;
      tc.noise = cfg.noise;
      tc.delta_scale = cfg.delta_scale;
      tc.feature_decay = cfg.feature_decay;
      tc.activation = cfg.activation;
      tc.seed = cfg.data_seed;
      auto [train, teacher] = gen_teacher_dataset(tc);
      b.model = teacher.start;
      b.train = std::move(train);
      b.eval = teacher.test;
      b.teacher = std::move(teacher);
      break;
    }
    case TaskKind::ParitySeq:
    case TaskKind::CharClassify: {
      const SequenceTask st = cfg.task == TaskKind::ParitySeq ? SequenceTask::Parity : SequenceTask::Copy;
      b.train = gen_sequence_dataset(st, cfg.seq_len, cfg.N, cfg.data_seed, cfg.vocab);
      b.eval = b.train;
      TransformerShape ts;
      ts.vocab = cfg.vocab;
      ts.d_model = cfg.d_model;
      ts.n_layers = cfg.n_layers;
      ts.n_heads = cfg.n_heads;
      ts.d_ff = cfg.d_ff;
      ts.max_seq = cfg.seq_len;
      Rng rng = Rng(cfg.data_seed).split(99);
      b.model = build_transformer(ts, cfg.activation, rng);
      break;
    }
  }
  return b;
}

}  // namespace xgbl
