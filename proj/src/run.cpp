// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/run.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "xgbl/log.hpp"

namespace xgbl {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double mean_of(const std::vector<double>& v, std::size_t from = 0) {
  if (from >= v.size()) return std::nan("");
  double s = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) s += v[i];
  return s / static_cast<double>(v.size() - from);
}

class RowSink {
 public:
  RowSink(const std::string& path, bool append, RunResult& result) : result_(result) {
    if (append && fs::exists(path)) {
      out_.open(path, std::ios::app);
      if (!out_) throw Error("cannot append to '" + path + "'");
    } else {
      writer_.emplace(path);
    }
  }
  void write(const MetricsRow& row) {
    result_.metrics.push_back(row);
    if (writer_) {
      writer_->write(row);
      return;
    }
    // Same formatting as MetricsWriter, minus the header.
    out_ << row.run_id << ',' << row.t << ',' << row.step << ',' << format_number(row.loss) << ','
         << format_number(row.a_norm) << ',' << format_number(row.b_norm) << ',' << format_number(row.grad_norm)
         << ',' << format_number(row.wall_ms) << ',' << row.peak_update_bytes << '\n';
    out_.flush();
  }

 private:
  RunResult& result_;
  std::optional<MetricsWriter> writer_;
  std::ofstream out_;
};

void finish_summary(RunResult& res, const RunConfig& cfg, const TaskBundle& task, std::size_t trainable,
                    std::size_t peak_bytes, double wall_ms, std::size_t steps_done) {
  SummaryRow& s = res.summary;
  s.run_id = cfg.run_id;
  s.method = std::string(to_string(cfg.method));
  s.task = std::string(to_string(cfg.task));
  s.r = cfg.method == Method::FullFt ? 0 : cfg.r;
  s.K = cfg.K;
  s.final_loss = loss_eval(res.model, task.eval, nullptr, 0.0, cfg.precision);
  s.final_accuracy = res.model.output == OutputMap::SoftmaxCe ? accuracy(res.model, task.eval) : std::nan("");
  const ParamCount full = full_param_count(res.model);
  s.trainable = trainable;
  s.total = full.total;
  s.permille = 1000.0 * static_cast<double>(trainable) / static_cast<double>(full.total);
  s.peak_update_bytes = peak_bytes;
  s.s_per_step = steps_done ? wall_ms / 1000.0 / static_cast<double>(steps_done) : 0.0;
}

TrainerState finished_state(std::size_t steps, std::size_t boosters) {
  TrainerState s;
  s.global_step = steps;
  s.booster = boosters;
  return s;
}

}  // namespace

Checkpoint make_checkpoint(const RunConfig& cfg, const ModelSpec& model, const TrainerState& state) {
  Checkpoint ck;
  ck.precision = cfg.precision;
  ck.config_text = serialize_config(cfg);
  ck.model = model;
  ck.state = state;
  return ck;
}

RunResult run_training(const RunConfig& cfg_in, const RunOptions& opts) {
  RunConfig cfg = cfg_in;
  std::optional<Checkpoint> resume;
  if (!opts.resume_path.empty()) {
    resume = load_checkpoint(opts.resume_path);
    cfg = parse_config(resume->config_text);
    cfg.out = cfg_in.out;
    cfg.run_id = cfg_in.run_id;
    if (cfg.method != Method::XgbLora) throw ConfigError("resume", "only xgblora runs can be resumed");
  }
  // Validate before touching the output directory.
  {
    BoostConfig check = cfg.boost_config();
    if (cfg.method != Method::XgbLora) {
      check.T = 1;
      check.kappa = cfg.K;
    }
    resolve_schedule(check);
  }
  RunResult res;
  res.dir = (fs::path(cfg.out) / cfg.run_id).generic_string();
  fs::create_directories(res.dir);
  {
    std::ofstream out(fs::path(res.dir) / "config.txt", std::ios::trunc);
    out << serialize_config(cfg);
  }
  const std::string ck_path = (fs::path(res.dir) / "checkpoint.xgbl").generic_string();

  TaskBundle task = make_task(cfg);
  res.model = resume ? resume->model : task.model;
  RowSink sink((fs::path(res.dir) / "metrics.csv").generic_string(), resume.has_value(), res);
  const auto t0 = Clock::now();

  std::size_t trainable = 0, peak_bytes = 0, steps_done = 0;
  switch (cfg.method) {
    case Method::XgbLora: {
      BoostTrainer trainer(res.model, task.train, cfg.boost_config());
      if (resume) trainer.restore(resume->state);
      const std::size_t start_step = trainer.global_step();
      trainer.on_booster_end([&](const BoosterTrace& tr) {
        trainable = std::max(trainable, tr.trainable_params);
        const std::size_t bytes = update_bytes(tr.trainable_params, cfg.precision);
        peak_bytes = std::max(peak_bytes, bytes);
        if (cfg.verbose_metrics) return;
        sink.write({cfg.run_id, tr.t, trainer.global_step(), mean_of(tr.losses), tr.a_norm, tr.b_norm,
                    tr.grad_bound(), ms_since(t0), bytes});
      });
      while (!trainer.done()) {
        trainer.step();
        if (cfg.verbose_metrics) {
          // After a merge current() still holds the finished booster.
          const BoosterTrace& tr = trainer.current();
          const std::size_t bytes = update_bytes(tr.trainable_params, cfg.precision);
          peak_bytes = std::max(peak_bytes, bytes);
          trainable = std::max(trainable, tr.trainable_params);
          sink.write({cfg.run_id, tr.t, trainer.global_step(), tr.losses.back(), tr.a_norm, tr.b_norm,
                      tr.grad_norms.back(), ms_since(t0), bytes});
        }
        if (cfg.checkpoint_every && trainer.global_step() % cfg.checkpoint_every == 0) {
          save_checkpoint(ck_path, make_checkpoint(cfg, res.model, trainer.state()));
        }
        if (opts.stop_after && trainer.global_step() >= opts.stop_after) break;
      }
      steps_done = trainer.global_step() - start_step;
      save_checkpoint(ck_path, make_checkpoint(cfg, res.model, trainer.state()));
      res.finished = trainer.done();
      if (trainable == 0) trainable = trainer.current().trainable_params;
      if (peak_bytes == 0) peak_bytes = update_bytes(trainable, cfg.precision);
      break;
    }
    case Method::Lora: {
      if (opts.stop_after) warn("stop_after is ignored for lora runs");
      const BoosterTrace tr = lora_fit(res.model, task.train, cfg.lora_config());
      trainable = tr.trainable_params;
      peak_bytes = update_bytes(trainable, cfg.precision);
      const std::size_t every = cfg.verbose_metrics ? 1 : std::max<std::size_t>(cfg.kappa, 1);
      for (std::size_t i = 0; i < tr.losses.size(); i += every) {
        const std::size_t end = std::min(tr.losses.size(), i + every);
        double loss = 0.0, g = 0.0;
        for (std::size_t j = i; j < end; ++j) {
          loss += tr.losses[j];
          g = std::max(g, tr.grad_norms[j]);
        }
        const bool last = end == tr.losses.size();
        sink.write({cfg.run_id, 0, end, loss / static_cast<double>(end - i), last ? tr.a_norm : std::nan(""),
                    last ? tr.b_norm : std::nan(""), g, ms_since(t0), peak_bytes});
      }
      steps_done = tr.losses.size();
      save_checkpoint(ck_path, make_checkpoint(cfg, res.model, finished_state(steps_done, 1)));
      res.finished = true;
      break;
    }
    case Method::FullFt: {
      if (opts.stop_after) warn("stop_after is ignored for full-ft runs");
      Rng rng(cfg.seed);
      const FitTrace tr = full_finetune(res.model, task.train, cfg.fullft_config(), rng);
      trainable = full_param_count(res.model).total;
      peak_bytes = update_bytes(trainable, cfg.precision);
      const std::size_t every = cfg.verbose_metrics ? 1 : std::max<std::size_t>(cfg.kappa, 1);
      for (std::size_t i = 0; i < tr.losses.size(); i += every) {
        const std::size_t end = std::min(tr.losses.size(), i + every);
        sink.write({cfg.run_id, 0, end, mean_of(std::vector<double>(tr.losses.begin() + i, tr.losses.begin() + end)),
                    std::nan(""), std::nan(""), std::nan(""), ms_since(t0), peak_bytes});
      }
      steps_done = tr.losses.size();
      save_checkpoint(ck_path, make_checkpoint(cfg, res.model, finished_state(steps_done, 0)));
      res.finished = true;
      break;
    }
  }
  finish_summary(res, cfg, task, trainable, peak_bytes, ms_since(t0), steps_done);
  res.summary.kappa = cfg.method == Method::XgbLora ? cfg.kappa : cfg.K;
  res.summary.T = cfg.method == Method::XgbLora ? cfg.boost_config().T : 1;
  if (cfg.method == Method::XgbLora) {
    const Schedule sched = resolve_schedule(cfg.boost_config());
    res.summary.T = sched.steps.size();
    res.summary.K = sched.total_steps();
  }
  write_summary_csv((fs::path(res.dir) / "summary.csv").generic_string(), {res.summary});
  return res;
}

}  // namespace xgbl
