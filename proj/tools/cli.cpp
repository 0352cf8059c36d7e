// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "xgbl/classic_gb.hpp"
#include "xgbl/config.hpp"
#include "xgbl/cost_model.hpp"
#include "xgbl/experiments.hpp"
#include "xgbl/log.hpp"
#include "xgbl/report.hpp"
#include "xgbl/run.hpp"

namespace xgbl {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// One CLI option per config key. Bool keys take an optional value.
struct ConfigFlags {
  std::string config_path;
  std::map<std::string, CLI::Option*> options;
  std::map<std::string, std::vector<std::string>> values;

  void attach(CLI::App& app, bool seed_required) {
    app.add_option("--config", config_path, "key=value config file; flags override it")->check(CLI::ExistingFile);
    RunConfig defaults;
    for (const std::string& key : config_keys()) {
      std::string names = "--" + key;
      const std::string dashed = [&] {
        std::string d = key;
        for (char& c : d)
          if (c == '_') c = '-';
        return d;
      }();
      if (dashed != key) names += ",--" + dashed;
      CLI::Option* opt = app.add_option(names, values[key], "default: " + get_config_value(defaults, key));
      const std::string def = get_config_value(defaults, key);
      if (def == "true" || def == "false") opt->expected(0, 1);
      if (key == "seed" && seed_required) opt->required();
      options[key] = opt;
    }
  }

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      const auto& v = values.at(key);
      set_config_value(cfg, key, v.empty() ? std::string("true") : v.back());
    }
    return cfg;
  }
};

std::vector<std::size_t> parse_grid(const std::string& text, const char* field) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw ConfigError(field, "bad grid entry '" + cell + "'");
    }
  }
  if (out.empty()) throw ConfigError(field, "empty grid");
  return out;
}

void print_report(const ProbeReport& rep, std::ostream& out) {
  out << "probe " << rep.probe << "\n";
  for (const PointSummary& p : rep.summarize()) {
    out << " ";
    for (std::size_t i = 0; i < p.params.size(); ++i) out << " " << rep.param_names[i] << "=" << p.params[i];
    out << "  n=" << p.n;
    for (std::size_t i = 0; i < p.mean.size(); ++i) {
      out << "  " << rep.metric_names[i] << "=" << fmt("%.6g", p.mean[i]) << "+-" << fmt("%.3g", p.std[i]);
    }
    out << "\n";
  }
  for (const FitResult& f : rep.fits) {
    out << "  fit " << f.name << ": R2=" << fmt("%.4f", f.r2);
    for (std::size_t i = 0; i < f.coefs.size(); ++i) out << " " << f.features[i] << "=" << fmt("%.4g", f.coefs[i]);
    out << "\n";
  }
  for (const auto& [k, v] : rep.constants) out << "  " << k << " = " << fmt("%.6g", v) << "\n";
  for (const ProbeCheck& c : rep.checks) {
    out << "  [" << (c.passed ? "ok" : "FAILED") << "] " << c.name << " (" << c.detail << ")\n";
  }
}

void save_report(const ProbeReport& rep, const std::string& dir, const std::string& stem) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream(fs::path(dir) / (stem + ".csv")) << rep.to_csv();
  std::ofstream(fs::path(dir) / (stem + ".json")) << rep.summary_json() << "\n";
}

void print_summary(const SummaryRow& s, std::ostream& out) {
  out << s.run_id << ": method=" << s.method << " task=" << s.task << " r=" << s.r << " kappa=" << s.kappa
      << " T=" << s.T << " K=" << s.K << " final_loss=" << format_number(s.final_loss)
      << " final_acc=" << format_number(s.final_accuracy) << " trainable=" << s.trainable << " ("
      << fmt("%.3f", s.permille) << " permille) peak_update_bytes=" << s.peak_update_bytes
      << " s/step=" << fmt("%.3g", s.s_per_step) << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"xgblora: boosted rank-one adapter experiments at desk scale", "xgblora"};
  app.require_subcommand(1);

  // train
  CLI::App* train = app.add_subcommand("train", "Fine-tune with xgblora, lora or full-ft");
  ConfigFlags train_flags;
  train_flags.attach(*train, true);
  std::string resume;
  std::size_t stop_after = 0;
  train->add_option("--resume", resume, "Continue an xgblora run from its checkpoint")->check(CLI::ExistingFile);
  train->add_option("--stop-after", stop_after, "Stop after this many global steps (checkpoint kept)");

  // gb-demo
  CLI::App* gb = app.add_subcommand("gb-demo", "Classic gradient boosting on 1-D regression");
  std::size_t gb_M = 50, gb_n = 256;
  std::uint64_t gb_seed = 0;
  std::string gb_weak = "linear", gb_rate = "line-search";
  double gb_fixed = 0.1;
  gb->add_option("--M", gb_M, "Boosting rounds");
  gb->add_option("--n", gb_n, "Samples");
  gb->add_option("--seed", gb_seed, "Data seed");
  gb->add_option("--weak", gb_weak, "linear | stump")->check(CLI::IsMember({"linear", "stump"}));
  gb->add_option("--rate", gb_rate, "line-search | fixed")->check(CLI::IsMember({"line-search", "fixed"}));
  gb->add_option("--fixed-rate", gb_fixed, "Step size when --rate fixed");

  // probe
  CLI::App* probe = app.add_subcommand("probe", "Theory probes; exit 3 when a check fails");
  probe->require_subcommand(1);
  std::uint64_t probe_seed = 0;
  std::size_t probe_seeds = 5, probe_runs = 9, probe_pairs = 64;
  std::string probe_out;
  std::map<std::string, CLI::App*> probes;
  for (const char* name : {"lemma1", "lemma2", "lemma3", "theorem1", "theorem2"}) {
    CLI::App* p = probe->add_subcommand(name);
    p->add_option("--seed", probe_seed, "Base seed")->required();
    p->add_option("--out", probe_out, "Write <probe>.csv and <probe>.json here");
    probes[name] = p;
  }
  probes["lemma1"]->description("Rank-r gradient approximation error vs r and M");
  probes["lemma2"]->description("Adapter norm bound ||A||_F <= eta kappa G");
  probes["lemma3"]->description("Gradient Lipschitz constant on a quadratic");
  probes["theorem1"]->description("Optimality gap vs boosting rounds");
  probes["theorem2"]->description("Rank vs rounds at fixed step budget");
  for (const char* name : {"lemma1", "theorem1", "theorem2"}) {
    probes[name]->add_option("--seeds", probe_seeds, "Replicates per grid point");
  }
  probes["lemma2"]->add_option("--runs", probe_runs, "Number of xgblora fits");
  probes["lemma3"]->add_option("--pairs", probe_pairs, "Sampled weight pairs");

  // sweep
  CLI::App* sweep = app.add_subcommand("sweep", "Rank x iterations grid of train runs");
  ConfigFlags sweep_flags;
  sweep_flags.attach(*sweep, false);
  std::string r_grid, T_grid, kappa_grid;
  std::size_t sweep_seeds = 1;
  sweep->add_option("--r-grid", r_grid, "Comma-separated ranks (default: --r)");
  sweep->add_option("--T-grid", T_grid, "Comma-separated boosting rounds; kappa = K / T");
  sweep->add_option("--kappa-grid", kappa_grid, "Comma-separated steps per round")->excludes("--T-grid");
  sweep->add_option("--seeds", sweep_seeds, "Replicates per grid point (seed, seed+1, ...)");

  // cost-model
  CLI::App* cost = app.add_subcommand("cost-model", "Analytic training-cost totals");
  std::string preset = "all";
  double c_L = 32, c_K = 1000, c_alpha = 1, c_beta = 0, c_R = 8;
  cost->add_option("--preset", preset, "lora | xgblora | xgblora-fullrank | all")
      ->check(CLI::IsMember({"lora", "xgblora", "xgblora-fullrank", "all"}));
  cost->add_option("--L", c_L, "Model layers");
  cost->add_option("--K", c_K, "Total steps");
  cost->add_option("--alpha", c_alpha, "Per-layer cost at full rank");
  cost->add_option("--beta", c_beta, "Fixed cost");
  cost->add_option("--R", c_R, "Reference rank");

  // report
  CLI::App* report = app.add_subcommand("report", "Aggregate run CSVs into markdown and SVG");
  std::string csv_dir, report_out;
  report->add_option("--csv-dir", csv_dir, "Directory searched for *summary.csv and *metrics.csv")->required();
  report->add_option("--out", report_out, "Output directory (default: <csv-dir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().back();
    err << sub->help();
    return kExitUsage;
  }

  auto warnings = set_warning_handler([&err](std::string_view msg) { err << "warning: " << msg << "\n"; });
  struct Restore {
    WarningHandler h;
    ~Restore() { set_warning_handler(std::move(h)); }
  } restore{std::move(warnings)};

  try {
    if (train->parsed()) {
      const RunConfig cfg = train_flags.resolve();
      RunOptions opts;
      opts.resume_path = resume;
      opts.stop_after = stop_after;
      const RunResult res = run_training(cfg, opts);
      print_summary(res.summary, out);
      out << "wrote " << res.dir << (res.finished ? "" : " (stopped early; resume with --resume)") << "\n";
      return kExitOk;
    }

    if (gb->parsed()) {
      Rng rng(gb_seed);
      const Regression1d d = make_regression_1d(gb_n, rng);
      ClassicGbConfig c;
      c.M = gb_M;
      c.weak = gb_weak == "stump" ? WeakKind::Stump : WeakKind::Linear;
      c.rate = gb_rate == "fixed" ? RatePolicy::Fixed : RatePolicy::LineSearch;
      c.fixed_rate = gb_fixed;
      const ClassicGbModel m = classic_gb_fit(d.x, d.y, c);
      out << "round,alpha,train_mse\n0,," << format_number(m.train_mse[0]) << "\n";
      for (std::size_t i = 0; i < m.size(); ++i) {
        out << i + 1 << "," << format_number(m.rates[i]) << "," << format_number(m.train_mse[i + 1]) << "\n";
      }
      out << "final/initial mse = " << fmt("%.4g", m.train_mse.back() / m.train_mse.front()) << "\n";
      return kExitOk;
    }

    if (probe->parsed()) {
      std::vector<std::pair<std::string, ProbeReport>> reps;
      if (probes["lemma1"]->parsed()) {
        auto e = lemma1_experiment(probe_seed, probe_seeds);
        reps.emplace_back("lemma1_rank", std::move(e.rank_sweep));
        reps.emplace_back("lemma1_batches", std::move(e.batch_sweep));
      } else if (probes["lemma2"]->parsed()) {
        reps.emplace_back("lemma2", lemma2_experiment(probe_seed, probe_runs));
      } else if (probes["lemma3"]->parsed()) {
        reps.emplace_back("lemma3", lemma3_experiment(probe_seed, probe_pairs));
      } else if (probes["theorem1"]->parsed()) {
        reps.emplace_back("theorem1", theorem1_experiment(probe_seed, probe_seeds));
      } else {
        reps.emplace_back("theorem2", theorem2_experiment(probe_seed, probe_seeds));
      }
      bool ok = true;
      for (const auto& [stem, rep] : reps) {
        print_report(rep, out);
        save_report(rep, probe_out, stem);
        ok = ok && rep.all_passed();
      }
      out << (ok ? "all checks passed" : "some checks FAILED") << "\n";
      return ok ? kExitOk : kExitProbeFailed;
    }

    if (sweep->parsed()) {
      const RunConfig base = sweep_flags.resolve();
      const auto ranks = r_grid.empty() ? std::vector<std::size_t>{base.r} : parse_grid(r_grid, "r-grid");
      std::vector<std::pair<std::size_t, std::size_t>> sched;  // (T, kappa)
      if (!T_grid.empty()) {
        for (std::size_t T : parse_grid(T_grid, "T-grid")) {
          if (T == 0 || base.K % T != 0) throw ConfigError("T-grid", "T must divide K=" + std::to_string(base.K));
          sched.emplace_back(T, base.K / T);
        }
      } else if (!kappa_grid.empty()) {
        for (std::size_t k : parse_grid(kappa_grid, "kappa-grid")) sched.emplace_back(0, k);
      } else {
        sched.emplace_back(base.T, base.kappa);
      }
      for (std::size_t r : ranks) {
        for (const auto& [T, kappa] : sched) {
          for (std::size_t s = 0; s < sweep_seeds; ++s) {
            RunConfig cfg = base;
            cfg.r = r;
            cfg.T = T;
            cfg.kappa = kappa;
            cfg.seed = base.seed + s;
            cfg.run_id = base.run_id + "-r" + std::to_string(r) + "-kappa" + std::to_string(kappa) + "-s" +
                         std::to_string(cfg.seed);
            const RunResult res = run_training(cfg);
            print_summary(res.summary, out);
          }
        }
      }
      return kExitOk;
    }

    if (cost->parsed()) {
      std::vector<std::string> names;
      if (preset == "all") {
        names = {"lora", "xgblora-fullrank", "xgblora"};
      } else {
        names = {preset};
      }
      out << "L=" << c_L << " K=" << c_K << " alpha=" << c_alpha << " beta=" << c_beta << " R=" << c_R << "\n";
      for (const std::string& n : names) {
        const CostPreset p = cost_preset(n, c_L, c_K, c_alpha, c_beta, c_R);
        const CostEstimate e = cost_model_estimate(p.model, p.method);
        out << n << ": " << p.formula << " = " << fmt("%.1f", e.total) << "  (per learner "
            << fmt("%.4g", e.per_learner) << ", " << fmt("%.4g", e.steps_per_iter) << " steps x "
            << fmt("%.4g", e.iters) << " iters)\n";
      }
      return kExitOk;
    }

    if (report->parsed()) {
      const std::string dir = report_out.empty() ? (fs::path(csv_dir) / "report").generic_string() : report_out;
      const Report rep = emit_report(csv_dir, dir);
      out << "wrote " << dir << "/report.md and 3 SVG plots\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitUsage;
}

}  // namespace xgbl
