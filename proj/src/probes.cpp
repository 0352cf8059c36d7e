// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/probes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

#include "xgbl/forward.hpp"
#include "xgbl/linalg.hpp"

namespace xgbl {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t replicate_seed(std::uint64_t base, std::size_t s) { return Rng(base).split(s).next_u64(); }

double sq(double v) { return v * v; }

// Seed-mean of `metric` along one grid axis with the others fixed.
struct Series {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std;
};

Series series(const ProbeReport& rep, std::size_t axis, const std::vector<double>& fixed, std::size_t metric) {
  Series s;
  for (const PointSummary& p : rep.summarize()) {
    bool match = true;
    for (std::size_t i = 0; i < p.params.size(); ++i)
      if (i != axis && p.params[i] != fixed[i]) match = false;
    if (!match) continue;
    s.x.push_back(p.params[axis]);
    s.mean.push_back(p.mean[metric]);
    s.std.push_back(p.std[metric]);
  }
  std::vector<std::size_t> order(s.x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
  Series sorted;
  for (std::size_t i : order) {
    sorted.x.push_back(s.x[i]);
    sorted.mean.push_back(s.mean[i]);
    sorted.std.push_back(s.std[i]);
  }
  return sorted;
}

// Adds one check per distinct setting of the other axes: the seed-mean of
// `metric` must not increase (strict: must decrease) along `axis`.
void add_monotone_checks(ProbeReport& rep, std::size_t axis, std::size_t metric, bool strict, const std::string& label) {
  std::vector<std::vector<double>> seen;
  for (const PointSummary& p : rep.summarize()) {
    std::vector<double> key = p.params;
    key[axis] = 0.0;
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    const Series s = series(rep, axis, p.params, metric);
    if (s.x.size() < 2) continue;
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i > 0 && (strict ? !(s.mean[i] < s.mean[i - 1]) : !(s.mean[i] <= s.mean[i - 1]))) ok = false;
      detail << (i ? "; " : "") << rep.param_names[axis] << "=" << s.x[i] << ": " << fmt(s.mean[i]) << " +- "
             << fmt(s.std[i]);
    }
    std::string name = label;
    for (std::size_t i = 0; i < key.size(); ++i)
      if (i != axis) name += " " + rep.param_names[i] + "=" + fmt(p.params[i]);
    rep.checks.push_back({name, ok, detail.str()});
  }
}

std::vector<std::vector<double>> design(const std::vector<PointSummary>& pts,
                                        const std::function<std::vector<double>(const std::vector<double>&)>& f) {
  std::vector<std::vector<double>> x;
  for (const PointSummary& p : pts) x.push_back(f(p.params));
  return x;
}

std::vector<double> means(const std::vector<PointSummary>& pts, std::size_t metric) {
  std::vector<double> y;
  for (const PointSummary& p : pts) y.push_back(p.mean[metric]);
  return y;
}

void require_single_linear(const ModelSpec& model, const char* who) {
  if (model.kind != ModelKind::Mlp || model.num_layers != 1 || model.output != OutputMap::IdentityMse) {
    throw ContractError(std::string(who) + ": needs a single linear layer with squared loss (a convex task)");
  }
}

}  // namespace

std::size_t ProbeReport::metric_index(const std::string& name) const {
  for (std::size_t i = 0; i < metric_names.size(); ++i)
    if (metric_names[i] == name) return i;
  throw ContractError("probe report has no metric '" + name + "'");
}

std::vector<PointSummary> ProbeReport::summarize() const {
  std::vector<PointSummary> pts;
  std::vector<std::vector<const ProbeRow*>> groups;
  for (const ProbeRow& row : rows) {
    auto it = std::find_if(pts.begin(), pts.end(), [&](const PointSummary& p) { return p.params == row.params; });
    if (it == pts.end()) {
      pts.push_back(PointSummary{row.params, 0, {}, {}});
      groups.emplace_back();
      it = pts.end() - 1;
    }
    groups[static_cast<std::size_t>(it - pts.begin())].push_back(&row);
  }
  for (std::size_t g = 0; g < pts.size(); ++g) {
    PointSummary& p = pts[g];
    p.n = groups[g].size();
    p.mean.assign(metric_names.size(), 0.0);
    p.std.assign(metric_names.size(), 0.0);
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      double s = 0.0;
      for (const ProbeRow* r : groups[g]) s += r->metrics[m];
      p.mean[m] = s / static_cast<double>(p.n);
      if (p.n > 1) {
        double v = 0.0;
        for (const ProbeRow* r : groups[g]) v += sq(r->metrics[m] - p.mean[m]);
        p.std[m] = std::sqrt(v / static_cast<double>(p.n - 1));
      }
    }
  }
  return pts;
}

std::optional<PointSummary> ProbeReport::point(const std::vector<double>& params) const {
  for (PointSummary& p : summarize())
    if (p.params == params) return p;
  return std::nullopt;
}

bool ProbeReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ProbeCheck& c) { return c.passed; });
}

std::string ProbeReport::to_csv() const {
  std::ostringstream out;
  out << "# xgbl-probe-csv v1 probe=" << probe << "\n";
  bool first = true;
  for (const auto& n : param_names) {
    out << (first ? "" : ",") << n;
    first = false;
  }
  out << (first ? "" : ",") << "seed";
  for (const auto& n : metric_names) out << "," << n;
  out << "\n";
  for (const ProbeRow& r : rows) {
    for (double v : r.params) out << fmt(v) << ",";
    out << r.seed;
    for (double v : r.metrics) out << "," << fmt(v);
    out << "\n";
  }
  return out.str();
}

std::string ProbeReport::summary_json() const {
  nlohmann::ordered_json j;
  j["probe"] = probe;
  j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : constants) j["constants"][k] = v;
  j["fits"] = nlohmann::ordered_json::array();
  for (const FitResult& f : fits) {
    nlohmann::ordered_json jf;
    jf["name"] = f.name;
    jf["features"] = f.features;
    jf["coefs"] = f.coefs;
    jf["r2"] = f.r2;
    jf["rss"] = f.rss;
    j["fits"].push_back(jf);
  }
  j["checks"] = nlohmann::ordered_json::array();
  for (const ProbeCheck& c : checks) j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["points"] = nlohmann::ordered_json::array();
  for (const PointSummary& p : summarize()) {
    nlohmann::ordered_json jp;
    for (std::size_t i = 0; i < param_names.size(); ++i) jp[param_names[i]] = p.params[i];
    jp["n"] = p.n;
    for (std::size_t m = 0; m < metric_names.size(); ++m) {
      jp[metric_names[m] + "_mean"] = p.mean[m];
      jp[metric_names[m] + "_std"] = p.std[m];
    }
    j["points"].push_back(jp);
  }
  j["passed"] = all_passed();
  return j.dump(2) + "\n";
}

FitResult fit_nonneg(std::string name, std::vector<std::string> features, const std::vector<std::vector<double>>& x,
                     const std::vector<double>& y) {
  require(!x.empty() && x.size() == y.size(), "fit_nonneg: need one feature row per observation");
  const std::size_t p = features.size();
  Tensor a({x.size(), p});
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i].size() == p, "fit_nonneg: feature row width differs from feature names");
    for (std::size_t j = 0; j < p; ++j) a.at(i, j) = x[i][j];
  }
  FitResult f{std::move(name), std::move(features), nnls(a, y), 0.0, 0.0};
  std::vector<double> yhat(y.size(), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) yhat[i] += a.at(i, j) * f.coefs[j];
    f.rss += sq(y[i] - yhat[i]);
  }
  f.r2 = r_squared(y, yhat);
  return f;
}

std::map<WeightId, Tensor> full_gradient(const ModelSpec& model, const Dataset& data, const AdapterSet* adapters) {
  Tape tape(Precision::F64);
  const BoundModel bound = bind_model(tape, model, adapters, GradTarget::Weights);
  const Batch batch = full_batch(data);
  const Var loss = task_loss_graph(model, forward_graph(tape, model, bound, batch.inputs), batch);
  tape.backward(loss);
  std::map<WeightId, Tensor> out;
  for (const auto& [id, v] : bound.effective) out.emplace(id, tape.grad(v));
  return out;
}

Tensor orthonormal_frame(Rng& rng, std::size_t d, std::size_t r) {
  require(r >= 1 && r <= d, "orthonormal_frame: need 1 <= r <= d");
  std::vector<std::vector<double>> cols;
  while (cols.size() < r) {
    std::vector<double> v(d);
    for (double& e : v) e = rng.gaussian();
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) {
        double p = 0.0;
        for (std::size_t i = 0; i < d; ++i) p += v[i] * c[i];
        for (std::size_t i = 0; i < d; ++i) v[i] -= p * c[i];
      }
    double n = 0.0;
    for (double e : v) n += e * e;
    n = std::sqrt(n);
    if (n < 1e-8) continue;
    for (double& e : v) e /= n;
    cols.push_back(std::move(v));
  }
  Tensor f({d, r});
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < d; ++i) f.at(i, j) = cols[j][i];
  return f;
}

ProbeReport gradient_approx_probe(const ModelSpec& model, const Dataset& data, const GradApproxConfig& cfg) {
  require(cfg.lr > 0.0, "gradient_approx_probe: lr must be positive");
  require(cfg.seeds >= 1, "gradient_approx_probe: need at least one seed");
  const std::vector<WeightId> targets = list_adaptable_weights(model, cfg.adapt);
  require(!targets.empty(), "gradient_approx_probe: model has no adaptable weights");
  for (std::size_t r : cfg.r_grid)
    for (const WeightId& id : targets) {
      const Tensor& w = model.weight(id);
      require(r >= 1 && r <= std::min(w.rows(), w.cols()),
              "gradient_approx_probe: r=" + std::to_string(r) + " exceeds the rank of " + to_string(id));
    }

  ProbeReport rep;
  rep.probe = "lemma1";
  rep.param_names = {"r", "M"};
  rep.metric_names = {"error", "floor", "grad_norm", "rel_error"};
  const BoosterOptions opts{0.0, cfg.lr, cfg.batch_size, 0.0, Precision::F64};
  for (std::size_t r : cfg.r_grid) {
    for (std::size_t M : cfg.M_grid) {
      for (std::size_t s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = replicate_seed(cfg.seed, s);
        const Rng root(seed);
        AdapterSet set(0);
        for (std::size_t k = 0; k < targets.size(); ++k) {
          const Tensor& w = model.weight(targets[k]);
          Rng frame_rng = root.split(100 + k);
          set.add(LoraPair{targets[k], orthonormal_frame(frame_rng, w.rows(), r), Tensor({r, w.cols()}, 0.0), r, 1.0});
        }
        Rng batch_rng = root.split(1);
        train_booster(model, set, data, M, opts, batch_rng);

        const auto grads = full_gradient(model, data, &set);
        double err2 = 0.0, floor2 = 0.0, g2 = 0.0;
        for (const auto& [id, pair] : set.pairs()) {
          const Tensor& g = grads.at(id);
          Tensor approx = kernels::scale(kernels::matmul(pair.a, pair.b), -pair.alpha / (cfg.lr * static_cast<double>(M)));
          const Tensor diff = kernels::sub(g, approx);
          err2 += kernels::dot(diff, diff);
          g2 += kernels::dot(g, g);
          const Svd svd = svd_jacobi(g);
          floor2 += sq(eckart_young_floor(svd.s, r));
        }
        const double err = std::sqrt(err2), gn = std::sqrt(g2);
        rep.rows.push_back({{static_cast<double>(r), static_cast<double>(M)},
                            seed,
                            {err, std::sqrt(floor2), gn, gn > 0.0 ? err / gn : 0.0}});
      }
    }
  }

  std::size_t violations = 0;
  for (const ProbeRow& row : rep.rows)
    if (row.metrics[1] > row.metrics[0] * (1.0 + 1e-12) + 1e-14 * row.metrics[2]) ++violations;
  rep.checks.push_back({"svd floor <= measured error", violations == 0,
                        std::to_string(violations) + " of " + std::to_string(rep.rows.size()) + " rows violate"});
  add_monotone_checks(rep, 0, 0, false, "error non-increasing in r");
  add_monotone_checks(rep, 1, 0, false, "error non-increasing in M");

  const auto pts = rep.summarize();
  FitResult fit = fit_nonneg("C1/sqrt(r) + C2/sqrt(M)", {"1/sqrt(r)", "1/sqrt(M)"},
                             design(pts, [](const std::vector<double>& p) {
                               return std::vector<double>{1.0 / std::sqrt(p[0]), 1.0 / std::sqrt(p[1])};
                             }),
                             means(pts, 0));
  rep.constants["C1"] = fit.coefs[0];
  rep.constants["C2"] = fit.coefs[1];
  rep.constants["fit_r2"] = fit.r2;
  rep.fits.push_back(std::move(fit));
  return rep;
}

namespace {

void append_update_rows(ProbeReport& rep, const std::vector<BoosterTrace>& traces, const UpdateNormOptions& opts,
                        const std::vector<double>& prefix, std::uint64_t seed, std::size_t& violations,
                        std::size_t& one_step, std::size_t& one_step_violations) {
  for (const BoosterTrace& tr : traces) {
    const double G = tr.grad_bound();
    const double bound = opts.lr * static_cast<double>(tr.steps) * G;
    const double ra = bound > 0.0 ? tr.a_update_norm / bound : 0.0;
    const double rb = bound > 0.0 ? tr.b_update_norm / bound : 0.0;
    const double allow = bound * (1.0 + opts.slack);
    const bool bad = tr.a_update_norm > allow || tr.b_update_norm > allow;
    if (bad) ++violations;
    std::vector<double> params = prefix;
    params.push_back(static_cast<double>(tr.t));
    params.push_back(static_cast<double>(tr.steps));
    rep.rows.push_back({params, seed, {tr.a_update_norm, tr.b_update_norm, G, bound, ra, rb, bad ? 1.0 : 0.0}});
    rep.constants["G"] = std::max(rep.constants["G"], G);

    if (tr.steps == 1 && !tr.grad_norms.empty()) {
      // grad_A = alpha * grad_W B^T + 2 lambda A and symmetrically for B.
      ++one_step;
      const double gw = tr.grad_norms.front();
      const double a_lim = opts.lr * (opts.alpha * gw * tr.b_init_norm + 2.0 * opts.lambda * tr.a_init_norm);
      const double b_lim = opts.lr * (opts.alpha * gw * tr.a_init_norm + 2.0 * opts.lambda * tr.b_init_norm);
      if (tr.a_update_norm > a_lim * (1.0 + opts.slack) + 1e-300 ||
          tr.b_update_norm > b_lim * (1.0 + opts.slack) + 1e-300) {
        ++one_step_violations;
      }
    }
  }
}

ProbeReport update_report_shell() {
  ProbeReport rep;
  rep.probe = "lemma2";
  rep.metric_names = {"a_update_norm", "b_update_norm", "G", "bound", "ratio_a", "ratio_b", "violation"};
  rep.constants["G"] = 0.0;
  return rep;
}

void finish_update_checks(ProbeReport& rep, std::size_t violations, std::size_t one_step, std::size_t one_step_bad) {
  rep.checks.push_back({"accumulated update <= eta * kappa * G", violations == 0,
                        std::to_string(violations) + " of " + std::to_string(rep.rows.size()) + " boosters violate"});
  if (one_step > 0) {
    rep.checks.push_back({"single-step recursion base", one_step_bad == 0,
                          std::to_string(one_step_bad) + " of " + std::to_string(one_step) + " boosters violate"});
  }
  double worst = 0.0;
  for (const ProbeRow& r : rep.rows) worst = std::max({worst, r.metrics[4], r.metrics[5]});
  rep.constants["max_ratio"] = worst;
  rep.constants["boosters"] = static_cast<double>(rep.rows.size());
}

}  // namespace

ProbeReport update_norm_probe(const std::vector<BoosterTrace>& traces, const UpdateNormOptions& opts) {
  ProbeReport rep = update_report_shell();
  rep.param_names = {"t", "steps"};
  std::size_t violations = 0, one_step = 0, one_step_bad = 0;
  append_update_rows(rep, traces, opts, {}, 0, violations, one_step, one_step_bad);
  finish_update_checks(rep, violations, one_step, one_step_bad);
  return rep;
}

ProbeReport update_norm_suite(const ModelSpec& start, const Dataset& data, const UpdateNormSuite& suite) {
  require(!suite.r_grid.empty() && !suite.kappa_grid.empty(), "update_norm_suite: empty grid");
  ProbeReport rep = update_report_shell();
  rep.param_names = {"run", "r", "kappa", "t", "steps"};
  const UpdateNormOptions opts{suite.base.lr, suite.base.lambda, 1e-9, suite.base.alpha};
  std::size_t violations = 0, one_step = 0, one_step_bad = 0;
  for (std::size_t run = 0; run < suite.runs; ++run) {
    BoostConfig cfg = suite.base;
    cfg.rank = suite.r_grid[run % suite.r_grid.size()];
    cfg.kappa = suite.kappa_grid[(run / suite.r_grid.size()) % suite.kappa_grid.size()];
    cfg.T = suite.T;
    cfg.K = 0;
    cfg.seed = replicate_seed(suite.base.seed, run);
    ModelSpec model = start;
    const auto traces = xgblora_fit(model, data, cfg);
    append_update_rows(rep, traces, opts,
                       {static_cast<double>(run), static_cast<double>(cfg.rank), static_cast<double>(cfg.kappa)},
                       cfg.seed, violations, one_step, one_step_bad);
  }
  finish_update_checks(rep, violations, one_step, one_step_bad);
  return rep;
}

LipschitzEstimate lipschitz_probe(const ModelSpec& model, const Dataset& data, const LipschitzConfig& cfg, Rng& rng) {
  require(cfg.radius > 0.0, "lipschitz_probe: radius must be positive");
  require(cfg.chain_length >= 1, "lipschitz_probe: chain length must be positive");
  std::vector<WeightId> ids;
  std::size_t dim = 0;
  for (const auto& [id, w] : model.weights) {
    ids.push_back(id);
    dim += w.numel();
  }
  auto random_unit = [&] {
    std::vector<double> v(dim);
    double n = 0.0;
    for (double& e : v) {
      e = rng.gaussian();
      n += e * e;
    }
    n = std::sqrt(n);
    for (double& e : v) e /= n;
    return v;
  };
  auto displaced = [&](const ModelSpec& base, const std::vector<double>& dir, double step) {
    ModelSpec m = base;
    std::size_t off = 0;
    for (const WeightId& id : ids) {
      Tensor& w = m.weight(id);
      for (std::size_t i = 0; i < w.numel(); ++i) w[i] += step * dir[off + i];
      off += w.numel();
    }
    return m;
  };
  auto flat_grad = [&](const ModelSpec& m) {
    const auto g = full_gradient(m, data);
    std::vector<double> out;
    out.reserve(dim);
    for (const WeightId& id : ids)
      for (double v : g.at(id).data()) out.push_back(v);
    return out;
  };
  auto flat_diff_norm = [&](const ModelSpec& a, const ModelSpec& b) {
    double s = 0.0;
    for (const WeightId& id : ids) {
      const Tensor d = kernels::sub(a.weight(id), b.weight(id));
      s += kernels::dot(d, d);
    }
    return std::sqrt(s);
  };

  LipschitzEstimate est;
  ModelSpec w1 = model;
  std::vector<double> g1, dir;
  for (std::size_t pair = 0; pair < cfg.n_pairs; ++pair) {
    if (pair % cfg.chain_length == 0) {
      w1 = displaced(model, random_unit(), cfg.radius * rng.uniform());
      g1 = flat_grad(w1);
      dir = random_unit();
    }
    const ModelSpec w2 = displaced(w1, dir, cfg.radius);
    const double dw = flat_diff_norm(w1, w2);
    const std::vector<double> g2 = flat_grad(w2);
    std::vector<double> dg(dim);
    double dgn = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      dg[i] = g2[i] - g1[i];
      dgn += dg[i] * dg[i];
    }
    dgn = std::sqrt(dgn);
    if (dw == 0.0) {
      ++est.skipped;
      dir = random_unit();
      continue;
    }
    const double ratio = dgn / dw;
    est.ratios.push_back(ratio);
    if (ratio > est.L_prime || est.running_max.empty()) {
      est.L_prime = std::max(est.L_prime, ratio);
      est.best_pair = pair;
    }
    est.running_max.push_back(est.L_prime);
    if (dgn > 0.0) {
      for (std::size_t i = 0; i < dim; ++i) dir[i] = dg[i] / dgn;
    } else {
      dir = random_unit();
    }
  }
  return est;
}

QuadraticOptimum quadratic_optimum(const ModelSpec& model, const Dataset& data) {
  require_single_linear(model, "quadratic_optimum");
  data.validate();
  const Tensor& x = data.inputs;
  const std::size_t n = x.rows(), d = x.cols();
  require(n >= d, "quadratic_optimum: need N >= d_in for a strongly convex loss");
  const Tensor y = data.targets.reshaped({n, data.targets.numel() / n});
  const Tensor xt = kernels::transpose(x);
  const Tensor gram = kernels::matmul(xt, x);
  QuadraticOptimum q;
  q.optimum = model;
  q.optimum.weight(WeightId{1, MatrixRole::MlpDense}) = kernels::transpose(solve_spd(gram, kernels::matmul(xt, y)));
  q.loss = loss_eval(q.optimum, data, nullptr, 0.0);
  Rng rng(0x9e37ULL);
  const EigenRange er = extremal_eigenvalues(kernels::scale(gram, 1.0 / static_cast<double>(n)), rng);
  q.beta = er.max;
  q.mu = er.min;
  return q;
}

ProbeReport convergence_sweep(const ModelSpec& start, const Dataset& data, const ConvergenceConfig& cfg) {
  require_single_linear(start, "convergence_sweep");
  const QuadraticOptimum opt = quadratic_optimum(start, data);
  ProbeReport rep;
  rep.probe = "theorem1";
  rep.param_names = {"T", "r"};
  rep.metric_names = {"gap", "loss"};
  rep.constants["L_star"] = opt.loss;
  rep.constants["beta"] = opt.beta;
  rep.constants["mu"] = opt.mu;
  rep.constants["kappa"] = static_cast<double>(cfg.kappa);
  for (std::size_t T : cfg.T_grid) {
    for (std::size_t r : cfg.r_grid) {
      for (std::size_t s = 0; s < cfg.seeds; ++s) {
        BoostConfig bc;
        bc.T = T;
        bc.kappa = cfg.kappa;
        bc.rank = r;
        bc.layers_sampled = 1;
        bc.lr = cfg.lr;
        bc.batch_size = cfg.batch_size;
        bc.init_scale = cfg.init_scale;
        bc.seed = replicate_seed(cfg.seed, s);
        ModelSpec model = start;
        xgblora_fit(model, data, bc);
        const double loss = loss_eval(model, data, nullptr, 0.0);
        rep.rows.push_back({{static_cast<double>(T), static_cast<double>(r)}, bc.seed, {loss - opt.loss, loss}});
      }
    }
  }
  add_monotone_checks(rep, 0, 0, true, "gap strictly decreasing in T");
  add_monotone_checks(rep, 1, 0, false, "gap non-increasing in r");

  const auto pts = rep.summarize();
  const double M = static_cast<double>(cfg.kappa), N = static_cast<double>(data.size());
  FitResult main = fit_nonneg("C3/sqrt(T) + C4/(M sqrt(T)) + C5/r", {"1/sqrt(T)", "1/(M sqrt(T))", "1/r"},
                              design(pts,
                                     [&](const std::vector<double>& p) {
                                       const double st = std::sqrt(p[0]);
                                       return std::vector<double>{1.0 / st, 1.0 / (M * st), 1.0 / p[1]};
                                     }),
                              means(pts, 0));
  FitResult alt = fit_nonneg("C3/sqrt(T) + C4/(N T) + C5/r", {"1/sqrt(T)", "1/(N T)", "1/r"},
                             design(pts,
                                    [&](const std::vector<double>& p) {
                                      return std::vector<double>{1.0 / std::sqrt(p[0]), 1.0 / (N * p[0]), 1.0 / p[1]};
                                    }),
                             means(pts, 0));
  rep.constants["C3"] = main.coefs[0];
  rep.constants["C4"] = main.coefs[1];
  rep.constants["C5"] = main.coefs[2];
  rep.constants["fit_r2"] = main.r2;
  rep.constants["alt_fit_r2"] = alt.r2;
  rep.fits.push_back(std::move(main));
  rep.fits.push_back(std::move(alt));
  return rep;
}

ProbeReport expressiveness_sweep(const TeacherTask& task, const Dataset& train, const ExpressivenessConfig& cfg) {
  require(cfg.K >= 1, "expressiveness_sweep: K must be positive");
  ProbeReport rep;
  rep.probe = "theorem2";
  rep.param_names = {"r", "T", "kappa"};
  rep.metric_names = {"error"};
  rep.constants["K"] = static_cast<double>(cfg.K);
  for (std::size_t r : cfg.r_grid) {
    for (std::size_t T : cfg.T_grid) {
      require(T == 0 || cfg.K % T == 0, "expressiveness_sweep: T=" + std::to_string(T) + " does not divide K");
      const std::size_t kappa = T == 0 ? 0 : cfg.K / T;
      for (std::size_t s = 0; s < cfg.seeds; ++s) {
        const std::uint64_t seed = replicate_seed(cfg.seed, s);
        ModelSpec model = task.start;
        if (T > 0) {
          BoostConfig bc;
          bc.T = T;
          bc.kappa = kappa;
          bc.rank = r;
          bc.layers_sampled = std::min(cfg.layers_sampled, model.num_layers);
          bc.lr = cfg.lr;
          bc.batch_size = cfg.batch_size;
          bc.init_scale = cfg.init_scale;
          bc.seed = seed;
          xgblora_fit(model, train, bc);
        }
        rep.rows.push_back({{static_cast<double>(r), static_cast<double>(T), static_cast<double>(kappa)},
                            seed,
                            {teacher_gap(model, task)}});
      }
    }
  }
  add_monotone_checks(rep, 0, 0, false, "error non-increasing in r");
  add_monotone_checks(rep, 1, 0, false, "error non-increasing in T");

  std::vector<PointSummary> pts;
  for (PointSummary& p : rep.summarize())
    if (p.params[1] > 0) pts.push_back(std::move(p));
  if (!pts.empty()) {
    FitResult main = fit_nonneg("C6 (1/r + 1/(M sqrt(M) T) + 1/sqrt(T))", {"1/r", "1/(M sqrt(M) T)", "1/sqrt(T)"},
                                design(pts,
                                       [](const std::vector<double>& p) {
                                         const double m = p[2];
                                         return std::vector<double>{1.0 / p[0], 1.0 / (m * std::sqrt(m) * p[1]),
                                                                    1.0 / std::sqrt(p[1])};
                                       }),
                                means(pts, 0));
    FitResult appendix = fit_nonneg("C6 (1/r + 1/(M sqrt(T)) + 1/sqrt(T))", {"1/r", "1/(M sqrt(T))", "1/sqrt(T)"},
                                    design(pts,
                                           [](const std::vector<double>& p) {
                                             const double st = std::sqrt(p[1]);
                                             return std::vector<double>{1.0 / p[0], 1.0 / (p[2] * st), 1.0 / st};
                                           }),
                                    means(pts, 0));
    rep.constants["main_fit_r2"] = main.r2;
    rep.constants["appendix_fit_r2"] = appendix.r2;
    rep.constants["better_fit_is_appendix"] = appendix.r2 > main.r2 ? 1.0 : 0.0;
    rep.fits.push_back(std::move(main));
    rep.fits.push_back(std::move(appendix));
  }
  return rep;
}

double pooled_std(const PointSummary& a, const PointSummary& b, std::size_t metric) {
  return std::sqrt(0.5 * (sq(a.std[metric]) + sq(b.std[metric])));
}

}  // namespace xgbl
