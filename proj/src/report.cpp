// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

namespace xgbl {

namespace fs = std::filesystem;

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Display precision for tables and tick labels.
std::string show(double v) { return std::isnan(v) ? std::string("nan") : fmt("%.6g", v); }

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct Mean {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double value() const { return n ? sum / static_cast<double>(n) : std::nan(""); }
};

// Accuracy when every row has one, else loss.
bool use_accuracy(const std::vector<SummaryRow>& rows) {
  if (rows.empty()) return false;
  return std::all_of(rows.begin(), rows.end(), [](const SummaryRow& r) { return !std::isnan(r.final_accuracy); });
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const double W = 640, H = 400, left = 70, right = 170, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  s += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       escape_xml(spec.title) + "</text>\n";
  s += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", top) + "\" width=\"" + fmt("%.2f", pw) +
       "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", H - 12) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(spec.x_label) +
       "</text>\n";
  s += "<text x=\"16\" y=\"" + fmt("%.2f", top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       fmt("%.2f", top + ph / 2) + ")\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(spec.y_label) +
       "</text>\n";

  auto tx = [&](double x) { return spec.log_x ? std::log2(std::max(x, 1e-300)) : x; };
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& ser : spec.series) {
    for (const auto& [x, y] : ser.points) {
      if (!std::isfinite(y)) continue;
      x0 = std::min(x0, tx(x));
      x1 = std::max(x1, tx(x));
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x0 <= x1)) {
    s += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", top + ph / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">no data</text>\n</svg>\n";
    return s;
  }
  if (x1 == x0) {
    x0 -= 1;
    x1 += 1;
  }
  if (y1 == y0) {
    y0 -= std::max(1e-12, std::abs(y0) * 0.05);
    y1 += std::max(1e-12, std::abs(y1) * 0.05);
  }
  auto px = [&](double x) { return left + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

  // Axis ticks: ends and midpoint.
  for (int i = 0; i <= 2; ++i) {
    const double fy = y0 + (y1 - y0) * i / 2.0;
    s += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + fmt("%.2f", py(fy) + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + show(fy) + "</text>\n";
    const double fx = x0 + (x1 - x0) * i / 2.0;
    const double label = spec.log_x ? std::exp2(fx) : fx;
    s += "<text x=\"" + fmt("%.2f", left + (fx - x0) / (x1 - x0) * pw) + "\" y=\"" + fmt("%.2f", top + ph + 16) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" + show(label) +
         "</text>\n";
  }

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& ser = spec.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string pts;
    for (const auto& [x, y] : ser.points) {
      if (!std::isfinite(y)) continue;
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(x)) + "," + fmt("%.2f", py(y));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" + pts +
         "\"/>\n";
    if (ser.points.size() <= 32) {
      for (const auto& [x, y] : ser.points) {
        if (!std::isfinite(y)) continue;
        s += "<circle cx=\"" + fmt("%.2f", px(x)) + "\" cy=\"" + fmt("%.2f", py(y)) + "\" r=\"3\" fill=\"" + color +
             "\"/>\n";
      }
    }
    const double ly = top + 14 + 16 * static_cast<double>(k);
    s += "<line x1=\"" + fmt("%.2f", left + pw + 10) + "\" y1=\"" + fmt("%.2f", ly - 4) + "\" x2=\"" +
         fmt("%.2f", left + pw + 28) + "\" y2=\"" + fmt("%.2f", ly - 4) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.2f", left + pw + 32) + "\" y=\"" + fmt("%.2f", ly) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + escape_xml(ser.name) + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

Report build_report(const std::string& csv_dir) {
  std::vector<std::string> summary_files, metrics_files;
  if (fs::is_directory(csv_dir)) {
    for (const auto& e : fs::recursive_directory_iterator(csv_dir)) {
      if (!e.is_regular_file()) continue;
      const std::string p = e.path().generic_string();
      if (ends_with(p, "summary.csv")) summary_files.push_back(p);
      if (ends_with(p, "metrics.csv")) metrics_files.push_back(p);
    }
  } else {
    throw Error("report: '" + csv_dir + "' is not a directory");
  }
  std::sort(summary_files.begin(), summary_files.end());
  std::sort(metrics_files.begin(), metrics_files.end());

  std::vector<SummaryRow> runs;
  for (const auto& f : summary_files) {
    auto rows = read_summary_csv(f);
    runs.insert(runs.end(), rows.begin(), rows.end());
  }
  std::stable_sort(runs.begin(), runs.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.method, a.task, a.r, a.kappa, a.T, a.run_id) <
           std::tie(b.method, b.task, b.r, b.kappa, b.T, b.run_id);
  });
  std::vector<MetricsRow> metrics;
  for (const auto& f : metrics_files) {
    auto rows = read_metrics_csv(f);
    metrics.insert(metrics.end(), rows.begin(), rows.end());
  }

  Report rep;
  std::string& md = rep.markdown;
  md += "# Run report\n\n";
  md += "Runs: " + std::to_string(runs.size()) + " (" + std::to_string(summary_files.size()) +
        " summary files, " + std::to_string(metrics_files.size()) + " metrics files)\n\n";
  md += "## Per-run results\n\n";
  if (runs.empty()) {
    md += "No runs found.\n\n";
  } else {
    md += "| run | method | task | r | kappa | T | K | final loss | final acc | trainable | total | permille | "
          "peak update bytes | s/step |\n";
    md += "|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : runs) {
      md += "| " + r.run_id + " | " + r.method + " | " + r.task + " | " + std::to_string(r.r) + " | " +
            std::to_string(r.kappa) + " | " + std::to_string(r.T) + " | " + std::to_string(r.K) + " | " +
            show(r.final_loss) + " | " + show(r.final_accuracy) + " | " +
            std::to_string(r.trainable) + " | " + std::to_string(r.total) + " | " + fmt("%.3f", r.permille) +
            " | " + std::to_string(r.peak_update_bytes) + " | " + fmt("%.3g", r.s_per_step) + " |\n";
    }
    md += "\n";

    // Seed-averaged comparison per (method, task, r, kappa).
    using Key = std::tuple<std::string, std::string, std::size_t, std::size_t>;
    std::map<Key, std::vector<const SummaryRow*>> groups;
    for (const auto& r : runs) groups[{r.method, r.task, r.r, r.kappa}].push_back(&r);
    md += "## Method comparison (mean over runs)\n\n";
    md += "| method | task | r | kappa | runs | final loss | final acc | permille | peak update bytes | s/step |\n";
    md += "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& [key, rows] : groups) {
      Mean loss, acc, pm, bytes, sps;
      for (const auto* r : rows) {
        loss.add(r->final_loss);
        acc.add(r->final_accuracy);
        pm.add(r->permille);
        bytes.add(static_cast<double>(r->peak_update_bytes));
        sps.add(r->s_per_step);
      }
      md += "| " + std::get<0>(key) + " | " + std::get<1>(key) + " | " + std::to_string(std::get<2>(key)) + " | " +
            std::to_string(std::get<3>(key)) + " | " + std::to_string(rows.size()) + " | " +
            show(loss.value()) + " | " + show(acc.value()) + " | " + fmt("%.3f", pm.value()) +
            " | " + show(bytes.value()) + " | " + fmt("%.3g", sps.value()) + " |\n";
    }
    md += "\n";
  }

  // kappa sweep: xgblora runs, one series per (task, r).
  {
    PlotSpec spec{"Final metric vs kappa", "kappa (log scale)", "", true, {}};
    std::vector<SummaryRow> sel;
    for (const auto& r : runs)
      if (r.method == "xgblora") sel.push_back(r);
    const bool acc = use_accuracy(sel);
    spec.y_label = acc ? "final accuracy" : "final loss";
    std::map<std::pair<std::string, std::size_t>, std::map<std::size_t, Mean>> by;
    for (const auto& r : sel) by[{r.task, r.r}][r.kappa].add(acc ? r.final_accuracy : r.final_loss);
    md += "## kappa sweep\n\n";
    if (by.empty()) md += "No xgblora runs.\n\n";
    for (const auto& [key, pts] : by) {
      PlotSeries ser{key.first + " r=" + std::to_string(key.second), {}};
      md += "- " + ser.name + ":";
      for (const auto& [k, m] : pts) {
        ser.points.emplace_back(static_cast<double>(k), m.value());
        md += " kappa=" + std::to_string(k) + " -> " + show(m.value()) + ";";
      }
      md += "\n";
      spec.series.push_back(std::move(ser));
    }
    if (!by.empty()) md += "\n";
    md += "![kappa sweep](kappa_sweep.svg)\n\n";
    rep.kappa_svg = render_svg(spec);
  }

  // r sweep: one series per (method, task).
  {
    PlotSpec spec{"Final metric vs rank", "r (log scale)", "", true, {}};
    std::vector<SummaryRow> sel;
    for (const auto& r : runs)
      if (r.method != "full-ft") sel.push_back(r);
    const bool acc = use_accuracy(sel);
    spec.y_label = acc ? "final accuracy" : "final loss";
    std::map<std::pair<std::string, std::string>, std::map<std::size_t, Mean>> by;
    for (const auto& r : sel) by[{r.method, r.task}][r.r].add(acc ? r.final_accuracy : r.final_loss);
    md += "## r sweep\n\n";
    if (by.empty()) md += "No adapter runs.\n\n";
    for (const auto& [key, pts] : by) {
      PlotSeries ser{key.first + " " + key.second, {}};
      md += "- " + ser.name + ":";
      for (const auto& [r, m] : pts) {
        ser.points.emplace_back(static_cast<double>(r), m.value());
        md += " r=" + std::to_string(r) + " -> " + show(m.value()) + ";";
      }
      md += "\n";
      spec.series.push_back(std::move(ser));
    }
    if (!by.empty()) md += "\n";
    md += "![r sweep](r_sweep.svg)\n\n";
    rep.rank_svg = render_svg(spec);
  }

  // Loss curves, one series per run id in first-seen order.
  {
    PlotSpec spec{"Training loss", "global step", "loss", false, {}};
    std::map<std::string, std::size_t> index;
    for (const auto& m : metrics) {
      auto [it, fresh] = index.emplace(m.run_id, spec.series.size());
      if (fresh) spec.series.push_back({m.run_id, {}});
      spec.series[it->second].points.emplace_back(static_cast<double>(m.step), m.loss);
    }
    md += "## Loss curves\n\n";
    md += std::to_string(spec.series.size()) + " runs with metrics.\n\n![loss](loss.svg)\n";
    rep.loss_svg = render_svg(spec);
  }
  return rep;
}

Report emit_report(const std::string& csv_dir, const std::string& out_dir) {
  Report rep = build_report(csv_dir);
  fs::create_directories(out_dir);
  auto write = [&](const char* name, const std::string& text) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(std::string("report: cannot write ") + name);
    out << text;
  };
  write("report.md", rep.markdown);
  write("kappa_sweep.svg", rep.kappa_svg);
  write("r_sweep.svg", rep.rank_svg);
  write("loss.svg", rep.loss_svg);
  return rep;
}

}  // namespace xgbl
