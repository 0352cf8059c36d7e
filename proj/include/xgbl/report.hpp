// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "xgbl/metrics.hpp"

namespace xgbl {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  std::vector<PlotSeries> series;
};

// Plain SVG line plot. Output depends only on the spec.
std::string render_svg(const PlotSpec& spec);

struct Report {
  std::string markdown;
  std::string kappa_svg;
  std::string rank_svg;
  std::string loss_svg;
};

// Collects every `*summary.csv` and `*metrics.csv` under csv_dir (sorted by
// path). Schema problems throw SchemaError.
Report build_report(const std::string& csv_dir);

// Writes report.md, kappa_sweep.svg, r_sweep.svg and loss.svg into out_dir.
Report emit_report(const std::string& csv_dir, const std::string& out_dir);

}  // namespace xgbl
