// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <string_view>

namespace xgbl {

// Analytic training-cost model. alpha is the per-layer cost of a full-rank
// (rank R) adapter step, beta the fixed base-model cost.
struct CostModel {
  double alpha = 1.0;
  double beta = 0.0;
  double L = 32;   // model layers
  double K = 1000; // total steps
  double T = 1;    // boosting iterations
  double r = 8;    // adapter rank
  double R = 8;    // reference full rank
  double l = 32;   // adapted layers per learner
};

enum class CostMethod { Lora, XgbLora };

std::string_view to_string(CostMethod m);
CostMethod parse_cost_method(std::string_view s);

struct CostEstimate {
  double per_learner = 0.0;  // l * alpha * r / R
  double steps_per_iter = 0.0;
  double iters = 0.0;
  double total = 0.0;
};

// Lora forces r = R, l = L, T = 1, kappa = K. XgbLora uses kappa = K / T.
CostEstimate cost_model_estimate(const CostModel& cm, CostMethod method);

// Presets for the three reference rows: "lora", "xgblora-fullrank"
// (r = R, l = L/3, T = 10) and "xgblora" (r = 1, l = L/3).
struct CostPreset {
  CostModel model;
  CostMethod method;
  std::string formula;
};
CostPreset cost_preset(std::string_view name, double L = 32, double K = 1000, double alpha = 1.0, double beta = 0.0,
                       double R = 8);

}  // namespace xgbl
