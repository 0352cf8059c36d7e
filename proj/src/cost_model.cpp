// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/cost_model.hpp"

#include "xgbl/error.hpp"

namespace xgbl {

std::string_view to_string(CostMethod m) { return m == CostMethod::Lora ? "lora" : "xgblora"; }

CostMethod parse_cost_method(std::string_view s) {
  if (s == "lora") return CostMethod::Lora;
  if (s == "xgblora") return CostMethod::XgbLora;
  throw ConfigError("method", "expected lora or xgblora, got '" + std::string(s) + "'");
}

CostEstimate cost_model_estimate(const CostModel& cm, CostMethod method) {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0)) throw ConfigError(field, "must be positive");
  };
  positive(cm.alpha, "alpha");
  positive(cm.L, "L");
  positive(cm.K, "K");
  positive(cm.T, "T");
  positive(cm.r, "r");
  positive(cm.R, "R");
  positive(cm.l, "l");
  if (!(cm.beta >= 0.0)) throw ConfigError("beta", "must be non-negative");

  CostEstimate e;
  if (method == CostMethod::Lora) {
    e.per_learner = cm.L * cm.alpha;
    e.steps_per_iter = cm.K;
    e.iters = 1.0;
  } else {
    e.per_learner = cm.l * cm.alpha * cm.r / cm.R;
    e.steps_per_iter = cm.K / cm.T;
    e.iters = cm.T;
  }
  e.total = e.per_learner * e.steps_per_iter * e.iters + cm.beta;
  return e;
}

CostPreset cost_preset(std::string_view name, double L, double K, double alpha, double beta, double R) {
  CostPreset p{CostModel{alpha, beta, L, K, 1, R, R, L}, CostMethod::Lora, "L*alpha*K + beta"};
  if (name == "lora") return p;
  p.method = CostMethod::XgbLora;
  p.model.T = 10;
  p.model.l = L / 3.0;
  if (name == "xgblora-fullrank") {
    p.formula = "L*alpha*K/3 + beta";
    return p;
  }
  if (name == "xgblora") {
    p.model.r = 1;
    p.formula = "L*alpha*K/(3R) + beta";
    return p;
  }
  throw ConfigError("preset", "expected lora, xgblora-fullrank or xgblora, got '" + std::string(name) + "'");
}

}  // namespace xgbl
