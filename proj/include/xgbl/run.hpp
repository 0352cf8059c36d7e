// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "xgbl/checkpoint.hpp"
#include "xgbl/config.hpp"
#include "xgbl/metrics.hpp"

namespace xgbl {

struct RunOptions {
  // Resume an xgblora run from this checkpoint; its embedded config wins
  // over the one passed in, except for `out` and `run_id`.
  std::string resume_path;
  // Stop (and checkpoint) once this many global steps are done; 0 = run to
  // the end. Lets tests interrupt a run.
  std::size_t stop_after = 0;
};

struct RunResult {
  std::string dir;  // out/run_id
  SummaryRow summary;
  ModelSpec model;
  std::vector<MetricsRow> metrics;  // rows written by this invocation
  bool finished = false;
};

// Trains per cfg.method and writes config.txt, metrics.csv, summary.csv
// and checkpoint.xgbl under out/run_id. Checkpoints every
// cfg.checkpoint_every global steps (xgblora only) and at the end.
RunResult run_training(const RunConfig& cfg, const RunOptions& opts = {});

// Checkpoint of a live BoostTrainer.
Checkpoint make_checkpoint(const RunConfig& cfg, const ModelSpec& model, const TrainerState& state);

}  // namespace xgbl
