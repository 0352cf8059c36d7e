// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "xgbl/error.hpp"

namespace xgbl {

// Raised when a CSV does not match the expected schema. column() names the
// first offending column.
class SchemaError : public Error {
 public:
  SchemaError(std::string column, const std::string& what)
      : Error("schema: column '" + column + "': " + what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

inline constexpr const char* kMetricsSchema = "# xgbl-metrics v1";
inline constexpr const char* kSummarySchema = "# xgbl-summary v1";

struct MetricsRow {
  std::string run_id;
  std::size_t t = 0;     // booster index
  std::size_t step = 0;  // global step after this row
  double loss = 0.0;
  double a_norm = 0.0;
  double b_norm = 0.0;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
  std::size_t peak_update_bytes = 0;
};

const std::vector<std::string>& metrics_columns();

// One line per row, flushed as written.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  void write(const MetricsRow& row);

 private:
  std::ofstream out_;
};

std::vector<MetricsRow> read_metrics_csv(const std::string& path);

// Final numbers of one run.
struct SummaryRow {
  std::string run_id;
  std::string method;
  std::string task;
  std::size_t r = 0;
  std::size_t kappa = 0;
  std::size_t T = 0;
  std::size_t K = 0;
  double final_loss = 0.0;
  double final_accuracy = 0.0;  // NaN for regression tasks
  std::size_t trainable = 0;
  std::size_t total = 0;
  double permille = 0.0;
  std::size_t peak_update_bytes = 0;
  double s_per_step = 0.0;
};

const std::vector<std::string>& summary_columns();
void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> read_summary_csv(const std::string& path);

// Number formatting shared by the CSV writers and the report.
std::string format_number(double v);

}  // namespace xgbl
