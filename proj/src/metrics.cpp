// Copyright 2026 The xgblora-desk Authors
// SPDX-License-Identifier: Apache-2.0

#include "xgbl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace xgbl {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s;
}

void check_id(const std::string& id) {
  if (id.find_first_of(",\n\r") != std::string::npos) throw ConfigError("run_id", "must not contain commas or newlines");
}

double parse_double(const std::string& cell, const std::string& column) {
  if (cell == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (cell.empty() || *end != '\0') throw SchemaError(column, "not a number: '" + cell + "'");
  return v;
}

std::size_t parse_size(const std::string& cell, const std::string& column) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(cell.c_str(), &end, 10);
  if (cell.empty() || *end != '\0' || cell[0] == '-') throw SchemaError(column, "not a count: '" + cell + "'");
  return static_cast<std::size_t>(v);
}

// Reads the schema line and header, then hands each row's cells on.
std::vector<std::vector<std::string>> read_table(const std::string& path, const char* schema,
                                                 const std::vector<std::string>& columns) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != schema) {
    throw SchemaError(columns.front(), path + ": expected first line '" + schema + "'");
  }
  if (!std::getline(in, line)) throw SchemaError(columns.front(), path + ": missing header row");
  const auto header = split(line);
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i >= header.size()) throw SchemaError(columns[i], path + ": missing");
    if (header[i] != columns[i]) throw SchemaError(columns[i], path + ": found '" + header[i] + "' instead");
  }
  if (header.size() > columns.size()) throw SchemaError(header[columns.size()], path + ": unexpected column");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != columns.size()) {
      const std::size_t k = std::min(cells.size(), columns.size() - 1);
      throw SchemaError(columns[k], path + ": row has " + std::to_string(cells.size()) + " cells");
    }
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  // Shortest of %.15g / %.17g that reads back exactly.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> cols{"run_id", "t",         "step",    "loss",
                                             "a_norm", "b_norm",    "grad_norm", "wall_ms",
                                             "peak_update_bytes"};
  return cols;
}

MetricsWriter::MetricsWriter(const std::string& path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error("cannot write '" + path + "'");
  out_ << kMetricsSchema << '\n' << join(metrics_columns()) << '\n';
  out_.flush();
}

void MetricsWriter::write(const MetricsRow& row) {
  check_id(row.run_id);
  out_ << join({row.run_id, std::to_string(row.t), std::to_string(row.step), format_number(row.loss),
                format_number(row.a_norm), format_number(row.b_norm), format_number(row.grad_norm),
                format_number(row.wall_ms), std::to_string(row.peak_update_bytes)})
       << '\n';
  out_.flush();
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  const auto& cols = metrics_columns();
  std::vector<MetricsRow> out;
  for (const auto& c : read_table(path, kMetricsSchema, cols)) {
    MetricsRow r;
    r.run_id = c[0];
    r.t = parse_size(c[1], cols[1]);
    r.step = parse_size(c[2], cols[2]);
    r.loss = parse_double(c[3], cols[3]);
    r.a_norm = parse_double(c[4], cols[4]);
    r.b_norm = parse_double(c[5], cols[5]);
    r.grad_norm = parse_double(c[6], cols[6]);
    r.wall_ms = parse_double(c[7], cols[7]);
    r.peak_update_bytes = parse_size(c[8], cols[8]);
    out.push_back(std::move(r));
  }
  return out;
}

const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols{
      "run_id", "method",    "task",  "r",        "kappa",             "T",         "K",
      "final_loss", "final_accuracy", "trainable", "total", "permille", "peak_update_bytes", "s_per_step"};
  return cols;
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  out << kSummarySchema << '\n' << join(summary_columns()) << '\n';
  for (const SummaryRow& r : rows) {
    check_id(r.run_id);
    out << join({r.run_id, r.method, r.task, std::to_string(r.r), std::to_string(r.kappa), std::to_string(r.T),
                 std::to_string(r.K), format_number(r.final_loss), format_number(r.final_accuracy),
                 std::to_string(r.trainable), std::to_string(r.total), format_number(r.permille),
                 std::to_string(r.peak_update_bytes), format_number(r.s_per_step)})
        << '\n';
  }
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<SummaryRow> read_summary_csv(const std::string& path) {
  const auto& cols = summary_columns();
  std::vector<SummaryRow> out;
  for (const auto& c : read_table(path, kSummarySchema, cols)) {
    SummaryRow r;
    r.run_id = c[0];
    r.method = c[1];
    r.task = c[2];
    r.r = parse_size(c[3], cols[3]);
    r.kappa = parse_size(c[4], cols[4]);
    r.T = parse_size(c[5], cols[5]);
    r.K = parse_size(c[6], cols[6]);
    r.final_loss = parse_double(c[7], cols[7]);
    r.final_accuracy = parse_double(c[8], cols[8]);
    r.trainable = parse_size(c[9], cols[9]);
    r.total = parse_size(c[10], cols[10]);
    r.permille = parse_double(c[11], cols[11]);
    r.peak_update_bytes = parse_size(c[12], cols[12]);
    r.s_per_step = parse_double(c[13], cols[13]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace xgbl
