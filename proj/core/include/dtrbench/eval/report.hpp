#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dtrbench/eval/protocol.hpp"

namespace dtrbench::eval {

enum class ReportFormat { Json, Csv };

std::string report_json(const MetricsReport& report);
MetricsReport parse_report_json(const std::string& text);
/// Header plus one row per stratum and one for "overall".
std::string report_csv(const MetricsReport& report);

void emit_report(const MetricsReport& report, const std::filesystem::path& path, ReportFormat format);
MetricsReport load_report(const std::filesystem::path& path);

/// Per-episode traces as JSON lines, one record per line.
std::string records_jsonl(const std::vector<EpisodeRecord>& records);

struct ComparisonCell {
  risk::MetricSummary normalized_return;
  double diff_vs_first = 0;  // mean difference against the first (best) column
  bool overlaps_first = true;  // CI overlaps the first column's CI
};

struct Comparison {
  std::vector<std::string> policies;  // columns, best overall return first
  std::vector<std::string> strata;    // rows, "overall" last
  std::vector<std::vector<ComparisonCell>> cells;  // [row][column]
};

/// Requires >= 2 reports sharing one protocol hash; throws ContractViolation otherwise.
Comparison compare_policies(const std::vector<MetricsReport>& reports);
std::string comparison_table(const Comparison& c);
std::string comparison_csv(const Comparison& c);

}  // namespace dtrbench::eval
