#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kvbench/metrics.hpp"
#include "kvbench/stats.hpp"

namespace kvbench::report {

enum class CompareMetric { kThroughput, kP99, kP999 };

const char* to_string(CompareMetric m);
std::optional<CompareMetric> parse_compare_metric(const std::string& name);
const std::vector<std::string>& compare_metric_names();

double metric_value(const metrics::RunResult& r, CompareMetric m);

struct CellComparison {
  std::string workload;
  uint32_t concurrency = 0;
  std::string system;
  std::string baseline;
  CompareMetric metric = CompareMetric::kThroughput;
  stats::TTestReport test;  // a = system, b = baseline
};

struct CompareOutcome {
  std::vector<CellComparison> reports;
  std::vector<std::string> warnings;
};

// One Welch test per non-baseline system per (workload, concurrency) cell,
// using the successful repetitions of that cell. Cells with fewer than two
// repetitions on either side are skipped with a warning.
CompareOutcome compare_cells(const std::vector<metrics::RunResult>& results, CompareMetric metric,
                             const std::string& baseline_system);

nlohmann::json to_json(const CellComparison& c);
std::string compare_table_text(const std::vector<CellComparison>& reports);

struct SummaryRow {
  std::string system;
  std::string metric;  // throughput-write, throughput-read, p99, p999, cpu-efficiency, memory-efficiency
  double delta_pct = 0.0;  // (mean_system / mean_baseline - 1) * 100
  std::optional<double> p_value;
  bool significant = false;
  size_t n_system = 0;
  size_t n_baseline = 0;
  double mean_system = 0.0;
  double mean_baseline = 0.0;
};

struct SummaryTable {
  std::string baseline;
  std::vector<SummaryRow> rows;
};

struct ReportSettings {
  std::string baseline_system;
  // Column order for plot series; systems seen only in results follow, sorted.
  std::vector<std::string> systems;
  uint64_t memory_budget = 0;
  metrics::EfficiencyWeights weights;
  uint32_t configured_repetitions = 0;
  uint64_t preload_key_count = 0;
};

inline const std::vector<std::string>& summary_metric_names() {
  static const std::vector<std::string> names = {"throughput-write", "throughput-read",  "p99",
                                                 "p999",             "cpu-efficiency", "memory-efficiency"};
  return names;
}

// Write-heavy workloads (set_ratio >= 0.5) feed throughput-write, the rest
// throughput-read. Failed runs are excluded.
SummaryTable build_summary(const std::vector<metrics::RunResult>& results, const ReportSettings& settings);

// "+108.0%"; one decimal, explicit sign, "-0.0" folded to "+0.0".
std::string format_delta(double pct);

// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

std::string summary_csv(const SummaryTable& table);
std::string summary_text(const SummaryTable& table, const ReportSettings& settings);

// File name -> content for every per-workload series plus the summary files.
// Identical inputs give byte-identical outputs.
std::map<std::string, std::string> render_report(const std::vector<metrics::RunResult>& results,
                                                 const ReportSettings& settings);

void write_report(const std::filesystem::path& dir, const std::map<std::string, std::string>& files);

}  // namespace kvbench::report
