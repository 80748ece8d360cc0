#include "kvbench/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <tuple>

#include "kvbench/error.hpp"
#include "kvbench/results_io.hpp"

namespace kvbench::report {
namespace fs = std::filesystem;
using metrics::RunResult;

namespace {

struct CellKey {
  std::string workload;
  uint32_t concurrency;
  auto operator<=>(const CellKey&) const = default;
};

std::vector<std::string> ordered_systems(const std::vector<RunResult>& results, const ReportSettings& s) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto add = [&](const std::string& name) {
    if (seen.insert(name).second) out.push_back(name);
  };
  add(s.baseline_system);
  for (const auto& name : s.systems) add(name);
  std::set<std::string> extra;
  for (const auto& r : results) {
    if (!seen.count(r.system)) extra.insert(r.system);
  }
  for (const auto& name : extra) add(name);
  return out;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::string fmt_p(std::optional<double> p) { return p ? fmt::format("{:.4f}", *p) : "n/a"; }

std::string json_number_or_string(double v) {
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::json finite_or_tag(double v) {
  if (std::isfinite(v)) return v;
  return json_number_or_string(v);
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += csv_field(cells[i]);
  }
  line += "\r\n";
  return line;
}

}  // namespace

const char* to_string(CompareMetric m) {
  switch (m) {
    case CompareMetric::kThroughput: return "throughput";
    case CompareMetric::kP99: return "p99";
    case CompareMetric::kP999: return "p999";
  }
  return "?";
}

const std::vector<std::string>& compare_metric_names() {
  static const std::vector<std::string> names = {"throughput", "p99", "p999"};
  return names;
}

std::optional<CompareMetric> parse_compare_metric(const std::string& name) {
  if (name == "throughput") return CompareMetric::kThroughput;
  if (name == "p99") return CompareMetric::kP99;
  if (name == "p999") return CompareMetric::kP999;
  return std::nullopt;
}

double metric_value(const RunResult& r, CompareMetric m) {
  switch (m) {
    case CompareMetric::kThroughput: return r.throughput;
    case CompareMetric::kP99: return r.p99_us;
    case CompareMetric::kP999: return r.p999_us;
  }
  return 0.0;
}

CompareOutcome compare_cells(const std::vector<RunResult>& results, CompareMetric metric,
                             const std::string& baseline_system) {
  std::map<CellKey, std::map<std::string, std::vector<const RunResult*>>> cells;
  for (const auto& r : results) {
    if (r.failed) continue;
    cells[{r.workload, r.concurrency}][r.system].push_back(&r);
  }
  CompareOutcome out;
  for (const auto& [key, by_system] : cells) {
    const std::string where = "workload " + key.workload + " concurrency " + std::to_string(key.concurrency);
    auto base_it = by_system.find(baseline_system);
    if (base_it == by_system.end()) {
      out.warnings.push_back("missing baseline cell for " + where + ": skipped");
      continue;
    }
    if (base_it->second.size() < 2) {
      out.warnings.push_back("baseline cell for " + where + " has " + std::to_string(base_it->second.size()) +
                             " repetition(s), need >= 2: skipped");
      continue;
    }
    stats::SampleSet base{baseline_system, {}, to_string(metric)};
    for (const auto* r : base_it->second) base.values.push_back(metric_value(*r, metric));
    for (const auto& [system, runs] : by_system) {
      if (system == baseline_system) continue;
      if (runs.size() < 2) {
        out.warnings.push_back(system + " cell for " + where + " has " + std::to_string(runs.size()) +
                               " repetition(s), need >= 2: skipped");
        continue;
      }
      stats::SampleSet sys{system, {}, to_string(metric)};
      for (const auto* r : runs) sys.values.push_back(metric_value(*r, metric));
      out.reports.push_back({key.workload, key.concurrency, system, baseline_system, metric,
                             stats::welch_test(sys, base)});
    }
  }
  return out;
}

nlohmann::json to_json(const CellComparison& c) {
  const auto& t = c.test;
  return {{"workload", c.workload},
          {"concurrency", c.concurrency},
          {"system", c.system},
          {"baseline", c.baseline},
          {"metric", to_string(c.metric)},
          {"n_system", t.n_a},
          {"n_baseline", t.n_b},
          {"mean_system", t.mean_a},
          {"mean_baseline", t.mean_b},
          {"var_system", t.var_a},
          {"var_baseline", t.var_b},
          {"standard_error", t.standard_error},
          {"t_statistic", finite_or_tag(t.t_statistic)},
          {"degrees_of_freedom", t.degrees_of_freedom},
          {"p_value", t.p_value},
          {"significant", t.significant},
          {"ci95_low", t.ci_low},
          {"ci95_high", t.ci_high},
          {"degeneracy", stats::to_string(t.degeneracy)}};
}

std::string compare_table_text(const std::vector<CellComparison>& reports) {
  std::string out = fmt::format("{:<10} {:>11} {:<14} {:>14} {:>14} {:>10} {:>8} {:>9} {}\n", "workload",
                                "concurrency", "system", "mean", "baseline", "t", "df", "p", "significant");
  for (const auto& c : reports) {
    const auto& t = c.test;
    out += fmt::format("{:<10} {:>11} {:<14} {:>14.3f} {:>14.3f} {:>10.4f} {:>8.2f} {:>9.4f} {}\n", c.workload,
                       c.concurrency, c.system, t.mean_a, t.mean_b, t.t_statistic, t.degrees_of_freedom, t.p_value,
                       t.significant ? "yes" : "no");
  }
  return out;
}

std::string format_delta(double pct) {
  std::string s = fmt::format("{:+.1f}%", pct);
  if (s == "-0.0%") s = "+0.0%";
  return s;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

SummaryTable build_summary(const std::vector<RunResult>& results, const ReportSettings& settings) {
  SummaryTable table;
  table.baseline = settings.baseline_system;
  // metric -> system -> samples
  std::map<std::string, std::map<std::string, std::vector<double>>> samples;
  for (const auto& r : results) {
    if (r.failed) continue;
    samples[r.set_ratio >= 0.5 ? "throughput-write" : "throughput-read"][r.system].push_back(r.throughput);
    samples["p99"][r.system].push_back(r.p99_us);
    samples["p999"][r.system].push_back(r.p999_us);
    if (auto cores = metrics::mean_cpu_cores(r.resource_series); cores && *cores > 0.0) {
      samples["cpu-efficiency"][r.system].push_back(
          metrics::efficiency_index(r.throughput, *cores, 0.0, {1.0, 0.0}));
    }
    if (auto mem = metrics::mean_used_memory(r.resource_series); mem && *mem > 0.0 && settings.memory_budget > 0) {
      const double fraction = *mem / static_cast<double>(settings.memory_budget);
      samples["memory-efficiency"][r.system].push_back(
          metrics::efficiency_index(r.throughput, 0.0, fraction, {0.0, 1.0}));
    }
  }
  for (const auto& system : ordered_systems(results, settings)) {
    if (system == settings.baseline_system) continue;
    for (const auto& metric : summary_metric_names()) {
      auto& by_system = samples[metric];
      auto base_it = by_system.find(settings.baseline_system);
      auto sys_it = by_system.find(system);
      if (base_it == by_system.end() || sys_it == by_system.end()) continue;
      const auto& base = base_it->second;
      const auto& sys = sys_it->second;
      SummaryRow row;
      row.system = system;
      row.metric = metric;
      row.n_system = sys.size();
      row.n_baseline = base.size();
      row.mean_system = mean_of(sys);
      row.mean_baseline = mean_of(base);
      if (!(row.mean_baseline > 0.0)) continue;
      row.delta_pct = (row.mean_system / row.mean_baseline - 1.0) * 100.0;
      if (sys.size() >= 2 && base.size() >= 2) {
        const auto t = stats::welch_test({system, sys, metric}, {settings.baseline_system, base, metric});
        row.p_value = t.p_value;
        row.significant = t.significant;
      }
      table.rows.push_back(row);
    }
  }
  return table;
}

std::string summary_csv(const SummaryTable& table) {
  std::string out = csv_row({"metric", "system", "baseline", "delta", "p_value", "significant", "n_system",
                             "n_baseline", "mean_system", "mean_baseline"});
  for (const auto& r : table.rows) {
    out += csv_row({r.metric, r.system, table.baseline, format_delta(r.delta_pct), fmt_p(r.p_value),
                    r.p_value ? (r.significant ? "yes" : "no") : "n/a", std::to_string(r.n_system),
                    std::to_string(r.n_baseline), fmt::format("{:.6f}", r.mean_system),
                    fmt::format("{:.6f}", r.mean_baseline)});
  }
  return out;
}

std::string summary_text(const SummaryTable& table, const ReportSettings& settings) {
  std::string out = fmt::format("Performance summary normalized to {}\n\n", table.baseline);
  if (table.rows.empty()) {
    out += "(no systems besides the baseline)\n";
  } else {
    out += fmt::format("{:<18} {:<14} {:>9} {:>9} {:>12} {}\n", "metric", "system", "delta", "p", "n(sys/base)",
                       "significant");
    for (const auto& r : table.rows) {
      out += fmt::format("{:<18} {:<14} {:>9} {:>9} {:>12} {}\n", r.metric, r.system, format_delta(r.delta_pct),
                         fmt_p(r.p_value), fmt::format("{}/{}", r.n_system, r.n_baseline),
                         r.p_value ? (r.significant ? "yes" : "no") : "n/a");
    }
  }
  out += "\nNotes:\n";
  out += "  delta = (mean_system / mean_baseline - 1) x 100 over all successful runs of that metric.\n";
  out += "  p = two-sided Welch t-test on the same samples; significant at p < 0.05.\n";
  out += "  cpu-efficiency = throughput / mean server cores; memory-efficiency = throughput / mean used-memory"
         " fraction of the budget.\n";
  out += "  CPU and memory are read server-side from INFO (cores = delta cpu_seconds_total / delta t).\n";
  if (settings.configured_repetitions > 0) {
    out += fmt::format("  repetitions per cell: {} (toolkit default 5).\n", settings.configured_repetitions);
  }
  if (settings.preload_key_count > 0) {
    const double truncated = std::floor(static_cast<double>(settings.preload_key_count) / 1e5) / 10.0;
    out += fmt::format("  preload key count: {} (floor of budget x fill / (value + overhead)); about {:.1f} million"
                       " when truncated.\n",
                       settings.preload_key_count, truncated);
  }
  return out;
}

std::map<std::string, std::string> render_report(const std::vector<RunResult>& results,
                                                 const ReportSettings& settings) {
  if (results.empty()) throw Error(ErrorCode::kNoData, "report: no results");
  std::map<std::string, std::string> files;
  const auto table = build_summary(results, settings);
  files["summary.csv"] = summary_csv(table);
  files["summary.txt"] = summary_text(table, settings);

  const auto systems = ordered_systems(results, settings);
  // workload -> concurrency -> system -> runs
  std::map<std::string, std::map<uint32_t, std::map<std::string, std::vector<const RunResult*>>>> grid;
  for (const auto& r : results) {
    auto& cell = grid[r.workload][r.concurrency];
    if (!r.failed) cell[r.system].push_back(&r);
  }

  struct Series {
    const char* name;
    std::function<std::optional<double>(const RunResult&)> value;
    std::function<std::string(double)> format;
  };
  const uint64_t budget = settings.memory_budget;
  const std::vector<Series> series = {
      {"throughput", [](const RunResult& r) -> std::optional<double> { return r.throughput; },
       [](double v) { return fmt::format("{:.3f}", v); }},
      {"p99", [](const RunResult& r) -> std::optional<double> { return r.p99_us; },
       [](double v) { return std::to_string(std::llround(v)); }},
      {"p999", [](const RunResult& r) -> std::optional<double> { return r.p999_us; },
       [](double v) { return std::to_string(std::llround(v)); }},
      {"cpu", [](const RunResult& r) { return metrics::mean_cpu_cores(r.resource_series); },
       [](double v) { return fmt::format("{:.4f}", v); }},
      {"memory",
       [budget](const RunResult& r) -> std::optional<double> {
         auto mem = metrics::mean_used_memory(r.resource_series);
         if (!mem || budget == 0) return std::nullopt;
         return *mem / static_cast<double>(budget) * 100.0;
       },
       [](double v) { return fmt::format("{:.2f}", v); }},
  };

  for (const auto& [workload, by_level] : grid) {
    for (const auto& s : series) {
      std::vector<std::string> header = {"concurrency"};
      header.insert(header.end(), systems.begin(), systems.end());
      std::string csv = csv_row(header);
      for (const auto& [level, by_system] : by_level) {
        std::vector<std::string> row = {std::to_string(level)};
        for (const auto& system : systems) {
          std::vector<double> vals;
          if (auto it = by_system.find(system); it != by_system.end()) {
            for (const auto* r : it->second) {
              if (auto v = s.value(*r)) vals.push_back(*v);
            }
          }
          row.push_back(vals.empty() ? std::string() : s.format(mean_of(vals)));
        }
        csv += csv_row(row);
      }
      files[results::sanitize_component(workload) + "_" + s.name + "_vs_concurrency.csv"] = csv;
    }
  }

  // Weighted efficiency index per cell (weights from the config).
  std::vector<std::string> header = {"workload", "concurrency"};
  header.insert(header.end(), systems.begin(), systems.end());
  std::string eff = csv_row(header);
  for (const auto& [workload, by_level] : grid) {
    for (const auto& [level, by_system] : by_level) {
      std::vector<std::string> row = {workload, std::to_string(level)};
      for (const auto& system : systems) {
        std::vector<double> vals;
        if (auto it = by_system.find(system); it != by_system.end()) {
          for (const auto* r : it->second) {
            auto cores = metrics::mean_cpu_cores(r->resource_series);
            auto mem = metrics::mean_used_memory(r->resource_series);
            if (!cores || !mem || budget == 0) continue;
            const double fraction = *mem / static_cast<double>(budget);
            const double denom = *cores * settings.weights.cpu_weight + fraction * settings.weights.mem_weight;
            if (denom > 0.0) vals.push_back(metrics::efficiency_index(r->throughput, *cores, fraction, settings.weights));
          }
        }
        row.push_back(vals.empty() ? std::string() : fmt::format("{:.3f}", mean_of(vals)));
      }
      eff += csv_row(row);
    }
  }
  files["efficiency_index.csv"] = eff;
  return files;
}

void write_report(const fs::path& dir, const std::map<std::string, std::string>& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / name).string());
    out << content;
  }
}

}  // namespace kvbench::report
