#include <gtest/gtest.h>

#include <cmath>

#include "kvbench/report.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace kvbench;
using namespace kvbench::report;
using kvtest::simple_result;

namespace {

ReportSettings settings(std::vector<std::string> systems = {"base", "challenger"}) {
  ReportSettings s;
  s.baseline_system = "base";
  s.systems = std::move(systems);
  s.memory_budget = uint64_t{8} << 30;
  s.configured_repetitions = 5;
  s.preload_key_count = 4865899;
  return s;
}

const SummaryRow* find_row(const SummaryTable& t, const std::string& system, const std::string& metric) {
  for (const auto& r : t.rows) {
    if (r.system == system && r.metric == metric) return &r;
  }
  return nullptr;
}

// Five reps per system; challenger's write throughput averages exactly 2.08x.
std::vector<metrics::RunResult> doubled_grid() {
  std::vector<metrics::RunResult> out;
  const double base[] = {90000, 95000, 100000, 105000, 110000};
  for (uint32_t rep = 1; rep <= 5; ++rep) {
    out.push_back(simple_result("base", "A", 0.5, 50, rep, base[rep - 1], 500, 900, 2.0));
    out.push_back(simple_result("challenger", "A", 0.5, 50, rep, base[rep - 1] * 2.08, 400, 800, 4.0));
  }
  return out;
}

}  // namespace

TEST(Delta, Formatting) {
  EXPECT_EQ(format_delta(108.0), "+108.0%");
  EXPECT_EQ(format_delta(-37.25), "-37.2%");
  EXPECT_EQ(format_delta(0.0), "+0.0%");
  EXPECT_EQ(format_delta(-0.04), "+0.0%");
  EXPECT_EQ(format_delta(12.96), "+13.0%");
}

TEST(Csv, Rfc4180Quoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(Summary, DoubledThroughputReadsPlus108) {
  const auto t = build_summary(doubled_grid(), settings());
  const auto* row = find_row(t, "challenger", "throughput-write");
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(format_delta(row->delta_pct), "+108.0%");
  EXPECT_NEAR(row->delta_pct, (row->mean_system / row->mean_baseline - 1) * 100, 1e-9);
  EXPECT_EQ(row->n_system, 5u);
  EXPECT_EQ(row->n_baseline, 5u);
  ASSERT_TRUE(row->p_value);
  EXPECT_TRUE(row->significant);
  EXPECT_EQ(find_row(t, "challenger", "throughput-read"), nullptr);
  EXPECT_EQ(find_row(t, "base", "throughput-write"), nullptr);
  EXPECT_NE(summary_csv(t).find("+108.0%"), std::string::npos);
  EXPECT_NE(summary_text(t, settings()).find("+108.0%"), std::string::npos);
}

TEST(Summary, EfficiencyAndLatencyRows) {
  const auto t = build_summary(doubled_grid(), settings());
  const auto* p99 = find_row(t, "challenger", "p99");
  ASSERT_NE(p99, nullptr);
  EXPECT_EQ(format_delta(p99->delta_pct), "-20.0%");
  const auto* cpu = find_row(t, "challenger", "cpu-efficiency");
  ASSERT_NE(cpu, nullptr);
  // Twice the throughput on twice the cores.
  EXPECT_NEAR(cpu->delta_pct, 4.0, 1e-9);
  const auto* mem = find_row(t, "challenger", "memory-efficiency");
  ASSERT_NE(mem, nullptr);
  EXPECT_NEAR(mem->delta_pct, 108.0, 1e-9);
}

TEST(Summary, DeltaConsistencyProperty) {
  Xoshiro256 rng(8);
  std::vector<metrics::RunResult> rs;
  for (const char* sys : {"base", "a", "b"}) {
    for (uint32_t rep = 1; rep <= 4; ++rep) {
      for (double ratio : {0.5, 0.05}) {
        rs.push_back(simple_result(sys, ratio > 0.1 ? "A" : "B", ratio, 10, rep, 1000 + rng.next_double() * 9000,
                                   100 + rng.next_double() * 50, 200 + rng.next_double() * 90,
                                   0.5 + rng.next_double(), 1000000 + rng() % 1000000));
      }
    }
  }
  const auto t = build_summary(rs, settings({"base", "a", "b"}));
  EXPECT_EQ(t.rows.size(), 12u);
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r.delta_pct, (r.mean_system / r.mean_baseline - 1.0) * 100.0, 1e-9);
    EXPECT_GT(r.n_system, 0u);
    EXPECT_GT(r.n_baseline, 0u);
  }
  // Rows follow system order, then metric order.
  EXPECT_EQ(t.rows.front().system, "a");
  EXPECT_EQ(t.rows.front().metric, "throughput-write");
  EXPECT_EQ(t.rows.back().system, "b");
  EXPECT_EQ(t.rows.back().metric, "memory-efficiency");
}

TEST(Summary, IdenticalSystemsShowNoDifference) {
  std::vector<metrics::RunResult> rs;
  for (uint32_t rep = 1; rep <= 5; ++rep) {
    for (const char* sys : {"base", "challenger"}) rs.push_back(simple_result(sys, "B", 0.05, 10, rep, 1000 + rep, 50, 90));
  }
  const auto t = build_summary(rs, settings());
  ASSERT_FALSE(t.rows.empty());
  for (const auto& r : t.rows) {
    EXPECT_EQ(format_delta(r.delta_pct), "+0.0%");
    EXPECT_FALSE(r.significant);
  }
}

TEST(Summary, FailedRunsAreExcluded) {
  auto rs = doubled_grid();
  auto bad = simple_result("challenger", "A", 0.5, 50, 6, 1, 1, 1);
  bad.failed = true;
  rs.push_back(bad);
  const auto t = build_summary(rs, settings());
  EXPECT_EQ(find_row(t, "challenger", "throughput-write")->n_system, 5u);
}

TEST(Summary, SingleRepetitionHasNoPValue) {
  std::vector<metrics::RunResult> rs = {simple_result("base", "A", 0.5, 1, 1, 100, 1, 1),
                                        simple_result("challenger", "A", 0.5, 1, 1, 150, 1, 1)};
  const auto t = build_summary(rs, settings());
  const auto* row = find_row(t, "challenger", "throughput-write");
  ASSERT_NE(row, nullptr);
  EXPECT_FALSE(row->p_value);
  EXPECT_NE(summary_csv(t).find("n/a"), std::string::npos);
}

TEST(Render, BaselineOnlyResults) {
  std::vector<metrics::RunResult> rs = {simple_result("base", "A", 0.5, 50, 1, 1000, 250.4, 900.6),
                                        simple_result("base", "A", 0.5, 100, 1, 1500, 300, 1000)};
  const auto files = render_report(rs, settings({"base"}));
  EXPECT_TRUE(build_summary(rs, settings({"base"})).rows.empty());
  EXPECT_EQ(files.at("A_throughput_vs_concurrency.csv"),
            "concurrency,base\r\n50,1000.000\r\n100,1500.000\r\n");
  EXPECT_EQ(files.at("A_p99_vs_concurrency.csv"), "concurrency,base\r\n50,250\r\n100,300\r\n");
  EXPECT_EQ(files.at("A_p999_vs_concurrency.csv"), "concurrency,base\r\n50,901\r\n100,1000\r\n");
  EXPECT_EQ(files.at("A_cpu_vs_concurrency.csv"), "concurrency,base\r\n50,2.0000\r\n100,2.0000\r\n");
  EXPECT_EQ(files.at("A_memory_vs_concurrency.csv"), "concurrency,base\r\n50,12.50\r\n100,12.50\r\n");
  EXPECT_EQ(files.count("summary.csv"), 1u);
  EXPECT_EQ(files.count("summary.txt"), 1u);
  EXPECT_EQ(files.count("efficiency_index.csv"), 1u);
}

TEST(Render, MissingCellIsEmptyField) {
  std::vector<metrics::RunResult> rs = {simple_result("base", "A", 0.5, 50, 1, 1000, 250, 900),
                                        simple_result("base", "A", 0.5, 100, 1, 1500, 300, 1000),
                                        simple_result("challenger", "A", 0.5, 50, 1, 2000, 200, 700)};
  const auto files = render_report(rs, settings());
  EXPECT_EQ(files.at("A_throughput_vs_concurrency.csv"),
            "concurrency,base,challenger\r\n50,1000.000,2000.000\r\n100,1500.000,\r\n");
}

TEST(Render, FailedOnlyCellIsEmptyNotDropped) {
  auto failed = simple_result("challenger", "A", 0.5, 100, 1, 0, 0, 0);
  failed.failed = true;
  std::vector<metrics::RunResult> rs = {simple_result("base", "A", 0.5, 100, 1, 1500, 300, 1000), failed};
  const auto files = render_report(rs, settings());
  EXPECT_EQ(files.at("A_p99_vs_concurrency.csv"), "concurrency,base,challenger\r\n100,300,\r\n");
}

TEST(Render, DeterministicAcrossInputOrder) {
  auto rs = doubled_grid();
  const auto first = render_report(rs, settings());
  std::reverse(rs.begin(), rs.end());
  EXPECT_EQ(render_report(rs, settings()), first);
  EXPECT_THROW(render_report({}, settings()), Error);
}

TEST(Render, WritesFiles) {
  kvtest::TempDir dir;
  const auto files = render_report(doubled_grid(), settings());
  write_report(dir / "report", files);
  for (const auto& [name, content] : files) EXPECT_EQ(kvtest::slurp(dir / "report" / name), content);
}

TEST(Compare, OneReportPerCellAndSystem) {
  auto rs = doubled_grid();
  for (uint32_t rep = 1; rep <= 5; ++rep) rs.push_back(simple_result("third", "A", 0.5, 50, rep, 1000 + rep, 1, 1));
  const auto out = compare_cells(rs, CompareMetric::kThroughput, "base");
  ASSERT_EQ(out.reports.size(), 2u);
  EXPECT_TRUE(out.warnings.empty());
  EXPECT_EQ(out.reports[0].system, "challenger");
  EXPECT_EQ(out.reports[1].system, "third");
  EXPECT_EQ(out.reports[0].test.n_a, 5u);
  EXPECT_NEAR(out.reports[0].test.mean_a / out.reports[0].test.mean_b, 2.08, 1e-12);
  const auto j = to_json(out.reports[0]);
  EXPECT_EQ(j.at("metric"), "throughput");
  EXPECT_EQ(j.at("baseline"), "base");
  EXPECT_FALSE(compare_table_text(out.reports).empty());
}

TEST(Compare, InsufficientRepetitionsWarn) {
  std::vector<metrics::RunResult> rs = {simple_result("base", "A", 0.5, 50, 1, 1, 1, 1),
                                        simple_result("challenger", "A", 0.5, 50, 1, 1, 1, 1),
                                        simple_result("challenger", "A", 0.5, 50, 2, 1, 1, 1),
                                        simple_result("challenger", "A", 0.5, 100, 1, 1, 1, 1)};
  const auto out = compare_cells(rs, CompareMetric::kP99, "base");
  EXPECT_TRUE(out.reports.empty());
  ASSERT_EQ(out.warnings.size(), 2u);
  EXPECT_NE(out.warnings[0].find("1 repetition"), std::string::npos);
  EXPECT_NE(out.warnings[1].find("missing baseline"), std::string::npos);
}

TEST(Compare, MetricNames) {
  EXPECT_EQ(parse_compare_metric("p999"), CompareMetric::kP999);
  EXPECT_FALSE(parse_compare_metric("p50"));
  EXPECT_EQ(compare_metric_names().size(), 3u);
  const auto r = simple_result("x", "A", 0.5, 1, 1, 10, 20, 30);
  EXPECT_EQ(metric_value(r, CompareMetric::kThroughput), 10);
  EXPECT_EQ(metric_value(r, CompareMetric::kP99), 20);
  EXPECT_EQ(metric_value(r, CompareMetric::kP999), 30);
}
