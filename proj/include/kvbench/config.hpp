#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kvbench/connection.hpp"
#include "kvbench/metrics.hpp"
#include "kvbench/workload.hpp"
#include "kvbench/zipf.hpp"

namespace kvbench::config {

struct Target {
  std::string name;
  resp::Endpoint endpoint;
  metrics::InfoSchema info_schema;
  // Optional CSV (timestamp_s,cpu_seconds_total,used_memory_bytes) used when
  // the server's INFO cannot provide resource readings.
  std::string resource_file;
};

struct PreloadSettings {
  uint64_t memory_budget = workload::kDefaultMemoryBudget;
  double target_fill = workload::kDefaultTargetFill;
  uint64_t value_size = workload::kDefaultValueSize;
  uint64_t overhead_per_key = workload::kDefaultOverheadPerKey;
  uint32_t parallelism = 8;
  uint32_t pipeline_depth = 64;

  workload::PreloadPlan plan() const {
    return workload::PreloadPlan::for_budget(memory_budget, target_fill, value_size, overhead_per_key);
  }
};

struct BenchmarkConfig {
  std::vector<Target> targets;
  // Builtin names ("A", "B") resolve with key_count taken from the preload
  // sizing so the swept key space matches what was loaded.
  std::vector<workload::WorkloadSpec> workloads;
  uint32_t repetitions = workload::kDefaultRepetitions;
  std::string baseline_system;
  std::filesystem::path output_dir = "kvbench-results";
  metrics::EfficiencyWeights weights;
  PreloadSettings preload;
  zipf::KeyMappingConfig key_mapping;
  double cooldown_s = workload::kDefaultCooldownSeconds;
  double resource_interval_s = workload::kDefaultResourceIntervalSeconds;

  void validate() const;
  const Target* find_target(const std::string& name) const;
  const workload::WorkloadSpec* find_workload(const std::string& name) const;

  std::filesystem::path results_dir() const { return output_dir / "results"; }
  std::filesystem::path report_dir() const { return output_dir / "report"; }
};

BenchmarkConfig config_from_json(const nlohmann::json& j);
BenchmarkConfig load_config(const std::filesystem::path& path);

}  // namespace kvbench::config
