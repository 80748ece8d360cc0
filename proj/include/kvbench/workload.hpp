#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "kvbench/connection.hpp"
#include "kvbench/error.hpp"
#include "kvbench/metrics.hpp"
#include "kvbench/zipf.hpp"

namespace kvbench::workload {

inline constexpr uint64_t kDefaultMemoryBudget = uint64_t{8} << 30;
inline constexpr double kDefaultTargetFill = 0.75;
inline constexpr uint64_t kDefaultValueSize = 1024;
inline constexpr uint64_t kDefaultOverheadPerKey = 300;
inline constexpr uint32_t kDefaultRepetitions = 5;
inline constexpr double kDefaultCooldownSeconds = 10.0;
inline constexpr double kDefaultResourceIntervalSeconds = 5.0;

struct WorkloadSpec {
  std::string name;
  double set_ratio = 0.5;
  double get_ratio = 0.5;
  double skew = 0.9;
  uint64_t key_count = 1;
  uint64_t value_size = kDefaultValueSize;
  double duration_s = 300.0;
  double warmup_s = 60.0;
  std::vector<uint32_t> concurrency_levels;
  uint32_t pipeline_depth = 1;
  uint64_t base_seed = 42;

  void validate() const;

  friend bool operator==(const WorkloadSpec&, const WorkloadSpec&) = default;
};

// JSON with exactly the WorkloadSpec fields; unknown keys are rejected.
// pipeline_depth and base_seed may be omitted.
WorkloadSpec workload_from_json(const nlohmann::json& j);
nlohmann::json workload_to_json(const WorkloadSpec& spec);

enum class BuiltinWorkload { kA, kB };

// A: write-heavy (50/50, skew 0.9). B: read-heavy (5/95, skew 1.4).
// Both: 300 s runs with 60 s warmup, 50..500 connections in steps of 50,
// 1 KiB values, key count sized for 75% of 8 GiB.
WorkloadSpec builtin_workload(BuiltinWorkload which);
std::optional<WorkloadSpec> builtin_workload(const std::string& name);

// floor(memory_budget * target_fill / (value_size + overhead)).
uint64_t compute_preload_keycount(uint64_t memory_budget, double target_fill,
                                  uint64_t value_size, uint64_t overhead);

struct PreloadPlan {
  uint64_t key_count = 0;
  uint64_t value_size = kDefaultValueSize;
  uint64_t overhead_per_key = kDefaultOverheadPerKey;
  double target_fill = kDefaultTargetFill;
  uint64_t memory_budget = kDefaultMemoryBudget;

  static PreloadPlan for_budget(uint64_t memory_budget, double target_fill,
                                uint64_t value_size, uint64_t overhead);
  void validate() const;
};

// Printable pseudo-random payload, identical for identical (size, seed).
std::string make_value(size_t size, uint64_t seed);

struct PreloadOptions {
  uint32_t parallelism = 4;
  uint32_t pipeline_depth = 64;
  uint64_t value_seed = 42;
  bool progress = true;
};

struct PreloadReport {
  uint64_t key_count = 0;
  uint64_t keys_written = 0;
  uint64_t errors = 0;
  double elapsed_s = 0.0;
  std::optional<uint64_t> used_memory;
  bool failed = false;
  std::string first_error;
};

struct RankRange {
  uint64_t first = 0;  // inclusive
  uint64_t last = 0;   // inclusive; last < first means empty

  friend bool operator==(const RankRange&, const RankRange&) = default;
};

// Raised when a connection dies mid-preload. `completed` lists the rank
// ranges whose SETs were acknowledged, so a caller can resume the rest.
class PreloadInterrupted : public Error {
 public:
  PreloadInterrupted(const std::string& what, std::vector<RankRange> completed)
      : Error(ErrorCode::kConnectionReset, what), completed_(std::move(completed)) {}

  const std::vector<RankRange>& completed() const noexcept { return completed_; }

 private:
  std::vector<RankRange> completed_;
};

// Issues exactly plan.key_count SETs, one per rank, split across
// `parallelism` connections.
PreloadReport preload(const resp::Endpoint& endpoint, const PreloadPlan& plan,
                      const zipf::KeyMapping& mapping, const PreloadOptions& options = {});

// GETs ranks 1, N and `sample` random ranks; returns how many were missing.
uint64_t verify_residency(const resp::Endpoint& endpoint, const zipf::KeyMapping& mapping,
                          uint64_t sample, uint64_t seed);

enum class RunState { kWarming, kMeasuring, kDraining, kDone, kAborted };

const char* to_string(RunState state);

// Lifecycle of one run. States only move forward; kAborted is reachable from
// any state except kDone.
class RunHandle {
 public:
  RunHandle(const WorkloadSpec& spec, uint32_t concurrency);

  const WorkloadSpec& spec() const noexcept { return *spec_; }
  uint32_t concurrency() const noexcept { return concurrency_; }
  std::chrono::system_clock::time_point started_at() const noexcept { return started_at_; }
  RunState state() const noexcept { return state_.load(); }

  // Returns false (and leaves the state alone) for a backward or
  // out-of-order transition.
  bool advance(RunState next);
  bool abort() { return advance(RunState::kAborted); }

 private:
  const WorkloadSpec* spec_;
  uint32_t concurrency_;
  std::chrono::system_clock::time_point started_at_;
  std::atomic<RunState> state_{RunState::kWarming};
};

uint64_t run_seed_for(uint64_t base_seed, uint32_t concurrency, uint32_t repetition);
uint64_t worker_key_seed(uint64_t run_seed, uint32_t worker);
uint64_t worker_op_seed(uint64_t run_seed, uint32_t worker);

// Per-worker operation stream: rank from the Zipfian key stream, operation
// type from an independent stream.
class WorkerStream {
 public:
  struct Op {
    bool is_set = false;
    uint64_t rank = 0;

    friend bool operator==(const Op&, const Op&) = default;
  };

  WorkerStream(const zipf::ZipfianTable& table, double set_ratio, uint64_t run_seed,
               uint32_t worker);

  Op next();

 private:
  zipf::RankSampler keys_;
  Xoshiro256 ops_;
  double set_ratio_;
};

struct RunOptions {
  std::string system = "target";
  uint32_t repetition = 1;
  // Defaults to run_seed_for(spec.base_seed, concurrency, repetition).
  std::optional<uint64_t> run_seed;
  zipf::KeyMappingConfig key_mapping;
  // Shared table; built on demand when null.
  const zipf::ZipfianTable* table = nullptr;
  metrics::InfoSchema info_schema;
  bool sample_resources = true;
  double resource_interval_s = kDefaultResourceIntervalSeconds;
  // External CSV used when INFO cannot supply a sample.
  std::string resource_file;
  uint64_t exact_limit = metrics::LatencyRecorder::kDefaultExactLimit;
  bool progress = true;
};

// Closed-loop timed run: `concurrency` connections, each issuing batches of
// spec.pipeline_depth commands and waiting for all replies. Only batches
// started after the warmup window feed latency and throughput.
metrics::RunResult run(const resp::Endpoint& endpoint, const WorkloadSpec& spec,
                       uint32_t concurrency, const RunOptions& options = {});

struct SweepOptions {
  RunOptions run;
  uint32_t repetitions = kDefaultRepetitions;
  double cooldown_s = kDefaultCooldownSeconds;
  // Cells for which this returns true are not executed.
  std::function<bool(uint32_t concurrency, uint32_t repetition)> skip;
  // Invoked after every executed cell, before the cool-down.
  std::function<void(const metrics::RunResult&)> on_result;
};

// Runs every (concurrency, repetition) cell in order. A failed cell is
// recorded and the sweep moves on.
std::vector<metrics::RunResult> sweep(const resp::Endpoint& endpoint, const WorkloadSpec& spec,
                                      const SweepOptions& options);

}  // namespace kvbench::workload
