#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kvbench/connection.hpp"

namespace kvbench::metrics {

using Nanos = std::chrono::nanoseconds;
using LatencyNs = std::chrono::duration<double, std::nano>;

enum class RecorderMode { kExact, kBucketed };

const char* to_string(RecorderMode mode);

// 1-based index ceil(k*n/100) into the sorted sample array, for k in (0, 100].
// The product is snapped to the nearest integer when it lies within a few ulps
// of one, so decimal k such as 99.9 index as written.
uint64_t percentile_rank(double k, uint64_t n);

// Response-time recorder. Exact mode keeps every sample; bucketed mode keeps
// log-spaced counters over [1 us, 60 s] whose width is below 0.1%.
// Single writer; merge per-worker recorders after the workers stop.
class LatencyRecorder {
 public:
  static constexpr Nanos kMinTracked{1'000};
  static constexpr Nanos kMaxTracked{60'000'000'000};
  static constexpr double kBucketGrowth = 1.000999;
  static constexpr uint64_t kDefaultExactLimit = 1'000'000;

  // `exact_limit` promotes an exact recorder to bucketed once the count
  // reaches it; 0 disables promotion.
  explicit LatencyRecorder(RecorderMode mode = RecorderMode::kExact, uint64_t exact_limit = 0);

  static LatencyRecorder adaptive(uint64_t exact_limit = kDefaultExactLimit) {
    return LatencyRecorder(RecorderMode::kExact, exact_limit);
  }

  void record(Nanos rtt);
  void merge(const LatencyRecorder& other);
  void promote_to_bucketed();

  RecorderMode mode() const noexcept { return mode_; }
  uint64_t count() const noexcept { return count_; }
  // Samples outside [1 us, 60 s]; clamped into the boundary bucket.
  uint64_t out_of_range() const noexcept { return out_of_range_; }

  // Exact: L[ceil(k*n/100)]. Bucketed: upper edge of the bucket holding that
  // sample. Throws kNoData when empty.
  LatencyNs percentile(double k) const;

  static size_t bucket_count();
  static size_t bucket_index(Nanos value);
  static double bucket_lower_edge(size_t index);
  static double bucket_upper_edge(size_t index);

 private:
  RecorderMode mode_;
  uint64_t exact_limit_;
  uint64_t count_ = 0;
  uint64_t out_of_range_ = 0;
  mutable std::vector<int64_t> samples_;
  mutable bool sorted_ = true;
  std::vector<uint64_t> buckets_;
};

enum class ResourceSource { kServerInfo, kExternalFile };

const char* to_string(ResourceSource source);
ResourceSource parse_resource_source(const std::string& text);

struct ResourceSample {
  double timestamp_s = 0.0;  // monotonic seconds from run start
  std::optional<double> cpu_seconds_total;
  std::optional<uint64_t> used_memory;
  ResourceSource source = ResourceSource::kServerInfo;

  bool complete() const noexcept { return cpu_seconds_total && used_memory; }
  bool missing() const noexcept { return !cpu_seconds_total && !used_memory; }

  friend bool operator==(const ResourceSample&, const ResourceSample&) = default;
};

// Maps the logical resource fields onto a system's INFO field names. CPU is
// the sum of all listed fields.
struct InfoSchema {
  std::vector<std::string> cpu_fields{"used_cpu_sys", "used_cpu_user"};
  std::string memory_field = "used_memory";

  static InfoSchema redis() { return {}; }
};

// Extracts one sample from an INFO map. Missing or unparseable fields stay
// empty, which marks the sample partial.
ResourceSample sample_from_info(const resp::InfoMap& info, const InfoSchema& schema,
                                double timestamp_s);

// Queries INFO on `conn`. If INFO is unavailable the latest external row at or
// before `timestamp_s` is returned when `external` is non-empty, otherwise a
// missing-sample marker.
ResourceSample sample_resources(resp::Connection& conn, const InfoSchema& schema,
                                double timestamp_s,
                                const std::vector<ResourceSample>* external = nullptr);

// Reads timestamp_s,cpu_seconds_total,used_memory_bytes CSV rows, sorted by
// timestamp. Empty cells become missing fields.
std::vector<ResourceSample> load_resource_csv(const std::string& path);

// Mean cores consumed: (last cpu - first cpu) / (last t - first t) over the
// samples carrying a CPU reading.
std::optional<double> mean_cpu_cores(const std::vector<ResourceSample>& series);
std::optional<double> mean_used_memory(const std::vector<ResourceSample>& series);

struct SeedRecord {
  uint64_t base_seed = 0;
  uint64_t run_seed = 0;

  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

// One (system, workload, concurrency, repetition) measurement.
struct RunResult {
  static constexpr int kSchemaVersion = 1;

  std::string system;
  std::string workload;
  double set_ratio = 0.0;
  uint32_t concurrency = 0;
  uint32_t repetition = 0;
  uint32_t pipeline_depth = 1;

  // Measurement window only (warmup excluded).
  uint64_t ops_total = 0;
  uint64_t get_ops = 0;
  uint64_t set_ops = 0;
  uint64_t get_misses = 0;
  double elapsed_measured_s = 0.0;
  double throughput = 0.0;
  double p50_us = 0.0;
  double p99_us = 0.0;
  double p999_us = 0.0;
  RecorderMode recorder_mode = RecorderMode::kExact;
  uint64_t latency_out_of_range = 0;

  // Whole-run command accounting:
  // commands_sent == replies_ok + replies_error + in_flight_lost.
  uint64_t errors_total = 0;
  uint64_t commands_sent = 0;
  uint64_t replies_ok = 0;
  uint64_t replies_error = 0;
  uint64_t in_flight_lost = 0;
  uint32_t connections_dropped = 0;

  uint64_t warmup_ops = 0;
  std::vector<uint64_t> warmup_ramp;  // completed ops per warmup second

  std::vector<ResourceSample> resource_series;
  SeedRecord seeds;
  bool failed = false;
  std::string failure_reason;
  std::vector<std::string> warnings;

  bool accounting_holds() const noexcept {
    return commands_sent == replies_ok + replies_error + in_flight_lost;
  }

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

struct EfficiencyWeights {
  double cpu_weight = 0.5;
  double mem_weight = 0.5;

  void validate() const;

  friend bool operator==(const EfficiencyWeights&, const EfficiencyWeights&) = default;
};

// raw / baseline; throws kInvalidBaseline unless baseline > 0.
double normalized_throughput(double raw, double baseline);

// T / (cpu * cpu_weight + mem * mem_weight). `mem_fraction` is mean used
// memory as a fraction of the memory budget.
double efficiency_index(double throughput, double cpu_cores, double mem_fraction,
                        const EfficiencyWeights& weights);

}  // namespace kvbench::metrics
