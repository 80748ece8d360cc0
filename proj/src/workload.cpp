#include "kvbench/workload.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <thread>

#include "kvbench/rng.hpp"

namespace kvbench::workload {
namespace {

using Clock = std::chrono::steady_clock;
using metrics::LatencyRecorder;
using metrics::RunResult;

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

Clock::duration to_duration(double seconds) {
  return std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
}

template <typename T>
T required(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw Error(ErrorCode::kConfig, std::string("workload: missing field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("workload: bad field '") + field + "': " + e.what());
  }
}

}  // namespace

void WorkloadSpec::validate() const {
  if (name.empty()) invalid_parameter("workload: empty name");
  if (!(set_ratio >= 0.0 && set_ratio <= 1.0) || !(get_ratio >= 0.0 && get_ratio <= 1.0)) {
    invalid_parameter("workload '" + name + "': ratios must lie in [0, 1]");
  }
  if (std::fabs(set_ratio + get_ratio - 1.0) > 1e-9) {
    invalid_parameter("workload '" + name + "': set_ratio + get_ratio must equal 1");
  }
  zipf::ZipfianParams{key_count, skew}.validate();
  if (value_size == 0) invalid_parameter("workload '" + name + "': value_size must be > 0");
  if (!(duration_s > 0.0)) invalid_parameter("workload '" + name + "': duration must be > 0");
  if (!(warmup_s >= 0.0) || !(warmup_s < duration_s)) {
    invalid_parameter("workload '" + name + "': warmup must be >= 0 and < duration");
  }
  if (concurrency_levels.empty()) invalid_parameter("workload '" + name + "': no concurrency levels");
  for (size_t i = 0; i < concurrency_levels.size(); ++i) {
    if (concurrency_levels[i] == 0) invalid_parameter("workload '" + name + "': concurrency must be >= 1");
    if (i > 0 && concurrency_levels[i] <= concurrency_levels[i - 1]) {
      invalid_parameter("workload '" + name + "': concurrency levels must be strictly increasing");
    }
  }
  if (pipeline_depth == 0) invalid_parameter("workload '" + name + "': pipeline_depth must be >= 1");
}

WorkloadSpec workload_from_json(const nlohmann::json& j) {
  static const std::set<std::string> kFields = {
      "name",       "set_ratio", "get_ratio",          "skew",           "key_count", "value_size",
      "duration_s", "warmup_s",  "concurrency_levels", "pipeline_depth", "base_seed"};
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "workload: expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kFields.count(key)) throw Error(ErrorCode::kConfig, "workload: unknown field '" + key + "'");
  }
  WorkloadSpec s;
  s.name = required<std::string>(j, "name");
  s.set_ratio = required<double>(j, "set_ratio");
  s.get_ratio = required<double>(j, "get_ratio");
  s.skew = required<double>(j, "skew");
  s.key_count = required<uint64_t>(j, "key_count");
  s.value_size = required<uint64_t>(j, "value_size");
  s.duration_s = required<double>(j, "duration_s");
  s.warmup_s = required<double>(j, "warmup_s");
  s.concurrency_levels = required<std::vector<uint32_t>>(j, "concurrency_levels");
  if (j.contains("pipeline_depth")) s.pipeline_depth = required<uint32_t>(j, "pipeline_depth");
  if (j.contains("base_seed")) s.base_seed = required<uint64_t>(j, "base_seed");
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  return s;
}

nlohmann::json workload_to_json(const WorkloadSpec& s) {
  return {{"name", s.name},
          {"set_ratio", s.set_ratio},
          {"get_ratio", s.get_ratio},
          {"skew", s.skew},
          {"key_count", s.key_count},
          {"value_size", s.value_size},
          {"duration_s", s.duration_s},
          {"warmup_s", s.warmup_s},
          {"concurrency_levels", s.concurrency_levels},
          {"pipeline_depth", s.pipeline_depth},
          {"base_seed", s.base_seed}};
}

WorkloadSpec builtin_workload(BuiltinWorkload which) {
  WorkloadSpec s;
  if (which == BuiltinWorkload::kA) {
    s.name = "A";
    s.set_ratio = 0.5;
    s.get_ratio = 0.5;
    s.skew = 0.9;
  } else {
    s.name = "B";
    s.set_ratio = 0.05;
    s.get_ratio = 0.95;
    s.skew = 1.4;
  }
  s.value_size = kDefaultValueSize;
  s.key_count = compute_preload_keycount(kDefaultMemoryBudget, kDefaultTargetFill,
                                         kDefaultValueSize, kDefaultOverheadPerKey);
  s.duration_s = 300.0;
  s.warmup_s = 60.0;
  for (uint32_t c = 50; c <= 500; c += 50) s.concurrency_levels.push_back(c);
  s.pipeline_depth = 1;
  s.base_seed = 42;
  return s;
}

std::optional<WorkloadSpec> builtin_workload(const std::string& name) {
  if (name == "A" || name == "a") return builtin_workload(BuiltinWorkload::kA);
  if (name == "B" || name == "b") return builtin_workload(BuiltinWorkload::kB);
  return std::nullopt;
}

uint64_t compute_preload_keycount(uint64_t memory_budget, double target_fill,
                                  uint64_t value_size, uint64_t overhead) {
  if (memory_budget == 0) invalid_parameter("preload: memory budget must be > 0");
  if (!(target_fill > 0.0 && target_fill <= 1.0)) invalid_parameter("preload: target fill must lie in (0, 1]");
  if (value_size + overhead == 0) invalid_parameter("preload: value_size + overhead must be > 0");
  const long double usable = static_cast<long double>(memory_budget) * target_fill;
  return static_cast<uint64_t>(std::floor(usable / static_cast<long double>(value_size + overhead)));
}

PreloadPlan PreloadPlan::for_budget(uint64_t memory_budget, double target_fill,
                                    uint64_t value_size, uint64_t overhead) {
  PreloadPlan p;
  p.memory_budget = memory_budget;
  p.target_fill = target_fill;
  p.value_size = value_size;
  p.overhead_per_key = overhead;
  p.key_count = compute_preload_keycount(memory_budget, target_fill, value_size, overhead);
  return p;
}

void PreloadPlan::validate() const {
  if (value_size == 0) invalid_parameter("preload: value_size must be > 0");
  if (key_count != compute_preload_keycount(memory_budget, target_fill, value_size, overhead_per_key)) {
    invalid_parameter("preload: key_count disagrees with the memory budget sizing");
  }
}

std::string make_value(size_t size, uint64_t seed) {
  std::string v(size, ' ');
  Xoshiro256 rng(seed);
  for (auto& ch : v) ch = static_cast<char>('!' + rng() % 94);
  return v;
}

PreloadReport preload(const resp::Endpoint& endpoint, const PreloadPlan& plan,
                      const zipf::KeyMapping& mapping, const PreloadOptions& options) {
  plan.validate();
  if (mapping.key_count() != plan.key_count) {
    invalid_parameter("preload: key mapping covers " + std::to_string(mapping.key_count()) +
                      " keys, plan has " + std::to_string(plan.key_count));
  }
  const uint32_t parallelism =
      static_cast<uint32_t>(std::clamp<uint64_t>(options.parallelism, 1, std::max<uint64_t>(1, plan.key_count)));
  const uint32_t depth = std::max<uint32_t>(1, options.pipeline_depth);
  const std::string value = make_value(plan.value_size, options.value_seed);

  PreloadReport report;
  report.key_count = plan.key_count;
  const auto start = Clock::now();

  struct Chunk {
    RankRange range;
    uint64_t done_through = 0;  // last rank acknowledged
    uint64_t written = 0;
    uint64_t errors = 0;
    std::string first_error;
    std::optional<std::string> fatal;
  };
  std::vector<Chunk> chunks(parallelism);
  const uint64_t per = plan.key_count / parallelism;
  const uint64_t extra = plan.key_count % parallelism;
  uint64_t next = 1;
  for (uint32_t i = 0; i < parallelism; ++i) {
    const uint64_t len = per + (i < extra ? 1 : 0);
    chunks[i].range = {next, next + len - 1};
    chunks[i].done_through = next - 1;
    next += len;
  }

  std::atomic<uint64_t> progress{0};
  std::atomic<uint32_t> finished{0};
  auto work = [&](Chunk& chunk) {
    try {
      auto conn = resp::Connection::open(endpoint);
      resp::CommandBatch batch(depth);
      std::vector<resp::Reply> replies;
      uint64_t rank = chunk.range.first;
      while (rank <= chunk.range.last) {
        batch.clear();
        const uint64_t batch_first = rank;
        while (!batch.full() && rank <= chunk.range.last) {
          auto& cmd = batch.append(resp::CommandKind::kSet);
          mapping.append_key(rank, cmd.key);
          cmd.value = value;
          ++rank;
        }
        conn.execute(batch.commands(), replies);
        for (const auto& r : replies) {
          if (r.is_error()) {
            if (chunk.errors++ == 0) chunk.first_error = r.payload;
          } else {
            ++chunk.written;
          }
        }
        chunk.done_through = batch_first + batch.size() - 1;
        progress += batch.size();
      }
    } catch (const Error& e) {
      chunk.fatal = e.what();
    }
    ++finished;
  };

  std::vector<std::thread> threads;
  threads.reserve(parallelism);
  for (auto& chunk : chunks) threads.emplace_back(work, std::ref(chunk));
  auto last_print = Clock::now();
  while (finished.load() < parallelism) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    if (options.progress && Clock::now() - last_print >= std::chrono::seconds(1)) {
      last_print = Clock::now();
      std::cerr << "[kvbench] preload keys=" << progress.load() << "/" << plan.key_count << "\n";
    }
  }
  for (auto& t : threads) t.join();
  report.elapsed_s = seconds_between(start, Clock::now());

  std::vector<RankRange> completed;
  std::string fatal;
  for (const auto& c : chunks) {
    report.keys_written += c.written;
    report.errors += c.errors;
    if (report.first_error.empty()) report.first_error = c.first_error;
    if (c.done_through >= c.range.first) completed.push_back({c.range.first, c.done_through});
    if (c.fatal && fatal.empty()) fatal = *c.fatal;
  }
  if (!fatal.empty()) {
    throw PreloadInterrupted("preload interrupted: " + fatal, std::move(completed));
  }
  report.failed = report.errors > 0;
  try {
    auto conn = resp::Connection::open(endpoint);
    const auto info = conn.fetch_info("memory");
    if (auto it = info.find("used_memory"); it != info.end()) {
      report.used_memory = std::stoull(it->second);
    }
  } catch (const std::exception&) {
    // used_memory stays unset; the key count is what matters here.
  }
  if (options.progress) {
    std::cerr << "[kvbench] preload done keys=" << report.keys_written << " errors=" << report.errors
              << " elapsed_s=" << report.elapsed_s << "\n";
  }
  return report;
}

uint64_t verify_residency(const resp::Endpoint& endpoint, const zipf::KeyMapping& mapping,
                          uint64_t sample, uint64_t seed) {
  std::vector<uint64_t> ranks = {1, mapping.key_count()};
  Xoshiro256 rng(seed);
  for (uint64_t i = 0; i < sample; ++i) ranks.push_back(1 + rng() % mapping.key_count());
  auto conn = resp::Connection::open(endpoint);
  resp::CommandBatch batch(64);
  std::vector<resp::Reply> replies;
  uint64_t misses = 0;
  for (size_t i = 0; i < ranks.size();) {
    batch.clear();
    while (!batch.full() && i < ranks.size()) mapping.append_key(ranks[i++], batch.append(resp::CommandKind::kGet).key);
    conn.execute(batch.commands(), replies);
    for (const auto& r : replies) {
      if (r.kind == resp::ReplyKind::kNil) ++misses;
    }
  }
  return misses;
}

const char* to_string(RunState state) {
  switch (state) {
    case RunState::kWarming: return "warming";
    case RunState::kMeasuring: return "measuring";
    case RunState::kDraining: return "draining";
    case RunState::kDone: return "done";
    case RunState::kAborted: return "aborted";
  }
  return "?";
}

RunHandle::RunHandle(const WorkloadSpec& spec, uint32_t concurrency)
    : spec_(&spec), concurrency_(concurrency), started_at_(std::chrono::system_clock::now()) {}

bool RunHandle::advance(RunState next) {
  RunState cur = state_.load();
  for (;;) {
    if (cur == RunState::kDone || cur == RunState::kAborted) return false;
    if (next != RunState::kAborted && static_cast<int>(next) <= static_cast<int>(cur)) return false;
    if (next == RunState::kDone && cur != RunState::kDraining) return false;
    if (state_.compare_exchange_weak(cur, next)) return true;
  }
}

uint64_t run_seed_for(uint64_t base_seed, uint32_t concurrency, uint32_t repetition) {
  return derive_seed(derive_seed(base_seed, concurrency), repetition);
}

uint64_t worker_key_seed(uint64_t run_seed, uint32_t worker) {
  return derive_seed(derive_seed(run_seed, worker), 1);
}

uint64_t worker_op_seed(uint64_t run_seed, uint32_t worker) {
  return derive_seed(derive_seed(run_seed, worker), 2);
}

WorkerStream::WorkerStream(const zipf::ZipfianTable& table, double set_ratio, uint64_t run_seed,
                           uint32_t worker)
    : keys_(table, worker_key_seed(run_seed, worker)),
      ops_(worker_op_seed(run_seed, worker)),
      set_ratio_(set_ratio) {}

WorkerStream::Op WorkerStream::next() {
  Op op;
  op.rank = keys_.next();
  op.is_set = ops_.next_double() < set_ratio_;
  return op;
}

namespace {

struct WorkerTally {
  LatencyRecorder recorder;
  uint64_t ops = 0;
  uint64_t gets = 0;
  uint64_t sets = 0;
  uint64_t get_misses = 0;
  uint64_t warmup_ops = 0;
  std::vector<uint64_t> ramp;
  resp::ConnectionCounters counters;
  bool dropped = false;
  std::string drop_reason;
  Clock::time_point finished_at{};
};

class ResourceSampler {
 public:
  ResourceSampler(const resp::Endpoint& endpoint, const RunOptions& options,
                  const std::vector<metrics::ResourceSample>* external, Clock::time_point t0)
      : endpoint_(endpoint), options_(options), external_(external), t0_(t0) {}

  // Samples at `from`, then every interval, then once more at `to` (or on stop).
  void start(Clock::time_point from, Clock::time_point to) {
    thread_ = std::thread([this, from, to] { loop(from, to); });
  }

  void stop() {
    {
      std::lock_guard lock(mu_);
      stop_ = true;
    }
    cv_.notify_all();
    if (thread_.joinable()) thread_.join();
  }

  std::vector<metrics::ResourceSample> take() { return std::move(series_); }
  const std::string& warning() const { return warning_; }

 private:
  void take_sample(resp::Connection* conn) {
    const double ts = seconds_between(t0_, Clock::now());
    if (conn != nullptr && conn->usable()) {
      try {
        series_.push_back(metrics::sample_resources(*conn, options_.info_schema, ts, external_));
        return;
      } catch (const Error& e) {
        warning_ = std::string("resource sampling connection lost: ") + e.what();
      }
    }
    if (external_ != nullptr && !external_->empty()) {
      const metrics::ResourceSample* best = &external_->front();
      for (const auto& row : *external_) {
        if (row.timestamp_s <= ts) best = &row;
      }
      series_.push_back(*best);
    } else {
      metrics::ResourceSample missing;
      missing.timestamp_s = ts;
      series_.push_back(missing);
    }
  }

  bool wait_until(Clock::time_point when) {
    std::unique_lock lock(mu_);
    return !cv_.wait_until(lock, when, [this] { return stop_; });
  }

  void loop(Clock::time_point from, Clock::time_point to) {
    std::optional<resp::Connection> conn;
    try {
      conn.emplace(resp::Connection::open(endpoint_));
    } catch (const Error& e) {
      warning_ = std::string("resource sampling connection failed: ") + e.what();
    }
    resp::Connection* c = conn ? &*conn : nullptr;
    if (!wait_until(from)) return;
    take_sample(c);
    const auto step = to_duration(std::max(0.001, options_.resource_interval_s));
    for (auto next = from + step; next < to; next += step) {
      if (!wait_until(next)) {
        take_sample(c);
        return;
      }
      take_sample(c);
    }
    wait_until(to);
    take_sample(c);
  }

  resp::Endpoint endpoint_;
  const RunOptions& options_;
  const std::vector<metrics::ResourceSample>* external_;
  Clock::time_point t0_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool stop_ = false;
  std::vector<metrics::ResourceSample> series_;
  std::string warning_;
};

void progress_line(const RunOptions& options, const WorkloadSpec& spec, uint32_t concurrency,
                   RunState state, const std::string& extra = {}) {
  if (!options.progress) return;
  std::cerr << "[kvbench] run system=" << options.system << " workload=" << spec.name
            << " concurrency=" << concurrency << " rep=" << options.repetition
            << " state=" << to_string(state) << extra << "\n";
}

}  // namespace

RunResult run(const resp::Endpoint& endpoint, const WorkloadSpec& spec, uint32_t concurrency,
              const RunOptions& options) {
  spec.validate();
  if (concurrency == 0) invalid_parameter("run: concurrency must be >= 1");

  std::unique_ptr<zipf::ZipfianTable> owned_table;
  const zipf::ZipfianTable* table = options.table;
  if (table == nullptr || table->key_count() != spec.key_count || table->params().skew != spec.skew) {
    owned_table = std::make_unique<zipf::ZipfianTable>(zipf::ZipfianParams{spec.key_count, spec.skew});
    table = owned_table.get();
  }
  const zipf::KeyMapping mapping(options.key_mapping, spec.key_count);

  RunResult result;
  result.system = options.system;
  result.workload = spec.name;
  result.set_ratio = spec.set_ratio;
  result.concurrency = concurrency;
  result.repetition = options.repetition;
  result.pipeline_depth = spec.pipeline_depth;
  result.seeds.base_seed = spec.base_seed;
  result.seeds.run_seed =
      options.run_seed.value_or(run_seed_for(spec.base_seed, concurrency, options.repetition));
  const uint64_t run_seed = result.seeds.run_seed;
  const std::string value = make_value(spec.value_size, derive_seed(run_seed, 0x76616c7565));

  std::vector<metrics::ResourceSample> external;
  if (!options.resource_file.empty()) external = metrics::load_resource_csv(options.resource_file);

  RunHandle handle(spec, concurrency);
  std::vector<std::optional<resp::Connection>> conns(concurrency);
  std::vector<WorkerTally> tallies;
  tallies.reserve(concurrency);
  for (uint32_t w = 0; w < concurrency; ++w) {
    tallies.emplace_back();
    tallies.back().recorder = LatencyRecorder::adaptive(options.exact_limit);
  }

  uint32_t connected = 0;
  for (uint32_t w = 0; w < concurrency; ++w) {
    try {
      conns[w].emplace(resp::Connection::open(endpoint));
      ++connected;
    } catch (const Error& e) {
      tallies[w].dropped = true;
      tallies[w].drop_reason = e.what();
    }
  }
  // At least 90% of connections must stay alive for the run to count.
  const uint32_t min_alive = static_cast<uint32_t>(std::ceil(0.9 * concurrency));
  std::atomic<uint32_t> alive{connected};
  std::atomic<bool> abort_flag{connected < min_alive};

  const auto t0 = Clock::now();
  const auto warm_end = t0 + to_duration(spec.warmup_s);
  const auto end = t0 + to_duration(spec.duration_s);
  progress_line(options, spec, concurrency, RunState::kWarming);

  auto worker = [&](uint32_t w) {
    WorkerTally& tally = tallies[w];
    resp::Connection& conn = *conns[w];
    WorkerStream stream(*table, spec.set_ratio, run_seed, w);
    resp::CommandBatch batch(spec.pipeline_depth);
    std::vector<bool> is_set(spec.pipeline_depth);
    std::vector<resp::Reply> replies;
    while (!abort_flag.load(std::memory_order_relaxed)) {
      const auto batch_start = Clock::now();
      if (batch_start >= end) break;
      batch.clear();
      for (uint32_t i = 0; i < spec.pipeline_depth; ++i) {
        const auto op = stream.next();
        is_set[i] = op.is_set;
        auto& cmd = batch.append(op.is_set ? resp::CommandKind::kSet : resp::CommandKind::kGet);
        mapping.append_key(op.rank, cmd.key);
        if (op.is_set) cmd.value = value;
      }
      try {
        conn.execute(batch.commands(), replies);
      } catch (const Error& e) {
        tally.dropped = true;
        tally.drop_reason = e.what();
        if (--alive < min_alive) abort_flag = true;
        break;
      }
      const auto done = Clock::now();
      const bool measured = batch_start >= warm_end;
      for (size_t i = 0; i < replies.size(); ++i) {
        const auto& r = replies[i];
        if (!is_set[i] && r.kind == resp::ReplyKind::kNil) ++tally.get_misses;
        if (r.is_error()) continue;
        if (measured) {
          tally.recorder.record(r.rtt);
          ++tally.ops;
          ++(is_set[i] ? tally.sets : tally.gets);
        } else {
          ++tally.warmup_ops;
          const auto sec = static_cast<size_t>(seconds_between(t0, done));
          if (tally.ramp.size() <= sec) tally.ramp.resize(sec + 1, 0);
          ++tally.ramp[sec];
        }
      }
    }
    tally.counters = conn.counters();
    tally.finished_at = Clock::now();
  };

  ResourceSampler sampler(endpoint, options, &external, t0);
  if (options.sample_resources) sampler.start(warm_end, end);

  std::vector<std::thread> threads;
  threads.reserve(concurrency);
  for (uint32_t w = 0; w < concurrency; ++w) {
    if (conns[w]) threads.emplace_back(worker, w);
  }

  auto wait_phase = [&](Clock::time_point until) {
    while (!abort_flag.load() && Clock::now() < until) {
      std::this_thread::sleep_for(std::min<Clock::duration>(until - Clock::now(), std::chrono::milliseconds(20)));
    }
  };
  wait_phase(warm_end);
  if (!abort_flag && handle.advance(RunState::kMeasuring)) {
    progress_line(options, spec, concurrency, RunState::kMeasuring);
  }
  wait_phase(end);
  if (!abort_flag && handle.advance(RunState::kDraining)) {
    progress_line(options, spec, concurrency, RunState::kDraining);
  }
  for (auto& t : threads) t.join();
  sampler.stop();

  LatencyRecorder merged = LatencyRecorder::adaptive(options.exact_limit);
  auto measured_end = warm_end;
  for (auto& t : tallies) {
    merged.merge(t.recorder);
    result.ops_total += t.ops;
    result.get_ops += t.gets;
    result.set_ops += t.sets;
    result.get_misses += t.get_misses;
    result.warmup_ops += t.warmup_ops;
    if (result.warmup_ramp.size() < t.ramp.size()) result.warmup_ramp.resize(t.ramp.size(), 0);
    for (size_t i = 0; i < t.ramp.size(); ++i) result.warmup_ramp[i] += t.ramp[i];
    result.commands_sent += t.counters.commands_sent;
    result.replies_error += t.counters.error_replies;
    result.replies_ok += t.counters.replies_received - t.counters.error_replies;
    result.in_flight_lost += t.counters.in_flight();
    if (t.dropped) {
      ++result.connections_dropped;
      result.warnings.push_back("connection dropped: " + t.drop_reason);
    }
    measured_end = std::max(measured_end, t.finished_at);
  }
  result.errors_total = result.replies_error + result.in_flight_lost;
  result.elapsed_measured_s = seconds_between(warm_end, measured_end);
  result.throughput = result.elapsed_measured_s > 0.0
                          ? static_cast<double>(result.ops_total) / result.elapsed_measured_s
                          : 0.0;
  result.recorder_mode = merged.mode();
  result.latency_out_of_range = merged.out_of_range();
  if (merged.count() > 0) {
    const auto us = [&](double k) { return merged.percentile(k).count() / 1000.0; };
    result.p50_us = us(50.0);
    result.p99_us = us(99.0);
    result.p999_us = us(99.9);
  }
  result.resource_series = sampler.take();
  if (!sampler.warning().empty()) result.warnings.push_back(sampler.warning());
  if (result.get_misses > 0) {
    result.warnings.push_back(std::to_string(result.get_misses) +
                              " GET misses: keys evicted or preload incomplete");
  }

  const uint32_t survivors = concurrency - result.connections_dropped;
  if (survivors < min_alive) {
    result.failed = true;
    result.failure_reason = "only " + std::to_string(survivors) + " of " +
                            std::to_string(concurrency) + " connections survived";
  } else if (result.commands_sent > 0 &&
             static_cast<double>(result.errors_total) > 0.01 * static_cast<double>(result.commands_sent)) {
    result.failed = true;
    result.failure_reason = "error rate " + std::to_string(result.errors_total) + "/" +
                            std::to_string(result.commands_sent) + " exceeds 1%";
  } else if (result.ops_total == 0) {
    result.failed = true;
    result.failure_reason = "no operations completed in the measurement window";
  }

  if (abort_flag || result.failed) {
    handle.abort();
  } else {
    handle.advance(RunState::kDone);
  }
  progress_line(options, spec, concurrency, handle.state(),
                " ops=" + std::to_string(result.ops_total) +
                    " throughput=" + std::to_string(static_cast<uint64_t>(result.throughput)) +
                    (result.failed ? " failed=\"" + result.failure_reason + "\"" : std::string()));
  return result;
}

std::vector<RunResult> sweep(const resp::Endpoint& endpoint, const WorkloadSpec& spec,
                             const SweepOptions& options) {
  spec.validate();
  if (options.repetitions == 0) invalid_parameter("sweep: repetitions must be >= 1");
  std::optional<zipf::ZipfianTable> owned;
  const zipf::ZipfianTable* table = options.run.table;
  if (table == nullptr || table->key_count() != spec.key_count || table->params().skew != spec.skew) {
    table = &owned.emplace(zipf::ZipfianParams{spec.key_count, spec.skew});
  }
  std::vector<RunResult> results;
  bool first = true;
  for (uint32_t level : spec.concurrency_levels) {
    for (uint32_t rep = 1; rep <= options.repetitions; ++rep) {
      if (options.skip && options.skip(level, rep)) continue;
      if (!first && options.cooldown_s > 0.0) {
        std::this_thread::sleep_for(std::chrono::duration<double>(options.cooldown_s));
      }
      first = false;
      RunOptions ro = options.run;
      ro.repetition = rep;
      ro.run_seed.reset();
      ro.table = table;
      RunResult r;
      try {
        r = run(endpoint, spec, level, ro);
      } catch (const Error& e) {
        r = RunResult{};
        r.system = ro.system;
        r.workload = spec.name;
        r.set_ratio = spec.set_ratio;
        r.concurrency = level;
        r.repetition = rep;
        r.pipeline_depth = spec.pipeline_depth;
        r.seeds = {spec.base_seed, run_seed_for(spec.base_seed, level, rep)};
        r.failed = true;
        r.failure_reason = e.what();
      }
      if (options.on_result) options.on_result(r);
      results.push_back(std::move(r));
    }
  }
  return results;
}

}  // namespace kvbench::workload
