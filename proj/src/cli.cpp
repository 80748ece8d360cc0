#include "kvbench/cli.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <set>

#include "CLI11.hpp"
#include "kvbench/config.hpp"
#include "kvbench/report.hpp"
#include "kvbench/results_io.hpp"

namespace kvbench::cli {
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string output;
  bool quiet = false;
};

class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) {
    fs::create_directories(dir);
    const auto path = dir / ".kvbench.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(ErrorCode::kIo, "output directory " + dir.string() + " is locked by another kvbench process");
    }
  }
  ~OutputLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

 private:
  int fd_ = -1;
};

config::BenchmarkConfig load(const Globals& g) {
  if (g.config_path.empty()) throw UsageError("no config given (use --config or KVBENCH_CONFIG)");
  auto cfg = config::load_config(g.config_path);
  if (!g.output.empty()) cfg.output_dir = g.output;
  if (g.seed) {
    for (auto& w : cfg.workloads) w.base_seed = *g.seed;
  }
  return cfg;
}

const config::Target& require_target(const config::BenchmarkConfig& cfg, const std::string& name) {
  if (const auto* t = cfg.find_target(name)) return *t;
  std::string known;
  for (const auto& t : cfg.targets) known += (known.empty() ? "" : ", ") + t.name;
  throw UsageError("unknown target '" + name + "' (configured: " + known + ")");
}

const workload::WorkloadSpec& require_workload(const config::BenchmarkConfig& cfg, const std::string& name) {
  if (name.empty()) {
    if (cfg.workloads.size() == 1) return cfg.workloads.front();
    throw UsageError("--workload is required when the config defines several workloads");
  }
  if (const auto* w = cfg.find_workload(name)) return *w;
  throw UsageError("unknown workload '" + name + "'");
}

int cmd_preload(const Globals& g, const std::string& target_name, uint64_t verify_sample, std::ostream& out,
                std::ostream& err) {
  const auto cfg = load(g);
  const auto& target = require_target(cfg, target_name);
  const auto plan = cfg.preload.plan();
  const zipf::KeyMapping mapping(cfg.key_mapping, plan.key_count);
  workload::PreloadOptions opts;
  opts.parallelism = cfg.preload.parallelism;
  opts.pipeline_depth = cfg.preload.pipeline_depth;
  opts.progress = !g.quiet;

  out << fmt::format("preload {}: {} keys x {} B (budget {} B, fill {})\n", target.name, plan.key_count,
                     plan.value_size, plan.memory_budget, plan.target_fill);
  const auto rep = workload::preload(target.endpoint, plan, mapping, opts);
  out << fmt::format("key count: {}\n", rep.key_count);
  out << fmt::format("keys written: {}\n", rep.keys_written);
  out << fmt::format("elapsed: {:.3f} s\n", rep.elapsed_s);
  if (rep.used_memory) {
    out << fmt::format("used memory: {} B\n", *rep.used_memory);
  } else {
    out << "used memory: unavailable\n";
  }
  if (rep.failed) {
    err << "preload failed: " << rep.first_error << "\n";
    return kExitFailure;
  }
  if (verify_sample > 0) {
    const auto missing = workload::verify_residency(target.endpoint, mapping, verify_sample, opts.value_seed);
    if (missing > 0) {
      err << fmt::format("residency check: {} of {} sampled keys missing\n", missing, verify_sample + 2);
      return kExitFailure;
    }
    out << fmt::format("residency check: {} sampled keys present\n", verify_sample + 2);
  }
  return kExitOk;
}

int cmd_sweep(const Globals& g, const std::string& target_name, const std::string& workload_name,
              std::ostream& out, std::ostream& err) {
  const auto cfg = load(g);
  const auto& target = require_target(cfg, target_name);
  const auto& spec = require_workload(cfg, workload_name);

  OutputLock lock(cfg.output_dir);
  fs::create_directories(cfg.results_dir());
  const results::ResultLog log(cfg.results_dir() / results::result_file_name(target.name, spec.name));
  if (log.repair()) err << "dropped a torn trailing record from " << log.path().string() << "\n";
  std::vector<std::string> warnings;
  const auto existing = log.load(&warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  std::set<std::pair<uint32_t, uint32_t>> present;
  for (const auto& r : existing) {
    if (r.system == target.name && r.workload == spec.name) present.insert({r.concurrency, r.repetition});
  }
  size_t missing = 0;
  for (auto level : spec.concurrency_levels) {
    for (uint32_t rep = 1; rep <= cfg.repetitions; ++rep) missing += !present.count({level, rep});
  }
  if (missing == 0) {
    out << fmt::format("all cells present for {} / {} ({} records); nothing to run\n", target.name, spec.name,
                       present.size());
    return kExitOk;
  }

  const auto missing_keys =
      workload::verify_residency(target.endpoint, zipf::KeyMapping(cfg.key_mapping, spec.key_count), 16, spec.base_seed);
  if (missing_keys > 0) {
    err << fmt::format("warning: {} of 18 sampled keys absent on {}; run 'kvbench preload' first\n", missing_keys,
                       target.name);
  }

  const zipf::ZipfianTable table({spec.key_count, spec.skew});
  workload::SweepOptions opts;
  opts.repetitions = cfg.repetitions;
  opts.cooldown_s = cfg.cooldown_s;
  opts.run.system = target.name;
  opts.run.key_mapping = cfg.key_mapping;
  opts.run.table = &table;
  opts.run.info_schema = target.info_schema;
  opts.run.resource_interval_s = cfg.resource_interval_s;
  opts.run.resource_file = target.resource_file;
  opts.run.progress = !g.quiet;
  opts.skip = [&](uint32_t level, uint32_t rep) { return present.count({level, rep}) > 0; };
  size_t succeeded = 0;
  size_t executed = 0;
  opts.on_result = [&](const metrics::RunResult& r) {
    log.append(r);
    ++executed;
    if (r.failed) {
      err << fmt::format("run c={} rep={} failed: {}\n", r.concurrency, r.repetition, r.failure_reason);
    } else {
      ++succeeded;
      out << fmt::format("c={} rep={} throughput={:.1f} ops/s p99={}us p999={}us\n", r.concurrency, r.repetition,
                         r.throughput, std::llround(r.p99_us), std::llround(r.p999_us));
    }
  };
  workload::sweep(target.endpoint, spec, opts);
  out << fmt::format("sweep {} / {}: {} cells run, {} succeeded, {} skipped as present\n", target.name, spec.name,
                     executed, succeeded, present.size());
  if (succeeded == 0) {
    err << "no run succeeded\n";
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_compare(const Globals& g, const std::string& metric_name, std::ostream& out, std::ostream& err) {
  const auto metric = report::parse_compare_metric(metric_name);
  if (!metric) {
    std::string valid;
    for (const auto& n : report::compare_metric_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw UsageError("unknown metric '" + metric_name + "'; valid metrics: " + valid);
  }
  const auto cfg = load(g);
  OutputLock lock(cfg.output_dir);
  std::vector<std::string> warnings;
  const auto results = results::load_results_dir(cfg.results_dir(), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";

  const auto outcome = report::compare_cells(results, *metric, cfg.baseline_system);
  for (const auto& w : outcome.warnings) err << "warning: " << w << "\n";
  if (outcome.reports.empty()) {
    err << "nothing to compare: need results for " << cfg.baseline_system
        << " and at least one other system with >= 2 repetitions per cell\n";
    return kExitFailure;
  }
  const auto path = cfg.output_dir / ("compare_" + std::string(report::to_string(*metric)) + ".jsonl");
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  for (const auto& c : outcome.reports) file << report::to_json(c).dump() << "\n";
  out << report::compare_table_text(outcome.reports);
  out << fmt::format("{} comparisons written to {}\n", outcome.reports.size(), path.string());
  return kExitOk;
}

int cmd_report(const Globals& g, std::ostream& out, std::ostream& err) {
  const auto cfg = load(g);
  OutputLock lock(cfg.output_dir);
  std::vector<std::string> warnings;
  const auto results = results::load_results_dir(cfg.results_dir(), &warnings);
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  if (results.empty()) {
    err << "no results under " << cfg.results_dir().string() << "\n";
    return kExitFailure;
  }
  report::ReportSettings settings;
  settings.baseline_system = cfg.baseline_system;
  for (const auto& t : cfg.targets) settings.systems.push_back(t.name);
  settings.memory_budget = cfg.preload.memory_budget;
  settings.weights = cfg.weights;
  settings.configured_repetitions = cfg.repetitions;
  settings.preload_key_count = cfg.preload.plan().key_count;
  const auto files = report::render_report(results, settings);
  report::write_report(cfg.report_dir(), files);
  out << files.at("summary.txt");
  out << fmt::format("{} files written to {}\n", files.size(), cfg.report_dir().string());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Key-value store benchmark driver", "kvbench"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Benchmark config (JSON)")->envname("KVBENCH_CONFIG");
  app.add_option("--seed", g.seed, "Override every workload's base seed")->envname("KVBENCH_SEED");
  app.add_option("--output", g.output, "Override the output directory")->envname("KVBENCH_OUTPUT");
  app.add_flag("--quiet", g.quiet, "Suppress progress lines");

  std::string target;
  std::string workload_name;
  std::string metric;
  uint64_t verify_sample = 1000;

  auto* preload = app.add_subcommand("preload", "Load the key space into a target");
  preload->add_option("--target", target, "Target name")->required();
  preload->add_option("--verify-sample", verify_sample, "Random keys read back after loading (0 skips)");

  auto* sweep = app.add_subcommand("sweep", "Run every concurrency x repetition cell, resuming if interrupted");
  sweep->add_option("--target", target, "Target name")->required();
  sweep->add_option("--workload", workload_name, "Workload name");

  auto* compare = app.add_subcommand("compare", "Welch t-test per cell against the baseline");
  compare->add_option("--metric", metric, "throughput | p99 | p999")->required();

  auto* rep = app.add_subcommand("report", "Write the summary table and plot series");

  std::vector<std::string> storage;
  storage.push_back("kvbench");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*preload) return cmd_preload(g, target, verify_sample, out, err);
    if (*sweep) return cmd_sweep(g, target, workload_name, out, err);
    if (*compare) return cmd_compare(g, metric, out, err);
    if (*rep) return cmd_report(g, out, err);
  } catch (const UsageError& e) {
    err << "kvbench: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "kvbench: " << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kConfig ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "kvbench: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace kvbench::cli
