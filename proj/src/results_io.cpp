#include "kvbench/results_io.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "kvbench/error.hpp"

namespace kvbench::results {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json sample_to_json(const metrics::ResourceSample& s) {
  json j = {{"timestamp_s", s.timestamp_s}, {"source", metrics::to_string(s.source)}};
  j["cpu_seconds_total"] = s.cpu_seconds_total ? json(*s.cpu_seconds_total) : json(nullptr);
  j["used_memory"] = s.used_memory ? json(*s.used_memory) : json(nullptr);
  return j;
}

metrics::ResourceSample sample_from_json(const json& j) {
  metrics::ResourceSample s;
  s.timestamp_s = j.at("timestamp_s").get<double>();
  s.source = metrics::parse_resource_source(j.at("source").get<std::string>());
  if (!j.at("cpu_seconds_total").is_null()) s.cpu_seconds_total = j.at("cpu_seconds_total").get<double>();
  if (!j.at("used_memory").is_null()) s.used_memory = j.at("used_memory").get<uint64_t>();
  return s;
}

}  // namespace

json to_json(const metrics::RunResult& r) {
  json series = json::array();
  for (const auto& s : r.resource_series) series.push_back(sample_to_json(s));
  return {
      {"schema_version", metrics::RunResult::kSchemaVersion},
      {"system", r.system},
      {"workload", r.workload},
      {"set_ratio", r.set_ratio},
      {"concurrency", r.concurrency},
      {"repetition", r.repetition},
      {"pipeline_depth", r.pipeline_depth},
      {"ops_total", r.ops_total},
      {"get_ops", r.get_ops},
      {"set_ops", r.set_ops},
      {"get_misses", r.get_misses},
      {"elapsed_measured_s", r.elapsed_measured_s},
      {"throughput", r.throughput},
      {"p50_us", r.p50_us},
      {"p99_us", r.p99_us},
      {"p999_us", r.p999_us},
      {"recorder_mode", metrics::to_string(r.recorder_mode)},
      {"latency_out_of_range", r.latency_out_of_range},
      {"errors_total", r.errors_total},
      {"commands_sent", r.commands_sent},
      {"replies_ok", r.replies_ok},
      {"replies_error", r.replies_error},
      {"in_flight_lost", r.in_flight_lost},
      {"connections_dropped", r.connections_dropped},
      {"warmup_ops", r.warmup_ops},
      {"warmup_ramp", r.warmup_ramp},
      {"resource_series", std::move(series)},
      {"seeds", {{"base_seed", r.seeds.base_seed}, {"run_seed", r.seeds.run_seed}}},
      {"failed", r.failed},
      {"failure_reason", r.failure_reason},
      {"warnings", r.warnings},
  };
}

metrics::RunResult run_result_from_json(const json& j) {
  const int version = j.at("schema_version").get<int>();
  if (version != metrics::RunResult::kSchemaVersion) {
    throw Error(ErrorCode::kConfig, "unsupported result schema_version " + std::to_string(version));
  }
  metrics::RunResult r;
  r.system = j.at("system").get<std::string>();
  r.workload = j.at("workload").get<std::string>();
  r.set_ratio = j.at("set_ratio").get<double>();
  r.concurrency = j.at("concurrency").get<uint32_t>();
  r.repetition = j.at("repetition").get<uint32_t>();
  r.pipeline_depth = j.at("pipeline_depth").get<uint32_t>();
  r.ops_total = j.at("ops_total").get<uint64_t>();
  r.get_ops = j.at("get_ops").get<uint64_t>();
  r.set_ops = j.at("set_ops").get<uint64_t>();
  r.get_misses = j.at("get_misses").get<uint64_t>();
  r.elapsed_measured_s = j.at("elapsed_measured_s").get<double>();
  r.throughput = j.at("throughput").get<double>();
  r.p50_us = j.at("p50_us").get<double>();
  r.p99_us = j.at("p99_us").get<double>();
  r.p999_us = j.at("p999_us").get<double>();
  r.recorder_mode = j.at("recorder_mode").get<std::string>() == "bucketed"
                        ? metrics::RecorderMode::kBucketed
                        : metrics::RecorderMode::kExact;
  r.latency_out_of_range = j.at("latency_out_of_range").get<uint64_t>();
  r.errors_total = j.at("errors_total").get<uint64_t>();
  r.commands_sent = j.at("commands_sent").get<uint64_t>();
  r.replies_ok = j.at("replies_ok").get<uint64_t>();
  r.replies_error = j.at("replies_error").get<uint64_t>();
  r.in_flight_lost = j.at("in_flight_lost").get<uint64_t>();
  r.connections_dropped = j.at("connections_dropped").get<uint32_t>();
  r.warmup_ops = j.at("warmup_ops").get<uint64_t>();
  r.warmup_ramp = j.at("warmup_ramp").get<std::vector<uint64_t>>();
  for (const auto& s : j.at("resource_series")) r.resource_series.push_back(sample_from_json(s));
  r.seeds.base_seed = j.at("seeds").at("base_seed").get<uint64_t>();
  r.seeds.run_seed = j.at("seeds").at("run_seed").get<uint64_t>();
  r.failed = j.at("failed").get<bool>();
  r.failure_reason = j.at("failure_reason").get<std::string>();
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

std::string sanitize_component(std::string s) {
  for (auto& c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return s;
}

std::string result_file_name(const std::string& system, const std::string& workload) {
  return sanitize_component(system) + "__" + sanitize_component(workload) + ".jsonl";
}

std::vector<metrics::RunResult> ResultLog::load(std::vector<std::string>* warnings) const {
  std::vector<metrics::RunResult> out;
  std::ifstream in(path_, std::ios::binary);
  if (!in) return out;
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  size_t pos = 0;
  size_t line_no = 0;
  while (pos < content.size()) {
    const size_t nl = content.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      if (warnings) warnings->push_back(path_.string() + ": ignoring unterminated trailing record");
      break;
    }
    const std::string line = content.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      out.push_back(run_result_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (warnings) {
        warnings->push_back(path_.string() + ":" + std::to_string(line_no) + ": skipping bad record: " + e.what());
      }
    }
  }
  return out;
}

bool ResultLog::repair() const {
  std::error_code ec;
  if (!fs::exists(path_, ec)) return false;
  std::ifstream in(path_, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string content = ss.str();
  if (content.empty() || content.back() == '\n') return false;
  const size_t keep = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
  fs::resize_file(path_, keep);
  return true;
}

void ResultLog::append(const metrics::RunResult& r) const {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  const std::string line = to_json(r).dump() + "\n";
  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot open " + path_.string() + ": " + std::strerror(errno));
  const ssize_t n = ::write(fd, line.data(), line.size());
  const int err = errno;
  ::fsync(fd);
  ::close(fd);
  if (n != static_cast<ssize_t>(line.size())) {
    throw Error(ErrorCode::kIo, "short write to " + path_.string() + ": " + std::strerror(err));
  }
}

std::vector<metrics::RunResult> load_results_dir(const fs::path& dir, std::vector<std::string>* warnings) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return {};
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<metrics::RunResult> out;
  for (const auto& f : files) {
    auto part = ResultLog(f).load(warnings);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace kvbench::results
