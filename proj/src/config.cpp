#include "kvbench/config.hpp"

#include <fstream>
#include <set>

#include "kvbench/error.hpp"

namespace kvbench::config {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& what) { throw Error(ErrorCode::kConfig, "config: " + what); }

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) config_error(where + " must be an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) config_error("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(where + "." + key + ": " + e.what());
  }
}

template <typename T>
void maybe(const json& j, const char* key, const std::string& where, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, where);
}

Target target_from_json(const json& j, size_t index) {
  const std::string where = "targets[" + std::to_string(index) + "]";
  reject_unknown(j, {"name", "host", "port", "connect_timeout_ms", "io_timeout_ms", "password",
                     "info_schema", "resource_file"},
                 where);
  Target t;
  t.name = get<std::string>(j, "name", where);
  t.endpoint.host = get<std::string>(j, "host", where);
  const auto port = get<int64_t>(j, "port", where);
  if (port < 1 || port > 65535) config_error(where + ".port must be in 1..65535");
  t.endpoint.port = static_cast<uint16_t>(port);
  if (j.contains("connect_timeout_ms")) {
    t.endpoint.connect_timeout = std::chrono::milliseconds(get<int64_t>(j, "connect_timeout_ms", where));
  }
  if (j.contains("io_timeout_ms")) {
    t.endpoint.io_timeout = std::chrono::milliseconds(get<int64_t>(j, "io_timeout_ms", where));
  }
  if (j.contains("password") && !j.at("password").is_null()) {
    t.endpoint.password = get<std::string>(j, "password", where);
  }
  if (j.contains("info_schema")) {
    const auto& s = j.at("info_schema");
    if (s.is_string()) {
      if (s.get<std::string>() != "redis") config_error(where + ".info_schema: unknown preset '" + s.get<std::string>() + "'");
      t.info_schema = metrics::InfoSchema::redis();
    } else {
      reject_unknown(s, {"cpu_fields", "memory_field"}, where + ".info_schema");
      maybe(s, "cpu_fields", where + ".info_schema", t.info_schema.cpu_fields);
      maybe(s, "memory_field", where + ".info_schema", t.info_schema.memory_field);
    }
  }
  maybe(j, "resource_file", where, t.resource_file);
  try {
    t.endpoint.validate();
  } catch (const Error& e) {
    config_error(where + ": " + e.what());
  }
  return t;
}

workload::WorkloadSpec workload_entry(const json& j, const PreloadSettings& preload) {
  if (j.is_string()) {
    auto spec = workload::builtin_workload(j.get<std::string>());
    if (!spec) config_error("unknown builtin workload '" + j.get<std::string>() + "' (expected A or B)");
    spec->key_count = preload.plan().key_count;
    spec->value_size = preload.value_size;
    if (spec->key_count == 0) config_error("preload sizing yields zero keys");
    return *spec;
  }
  return workload::workload_from_json(j);
}

}  // namespace

void BenchmarkConfig::validate() const {
  if (targets.empty()) config_error("no targets");
  std::set<std::string> names;
  for (const auto& t : targets) {
    if (t.name.empty()) config_error("target with empty name");
    if (!names.insert(t.name).second) config_error("duplicate target name '" + t.name + "'");
  }
  if (!names.count(baseline_system)) {
    config_error("baseline_system '" + baseline_system + "' is not one of the targets");
  }
  std::set<std::string> wl;
  for (const auto& w : workloads) {
    if (!wl.insert(w.name).second) config_error("duplicate workload name '" + w.name + "'");
  }
  if (repetitions == 0) config_error("repetitions must be >= 1");
  if (cooldown_s < 0.0) config_error("cooldown_s must be >= 0");
  if (!(resource_interval_s > 0.0)) config_error("resource_interval_s must be > 0");
  try {
    weights.validate();
  } catch (const Error& e) {
    config_error(e.what());
  }
}

const Target* BenchmarkConfig::find_target(const std::string& name) const {
  for (const auto& t : targets) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const workload::WorkloadSpec* BenchmarkConfig::find_workload(const std::string& name) const {
  for (const auto& w : workloads) {
    if (w.name == name) return &w;
  }
  return nullptr;
}

BenchmarkConfig config_from_json(const json& j) {
  reject_unknown(j, {"targets", "workload", "workloads", "repetitions", "baseline_system", "output_dir",
                     "weights", "preload", "key_mapping", "cooldown_s", "resource_interval_s"},
                 "config");
  BenchmarkConfig c;
  if (!j.contains("targets") || !j.at("targets").is_array()) config_error("'targets' must be an array");
  size_t i = 0;
  for (const auto& t : j.at("targets")) c.targets.push_back(target_from_json(t, i++));

  if (j.contains("preload")) {
    const auto& p = j.at("preload");
    reject_unknown(p, {"memory_budget_bytes", "target_fill", "value_size", "overhead_per_key", "parallelism",
                       "pipeline_depth"},
                   "preload");
    maybe(p, "memory_budget_bytes", "preload", c.preload.memory_budget);
    maybe(p, "target_fill", "preload", c.preload.target_fill);
    maybe(p, "value_size", "preload", c.preload.value_size);
    maybe(p, "overhead_per_key", "preload", c.preload.overhead_per_key);
    maybe(p, "parallelism", "preload", c.preload.parallelism);
    maybe(p, "pipeline_depth", "preload", c.preload.pipeline_depth);
    try {
      (void)c.preload.plan();
    } catch (const Error& e) {
      config_error(e.what());
    }
  }

  if (j.contains("workload") && j.contains("workloads")) config_error("give either 'workload' or 'workloads', not both");
  try {
    if (j.contains("workload")) {
      c.workloads.push_back(workload_entry(j.at("workload"), c.preload));
    } else if (j.contains("workloads")) {
      if (!j.at("workloads").is_array()) config_error("'workloads' must be an array");
      for (const auto& w : j.at("workloads")) c.workloads.push_back(workload_entry(w, c.preload));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    config_error(e.what());
  }

  maybe(j, "repetitions", "config", c.repetitions);
  maybe(j, "baseline_system", "config", c.baseline_system);
  if (c.baseline_system.empty()) c.baseline_system = c.targets.empty() ? "" : c.targets.front().name;
  if (j.contains("output_dir")) c.output_dir = get<std::string>(j, "output_dir", "config");
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    reject_unknown(w, {"cpu", "memory"}, "weights");
    maybe(w, "cpu", "weights", c.weights.cpu_weight);
    maybe(w, "memory", "weights", c.weights.mem_weight);
  }
  if (j.contains("key_mapping")) {
    const auto& k = j.at("key_mapping");
    reject_unknown(k, {"scheme", "seed", "prefix"}, "key_mapping");
    if (k.contains("scheme")) {
      try {
        c.key_mapping.scheme = zipf::parse_key_scheme(get<std::string>(k, "scheme", "key_mapping"));
      } catch (const Error& e) {
        config_error(e.what());
      }
    }
    maybe(k, "seed", "key_mapping", c.key_mapping.permutation_seed);
    maybe(k, "prefix", "key_mapping", c.key_mapping.prefix);
  }
  maybe(j, "cooldown_s", "config", c.cooldown_s);
  maybe(j, "resource_interval_s", "config", c.resource_interval_s);
  c.validate();
  return c;
}

BenchmarkConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kConfig, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace kvbench::config
