#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "kvbench/metrics.hpp"

namespace kvbench::results {

nlohmann::json to_json(const metrics::RunResult& r);
metrics::RunResult run_result_from_json(const nlohmann::json& j);

// Replaces characters outside [A-Za-z0-9._-] with '_'.
std::string sanitize_component(std::string s);

// "<system>__<workload>.jsonl" with path-unsafe characters replaced.
std::string result_file_name(const std::string& system, const std::string& workload);

// Append-only JSON-lines log of RunResults. Each record is written with a
// single write() so a crash leaves at most one torn trailing line, which
// load() skips and repair() truncates away.
class ResultLog {
 public:
  explicit ResultLog(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const noexcept { return path_; }

  std::vector<metrics::RunResult> load(std::vector<std::string>* warnings = nullptr) const;
  // Drops an unterminated trailing line. Returns true if the file changed.
  bool repair() const;
  void append(const metrics::RunResult& r) const;

 private:
  std::filesystem::path path_;
};

// Every *.jsonl under `dir`, files in name order, records in file order.
std::vector<metrics::RunResult> load_results_dir(const std::filesystem::path& dir,
                                                 std::vector<std::string>* warnings = nullptr);

}  // namespace kvbench::results
