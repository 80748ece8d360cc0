#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace kvtest {

namespace fs = std::filesystem;

inline std::string fixture_path(const std::string& name) { return std::string(KVBENCH_FIXTURE_DIR) + "/" + name; }

// Rows of whitespace-separated tokens, '#' comments skipped.
inline std::vector<std::vector<std::string>> read_table(const std::string& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    rows.emplace_back(std::istream_iterator<std::string>(ss), std::istream_iterator<std::string>());
  }
  return rows;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline size_t count_lines(const fs::path& p) {
  const auto s = slurp(p);
  size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "kvbench-test-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

  fs::path write(const std::string& name, const std::string& content) const {
    std::ofstream out(path_ / name, std::ios::binary);
    out << content;
    return path_ / name;
  }

 private:
  fs::path path_;
};

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double eps, int depth = 50) {
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double tol, int d) {
        const double mid = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + mid);
        const double rm = 0.5 * (mid + hi);
        const double flm = f(lm);
        const double frm = f(rm);
        const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
        const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
        const double diff = left + right - whole;
        if (d <= 0 || std::fabs(diff) <= 15.0 * tol) return left + right + diff / 15.0;
        return rec(lo, mid, flo, flm, fmid, left, tol / 2.0, d - 1) + rec(mid, hi, fmid, frm, fhi, right, tol / 2.0, d - 1);
      };
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), eps, depth);
}

inline double t_density(double x, double df) {
  const double logc = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) - 0.5 * std::log(df * M_PI);
  return std::exp(logc - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

// P(T <= x) = 1/2 + sign(x) * integral_0^|x| density.
inline double t_cdf_by_quadrature(double x, double df) {
  const double half = simpson([df](double u) { return t_density(u, df); }, 0.0, std::fabs(x), 1e-14);
  return x >= 0 ? 0.5 + half : 0.5 - half;
}

// A config JSON pointing at local mock targets.
inline nlohmann::json mock_config(const std::vector<std::pair<std::string, uint16_t>>& targets,
                                  const fs::path& output_dir, const nlohmann::json& workload,
                                  uint32_t repetitions = 2) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [name, port] : targets) {
    t.push_back({{"name", name}, {"host", "127.0.0.1"}, {"port", port}, {"connect_timeout_ms", 500}});
  }
  return {{"targets", t},
          {"workload", workload},
          {"repetitions", repetitions},
          {"output_dir", output_dir.string()},
          {"cooldown_s", 0.0},
          {"resource_interval_s", 0.2},
          {"preload",
           {{"memory_budget_bytes", 2'000'000},
            {"target_fill", 0.5},
            {"value_size", 100},
            {"overhead_per_key", 100},
            {"parallelism", 2},
            {"pipeline_depth", 32}}}};
}

inline nlohmann::json tiny_workload(const std::string& name, std::vector<uint32_t> levels, double duration_s = 0.6,
                                    double warmup_s = 0.2) {
  return {{"name", name},         {"set_ratio", 0.05},       {"get_ratio", 0.95},
          {"skew", 1.4},          {"key_count", 5000},       {"value_size", 100},
          {"duration_s", duration_s}, {"warmup_s", warmup_s}, {"concurrency_levels", levels}};
}

}  // namespace kvtest
