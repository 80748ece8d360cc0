#include "kvbench/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "kvbench/error.hpp"

namespace kvbench::metrics {
namespace {

// Lower edges of every bucket plus the final upper edge.
const std::vector<double>& bucket_edges() {
  static const std::vector<double> edges = [] {
    std::vector<double> e;
    const double lo = static_cast<double>(LatencyRecorder::kMinTracked.count());
    const double hi = static_cast<double>(LatencyRecorder::kMaxTracked.count());
    const double log_growth = std::log(LatencyRecorder::kBucketGrowth);
    for (size_t i = 0;; ++i) {
      const double edge = lo * std::exp(static_cast<double>(i) * log_growth);
      e.push_back(edge);
      if (edge > hi) break;
    }
    return e;
  }();
  return edges;
}

std::optional<double> parse_double(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::optional<uint64_t> parse_u64(const std::string& text) {
  if (text.empty()) return std::nullopt;
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != text.size()) return std::nullopt;
    return static_cast<uint64_t>(v);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

const char* to_string(RecorderMode mode) {
  return mode == RecorderMode::kExact ? "exact" : "bucketed";
}

uint64_t percentile_rank(double k, uint64_t n) {
  if (!(k > 0.0 && k <= 100.0)) invalid_parameter("percentile: k must lie in (0, 100]");
  if (n == 0) throw Error(ErrorCode::kNoData, "percentile: no samples recorded");
  const double x = k * static_cast<double>(n) / 100.0;
  const double nearest = std::nearbyint(x);
  double idx = std::ceil(x);
  if (std::fabs(x - nearest) <= 1e-9 * std::max(1.0, x)) idx = nearest;
  return std::clamp<uint64_t>(static_cast<uint64_t>(idx), 1, n);
}

LatencyRecorder::LatencyRecorder(RecorderMode mode, uint64_t exact_limit)
    : mode_(mode), exact_limit_(exact_limit) {
  if (mode_ == RecorderMode::kBucketed) buckets_.assign(bucket_count(), 0);
}

size_t LatencyRecorder::bucket_count() { return bucket_edges().size() - 1; }

size_t LatencyRecorder::bucket_index(Nanos value) {
  const auto& edges = bucket_edges();
  const double v = static_cast<double>(value.count());
  if (v < edges.front()) return 0;
  const auto it = std::upper_bound(edges.begin(), edges.end(), v);
  const size_t idx = static_cast<size_t>(it - edges.begin()) - 1;
  return std::min(idx, bucket_count() - 1);
}

double LatencyRecorder::bucket_lower_edge(size_t index) { return bucket_edges().at(index); }
double LatencyRecorder::bucket_upper_edge(size_t index) { return bucket_edges().at(index + 1); }

void LatencyRecorder::record(Nanos rtt) {
  if (rtt < kMinTracked || rtt > kMaxTracked) ++out_of_range_;
  ++count_;
  if (mode_ == RecorderMode::kExact) {
    if (!samples_.empty() && rtt.count() < samples_.back()) sorted_ = false;
    samples_.push_back(rtt.count());
    if (exact_limit_ != 0 && count_ >= exact_limit_) promote_to_bucketed();
  } else {
    ++buckets_[bucket_index(rtt)];
  }
}

void LatencyRecorder::promote_to_bucketed() {
  if (mode_ == RecorderMode::kBucketed) return;
  buckets_.assign(bucket_count(), 0);
  for (int64_t s : samples_) ++buckets_[bucket_index(Nanos{s})];
  samples_.clear();
  samples_.shrink_to_fit();
  sorted_ = true;
  mode_ = RecorderMode::kBucketed;
}

void LatencyRecorder::merge(const LatencyRecorder& other) {
  if (other.mode_ == RecorderMode::kBucketed) promote_to_bucketed();
  if (mode_ == RecorderMode::kExact) {
    samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
    sorted_ = false;
  } else if (other.mode_ == RecorderMode::kExact) {
    for (int64_t s : other.samples_) ++buckets_[bucket_index(Nanos{s})];
  } else {
    for (size_t i = 0; i < buckets_.size(); ++i) buckets_[i] += other.buckets_[i];
  }
  count_ += other.count_;
  out_of_range_ += other.out_of_range_;
  if (mode_ == RecorderMode::kExact && exact_limit_ != 0 && count_ >= exact_limit_) {
    promote_to_bucketed();
  }
}

LatencyNs LatencyRecorder::percentile(double k) const {
  if (count_ == 0) throw Error(ErrorCode::kNoData, "percentile: no samples recorded");
  const uint64_t rank = percentile_rank(k, count_);
  if (mode_ == RecorderMode::kExact) {
    if (!sorted_) {
      std::sort(samples_.begin(), samples_.end());
      sorted_ = true;
    }
    return LatencyNs(static_cast<double>(samples_[rank - 1]));
  }
  uint64_t seen = 0;
  for (size_t i = 0; i < buckets_.size(); ++i) {
    seen += buckets_[i];
    if (seen >= rank) return LatencyNs(bucket_upper_edge(i));
  }
  return LatencyNs(bucket_upper_edge(buckets_.size() - 1));
}

const char* to_string(ResourceSource source) {
  return source == ResourceSource::kServerInfo ? "server-info" : "external-file";
}

ResourceSource parse_resource_source(const std::string& text) {
  if (text == "server-info") return ResourceSource::kServerInfo;
  if (text == "external-file") return ResourceSource::kExternalFile;
  invalid_parameter("unknown resource source '" + text + "'");
}

ResourceSample sample_from_info(const resp::InfoMap& info, const InfoSchema& schema,
                                double timestamp_s) {
  ResourceSample s;
  s.timestamp_s = timestamp_s;
  s.source = ResourceSource::kServerInfo;
  if (!schema.cpu_fields.empty()) {
    double total = 0.0;
    bool ok = true;
    for (const auto& field : schema.cpu_fields) {
      auto it = info.find(field);
      std::optional<double> v;
      if (it != info.end()) v = parse_double(it->second);
      if (!v) {
        ok = false;
        break;
      }
      total += *v;
    }
    if (ok) s.cpu_seconds_total = total;
  }
  if (auto it = info.find(schema.memory_field); it != info.end()) {
    s.used_memory = parse_u64(it->second);
  }
  return s;
}

ResourceSample sample_resources(resp::Connection& conn, const InfoSchema& schema,
                                double timestamp_s, const std::vector<ResourceSample>* external) {
  try {
    return sample_from_info(conn.fetch_info(), schema, timestamp_s);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kInfoUnavailable) throw;
  }
  if (external != nullptr && !external->empty()) {
    const ResourceSample* best = &external->front();
    for (const auto& row : *external) {
      if (row.timestamp_s <= timestamp_s) best = &row;
    }
    return *best;
  }
  ResourceSample missing;
  missing.timestamp_s = timestamp_s;
  return missing;
}

std::vector<ResourceSample> load_resource_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open resource file " + path);
  std::string line;
  if (!std::getline(in, line)) return {};
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(trim(cell));
  }
  const auto col = [&](const std::string& name) -> size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::kConfig, path + ": missing column '" + name + "'");
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t t_col = col("timestamp_s");
  const size_t cpu_col = col("cpu_seconds_total");
  const size_t mem_col = col("used_memory_bytes");

  std::vector<ResourceSample> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (line.back() == ',') cells.emplace_back();
    const auto get = [&](size_t c) { return c < cells.size() ? cells[c] : std::string(); };
    auto t = parse_double(get(t_col));
    if (!t) {
      throw Error(ErrorCode::kConfig, path + ":" + std::to_string(line_no) + ": bad timestamp");
    }
    ResourceSample s;
    s.timestamp_s = *t;
    s.cpu_seconds_total = parse_double(get(cpu_col));
    s.used_memory = parse_u64(get(mem_col));
    s.source = ResourceSource::kExternalFile;
    rows.push_back(s);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.timestamp_s < b.timestamp_s;
  });
  return rows;
}

std::optional<double> mean_cpu_cores(const std::vector<ResourceSample>& series) {
  const ResourceSample* first = nullptr;
  const ResourceSample* last = nullptr;
  for (const auto& s : series) {
    if (!s.cpu_seconds_total) continue;
    if (first == nullptr) first = &s;
    last = &s;
  }
  if (first == nullptr || last == first) return std::nullopt;
  const double dt = last->timestamp_s - first->timestamp_s;
  if (dt <= 0.0) return std::nullopt;
  return (*last->cpu_seconds_total - *first->cpu_seconds_total) / dt;
}

std::optional<double> mean_used_memory(const std::vector<ResourceSample>& series) {
  double sum = 0.0;
  size_t n = 0;
  for (const auto& s : series) {
    if (!s.used_memory) continue;
    sum += static_cast<double>(*s.used_memory);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

void EfficiencyWeights::validate() const {
  if (!(cpu_weight >= 0.0) || !(mem_weight >= 0.0)) {
    invalid_parameter("efficiency weights must be >= 0");
  }
  if (!(cpu_weight + mem_weight > 0.0)) invalid_parameter("efficiency weights must not both be 0");
}

double normalized_throughput(double raw, double baseline) {
  if (!(baseline > 0.0)) {
    throw Error(ErrorCode::kInvalidBaseline, "baseline throughput must be > 0");
  }
  return raw / baseline;
}

double efficiency_index(double throughput, double cpu_cores, double mem_fraction,
                        const EfficiencyWeights& weights) {
  const double denom = cpu_cores * weights.cpu_weight + mem_fraction * weights.mem_weight;
  if (!(denom > 0.0)) invalid_parameter("efficiency index: zero resource denominator");
  return throughput / denom;
}

}  // namespace kvbench::metrics
