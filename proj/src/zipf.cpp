#include "kvbench/zipf.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kvbench/error.hpp"

namespace kvbench::zipf {

void ZipfianParams::validate() const {
  if (key_count == 0) invalid_parameter("zipf: key_count must be >= 1");
  if (!(skew >= 0.0) || !std::isfinite(skew)) {
    invalid_parameter("zipf: skew must be a finite value >= 0");
  }
}

double generalized_harmonic(uint64_t n, double skew) {
  double sum = 0.0;
  for (uint64_t i = n; i >= 1; --i) sum += 1.0 / std::pow(static_cast<double>(i), skew);
  return sum;
}

ZipfianTable::ZipfianTable(ZipfianParams params) : params_(params) {
  params_.validate();
  const uint64_t n = params_.key_count;
  harmonic_ = generalized_harmonic(n, params_.skew);
  cumulative_.resize(n);
  double running = 0.0;
  for (uint64_t i = 1; i <= n; ++i) {
    running += (1.0 / std::pow(static_cast<double>(i), params_.skew)) / harmonic_;
    cumulative_[i - 1] = std::min(running, 1.0);
  }
  // Rounding can leave C[N] a few ulps off 1; pin it so every r < 1
  // resolves to a rank. The clamp above keeps the table monotone and does
  // not change which rank any r < 1 maps to.
  cumulative_.back() = 1.0;
}

double ZipfianTable::probability(uint64_t rank) const {
  if (rank < 1 || rank > params_.key_count) invalid_parameter("zipf: rank out of range");
  return (1.0 / std::pow(static_cast<double>(rank), params_.skew)) / harmonic_;
}

uint64_t ZipfianTable::sample_rank(double r) const {
  if (!(r >= 0.0 && r < 1.0)) invalid_parameter("zipf: r must lie in [0, 1)");
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), r);
  return static_cast<uint64_t>(it - cumulative_.begin()) + 1;
}

std::vector<uint64_t> sample_stream(const ZipfianTable& table, uint64_t seed,
                                    uint64_t count) {
  std::vector<uint64_t> out;
  out.reserve(count);
  RankSampler sampler(table, seed);
  for (uint64_t j = 0; j < count; ++j) out.push_back(sampler.next());
  return out;
}

const char* to_string(KeyScheme scheme) {
  switch (scheme) {
    case KeyScheme::kIdentityRank: return "identity-rank";
    case KeyScheme::kSeededPermutation: return "seeded-permutation";
  }
  return "?";
}

KeyScheme parse_key_scheme(const std::string& text) {
  if (text == "identity-rank") return KeyScheme::kIdentityRank;
  if (text == "seeded-permutation") return KeyScheme::kSeededPermutation;
  invalid_parameter("unknown key scheme '" + text + "'");
}

KeyMapping::KeyMapping(KeyMappingConfig config, uint64_t key_count)
    : config_(std::move(config)), key_count_(key_count) {
  if (key_count_ == 0) invalid_parameter("key mapping: key_count must be >= 1");
  // Domain is 2^(2*half_bits) >= key_count.
  while ((uint64_t{1} << (2 * half_bits_)) < key_count_ && half_bits_ < 31) ++half_bits_;
  uint64_t s = config_.permutation_seed;
  for (auto& k : round_keys_) k = splitmix64_next(s);
}

uint64_t KeyMapping::feistel(uint64_t x) const {
  const uint64_t mask = (uint64_t{1} << half_bits_) - 1;
  uint64_t left = (x >> half_bits_) & mask;
  uint64_t right = x & mask;
  for (uint64_t key : round_keys_) {
    uint64_t f = right ^ key;
    splitmix64_next(f);
    const uint64_t next_right = left ^ (splitmix64_next(f) & mask);
    left = right;
    right = next_right;
  }
  return (left << half_bits_) | right;
}

uint64_t KeyMapping::permuted_rank(uint64_t rank) const {
  if (rank < 1 || rank > key_count_) {
    invalid_parameter("key mapping: rank " + std::to_string(rank) + " outside 1.." +
                      std::to_string(key_count_));
  }
  if (config_.scheme == KeyScheme::kIdentityRank) return rank;
  // Cycle walking keeps the permutation inside [0, key_count).
  uint64_t x = rank - 1;
  do {
    x = feistel(x);
  } while (x >= key_count_);
  return x + 1;
}

std::string KeyMapping::key(uint64_t rank) const {
  std::string out;
  append_key(rank, out);
  return out;
}

void KeyMapping::append_key(uint64_t rank, std::string& out) const {
  out += config_.prefix;
  out += std::to_string(permuted_rank(rank));
}

}  // namespace kvbench::zipf
