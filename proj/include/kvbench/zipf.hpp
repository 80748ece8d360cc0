#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kvbench/rng.hpp"

namespace kvbench::zipf {

struct ZipfianParams {
  uint64_t key_count = 1;
  double skew = 0.0;

  void validate() const;
};

// Cumulative distribution over ranks 1..N with P(k) = k^-skew / H(N, skew).
// Immutable once built; safe to share across worker threads.
class ZipfianTable {
 public:
  explicit ZipfianTable(ZipfianParams params);

  const ZipfianParams& params() const noexcept { return params_; }
  uint64_t key_count() const noexcept { return params_.key_count; }
  double harmonic() const noexcept { return harmonic_; }

  // C[1..N] stored zero-based; cumulative()[k-1] == C[k].
  std::span<const double> cumulative() const noexcept { return cumulative_; }

  // P(k) as computed during construction (1/k^skew / H).
  double probability(uint64_t rank) const;

  // Smallest rank k with C[k] > r. r must lie in [0, 1).
  uint64_t sample_rank(double r) const;

 private:
  ZipfianParams params_;
  double harmonic_ = 0.0;
  std::vector<double> cumulative_;
};

// Generalised harmonic number, summed from the smallest term upwards.
double generalized_harmonic(uint64_t n, double skew);

std::vector<uint64_t> sample_stream(const ZipfianTable& table, uint64_t seed,
                                    uint64_t count);

// Stateful per-worker sampler over a shared table.
class RankSampler {
 public:
  RankSampler(const ZipfianTable& table, uint64_t seed)
      : table_(&table), rng_(seed) {}

  uint64_t next() { return table_->sample_rank(rng_.next_double()); }

 private:
  const ZipfianTable* table_;
  Xoshiro256 rng_;
};

enum class KeyScheme { kIdentityRank, kSeededPermutation };

const char* to_string(KeyScheme scheme);
KeyScheme parse_key_scheme(const std::string& text);

struct KeyMappingConfig {
  KeyScheme scheme = KeyScheme::kIdentityRank;
  uint64_t permutation_seed = 0;
  std::string prefix = "key:";
};

// Bijection rank (1..N) -> key name. The seeded permutation is a keyed
// Feistel network with cycle walking, so no per-key table is stored.
class KeyMapping {
 public:
  KeyMapping(KeyMappingConfig config, uint64_t key_count);

  const KeyMappingConfig& config() const noexcept { return config_; }
  uint64_t key_count() const noexcept { return key_count_; }

  // Rank after permutation (identity for kIdentityRank), 1-based.
  uint64_t permuted_rank(uint64_t rank) const;

  std::string key(uint64_t rank) const;

  // Appends the key for `rank` to `out` without a temporary string.
  void append_key(uint64_t rank, std::string& out) const;

 private:
  uint64_t feistel(uint64_t x) const;

  KeyMappingConfig config_;
  uint64_t key_count_;
  unsigned half_bits_ = 1;
  uint64_t round_keys_[4]{};
};

}  // namespace kvbench::zipf
