// Copyright 2026 The binomark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef BINOMARK_DECODER_HPP_
#define BINOMARK_DECODER_HPP_

#include "binomark/core.hpp"
#include "binomark/encoder.hpp"
#include "binomark/prf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace binomark {

using CountVector = Eigen::Matrix<long, Eigen::Dynamic, 1>;

// Per-bit success counts. `trials` equals the effective length for every bit
// except under position allocation or multi-layer scoring.
struct VoteTable {
  CountVector successes;
  CountVector trials;
  long effective_length = 0;

  std::size_t bits() const { return static_cast<std::size_t>(successes.size()); }
};

/// First occurrence of each distinct (k-token context, token) pair, in order.
std::vector<std::size_t> dedup_positions(const TokenSequence& seq, std::size_t k, Token sentinel);

struct DecodeOptions {
  std::size_t m = 0;
  std::size_t vocab_size = 0;
  AllocationConfig allocation{};
  std::size_t synthid_layers = 0;  // > 0 selects the weighted-mean decoder
  bool dedup = true;
  std::uint64_t tie_seed = 0;
  std::size_t mc_samples = 20000;  // 0 skips the zero-bit p-value
  std::uint64_t mc_seed = 0;
};

/// Raw scores of the realized token at each listed position (m x positions).
BitMatrix realized_scores(const TokenSequence& seq, const WatermarkKey& key, std::size_t m,
                          const Vocabulary& vocab, std::span<const std::size_t> positions,
                          std::uint32_t layer = 0);

/// Majority vote per bit; exact half-way ties are resolved by the tie RNG.
/// Throws EmptyAfterDedup when no position survives.
std::pair<Message, VoteTable> decode_message(const TokenSequence& seq, const WatermarkKey& key,
                                             const DecodeOptions& options);

/// Exact two-sided test against Binomial(n, 1/2):
/// min(1, 2 min(P[X <= s], P[X >= s])). Exact up to n = kExactBinomialLimit,
/// continuity-corrected normal approximation beyond.
inline constexpr long kExactBinomialLimit = 100000;
double binom_two_sided_pvalue(long s, long n);

/// One-sided P[X >= s] for X ~ Binomial(n, 1/2).
double binom_upper_tail(long s, long n);

/// Log-likelihood ratio against the Binomial(n_i, 1/2) null, 0 log 0 = 0.
double zero_bit_statistic(const VoteTable& table);
double zero_bit_statistic(std::span<const long> successes, std::span<const long> trials);

// Sorted null draws of the statistic for one trials vector.
class NullStatisticTable {
 public:
  NullStatisticTable(std::vector<long> trials, std::size_t samples, std::uint64_t seed);

  /// (1 + #{draws >= observed}) / (samples + 1).
  double pvalue(double observed) const;
  std::size_t samples() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// Add-one Monte-Carlo upper-tail p-value of the statistic.
double zero_bit_pvalue(double observed, std::span<const long> trials, std::size_t mc_samples, std::uint64_t seed);
inline double zero_bit_pvalue(double observed, long n, std::size_t m, std::size_t mc_samples, std::uint64_t seed) {
  const std::vector<long> trials(m, n);
  return zero_bit_pvalue(observed, trials, mc_samples, seed);
}

/// Process-wide cache of null tables keyed by (trials, samples, seed).
std::shared_ptr<const NullStatisticTable> cached_null_table(const std::vector<long>& trials,
                                                           std::size_t samples, std::uint64_t seed);

/// Full report: decoded message, per-bit p-values and the zero-bit test.
DetectionReport detect(const TokenSequence& seq, const WatermarkKey& key, const DecodeOptions& options);

}  // namespace binomark

#endif  // BINOMARK_DECODER_HPP_
