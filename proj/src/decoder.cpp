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

#include "binomark/decoder.hpp"

#include "binomark/schemes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>
#include <unordered_set>

namespace binomark {
namespace {

struct PairHash {
  std::size_t operator()(const std::vector<Token>& v) const noexcept {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (Token t : v) h = mix_seed(h, t);
    return static_cast<std::size_t>(h);
  }
};

// P[X <= s] for X ~ Binomial(n, 1/2) and s <= n / 2, summed from s downward
// so the terms shrink monotonically.
double lower_tail_small(long s, long n) {
  if (s < 0) return 0.0;
  const double log_term = std::lgamma(n + 1.0) - std::lgamma(s + 1.0) - std::lgamma(n - s + 1.0) -
                          static_cast<double>(n) * std::log(2.0);
  double term = std::exp(log_term);
  double sum = term;
  for (long k = s; k > 0; --k) {
    term *= static_cast<double>(k) / static_cast<double>(n - k + 1);
    sum += term;
    if (term < sum * 1e-18) break;
  }
  return sum;
}

double lower_tail(long s, long n) {
  if (s < 0) return 0.0;
  if (s >= n) return 1.0;
  if (2 * s <= n) return lower_tail_small(s, n);
  // P[X <= s] = 1 - P[X >= s + 1] = 1 - P[X <= n - s - 1]
  return 1.0 - lower_tail_small(n - s - 1, n);
}

}  // namespace

std::vector<std::size_t> dedup_positions(const TokenSequence& seq, std::size_t k, Token sentinel) {
  std::vector<std::size_t> kept;
  std::unordered_set<std::vector<Token>, PairHash> seen;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    auto pair = seq.context(t, k, sentinel);
    pair.push_back(seq.tokens[t]);
    if (seen.insert(std::move(pair)).second) kept.push_back(t);
  }
  return kept;
}

BitMatrix realized_scores(const TokenSequence& seq, const WatermarkKey& key, std::size_t m,
                          const Vocabulary& vocab, std::span<const std::size_t> positions, std::uint32_t layer) {
  BitMatrix out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t c = 0; c < positions.size(); ++c) {
    const std::size_t t = positions[c];
    const ContextSeed seed = position_seed(key, seq, t, vocab);
    out.col(static_cast<Eigen::Index>(c)) = score_column(seed, seq.tokens[t], m, layer);
  }
  return out;
}

std::pair<Message, VoteTable> decode_message(const TokenSequence& seq, const WatermarkKey& key,
                                             const DecodeOptions& options) {
  const std::size_t m = options.m;
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "message length must be >= 1");
  const Vocabulary vocab(options.vocab_size);
  for (Token t : seq.tokens) {
    if (!vocab.contains(t)) throw Error(ErrorCode::kInvalidArgument, "token id outside the vocabulary");
  }
  const AllocationConfig& alloc = options.allocation;
  if (alloc.enabled) alloc.validate(m);

  std::vector<std::size_t> positions;
  if (options.dedup) {
    positions = dedup_positions(seq, key.context_window, vocab.sentinel());
  } else {
    positions.resize(seq.size());
    for (std::size_t t = 0; t < seq.size(); ++t) positions[t] = t;
  }
  if (positions.empty()) throw Error(ErrorCode::kEmptyAfterDedup, "no scorable positions in sequence");

  VoteTable table;
  table.successes = CountVector::Zero(static_cast<Eigen::Index>(m));
  table.trials = CountVector::Zero(static_cast<Eigen::Index>(m));
  table.effective_length = static_cast<long>(positions.size());

  const std::size_t layers = std::max<std::size_t>(options.synthid_layers, 1);
  const bool weighted = options.synthid_layers > 0;
  Eigen::VectorXd weighted_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  BitMatrix layer_scores(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(layers));

  const std::size_t seg_bits = alloc.enabled ? m / alloc.segments : m;
  for (std::size_t t : positions) {
    const ContextSeed seed = position_seed(key, seq, t, vocab);
    const std::size_t first = allocate_segment(seed, alloc) * seg_bits;
    for (std::size_t l = 0; l < layers; ++l) {
      layer_scores.col(static_cast<Eigen::Index>(l)) =
          score_column(seed, seq.tokens[t], m, static_cast<std::uint32_t>(l));
    }
    const auto seg = Eigen::seqN(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(seg_bits));
    table.successes(seg) += layer_scores(seg, Eigen::all).cast<long>().rowwise().sum();
    table.trials(seg).array() += static_cast<long>(layers);
    if (weighted) weighted_sum += synthid_weighted_decode(layer_scores);
  }

  std::mt19937_64 tie_rng(options.tie_seed);
  std::vector<std::uint8_t> bits(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    int cmp;  // sign of (mean - 1/2)
    if (weighted) {
      const double mean = weighted_sum[ii] / static_cast<double>(positions.size());
      cmp = mean > 0.5 ? 1 : (mean < 0.5 ? -1 : 0);
    } else {
      const long twice = 2 * table.successes[ii];
      cmp = twice > table.trials[ii] ? 1 : (twice < table.trials[ii] ? -1 : 0);
    }
    bits[i] = cmp > 0 ? 1 : (cmp < 0 ? 0 : static_cast<std::uint8_t>(tie_rng() >> 63));
  }
  return {Message(std::move(bits)), std::move(table)};
}

double binom_two_sided_pvalue(long s, long n) {
  if (n < 1 || s < 0 || s > n) throw Error(ErrorCode::kInvalidArgument, "binomial test needs 0 <= S <= n, n >= 1");
  if (n > kExactBinomialLimit) {
    const double z = (std::abs(static_cast<double>(s) - 0.5 * n) - 0.5) / (0.5 * std::sqrt(static_cast<double>(n)));
    return z <= 0.0 ? 1.0 : std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  }
  return std::min(1.0, 2.0 * lower_tail_small(std::min(s, n - s), n));
}

double binom_upper_tail(long s, long n) {
  if (n < 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 0");
  if (s <= 0) return 1.0;
  if (s > n) return 0.0;
  return lower_tail(n - s, n);  // symmetry
}

double zero_bit_statistic(std::span<const long> successes, std::span<const long> trials) {
  if (successes.size() != trials.size()) throw Error(ErrorCode::kLengthMismatch, "counts and trials differ");
  auto xlogx_over = [](double x, double half) { return x > 0.0 ? x * std::log(x / half) : 0.0; };
  double lambda = 0.0;
  for (std::size_t i = 0; i < successes.size(); ++i) {
    const double n = static_cast<double>(trials[i]);
    if (n <= 0.0) continue;
    const double s = static_cast<double>(successes[i]);
    lambda += xlogx_over(s, 0.5 * n) + xlogx_over(n - s, 0.5 * n);
  }
  // Each bit's term is a KL divergence; clamp the rounding residue at zero.
  return std::max(lambda, 0.0);
}

double zero_bit_statistic(const VoteTable& table) {
  return zero_bit_statistic(std::span<const long>(table.successes.data(), table.bits()),
                            std::span<const long>(table.trials.data(), table.bits()));
}

NullStatisticTable::NullStatisticTable(std::vector<long> trials, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one Monte-Carlo sample");
  std::mt19937_64 rng(seed);
  std::vector<long> draw(trials.size());
  sorted_.resize(samples);
  for (auto& v : sorted_) {
    for (std::size_t i = 0; i < trials.size(); ++i) {
      // Binomial(n, 1/2) as a popcount of n fair bits.
      long s = 0;
      long left = trials[i];
      for (; left >= 64; left -= 64) s += std::popcount(rng());
      if (left > 0) s += std::popcount(rng() & ((std::uint64_t{1} << left) - 1));
      draw[i] = s;
    }
    v = zero_bit_statistic(draw, trials);
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double NullStatisticTable::pvalue(double observed) const {
  const double tol = 1e-9 * std::max(1.0, std::abs(observed));
  const auto it = std::lower_bound(sorted_.begin(), sorted_.end(), observed - tol);
  const auto exceed = static_cast<double>(sorted_.end() - it);
  return (1.0 + exceed) / (static_cast<double>(sorted_.size()) + 1.0);
}

double zero_bit_pvalue(double observed, std::span<const long> trials, std::size_t mc_samples, std::uint64_t seed) {
  return NullStatisticTable(std::vector<long>(trials.begin(), trials.end()), mc_samples, seed).pvalue(observed);
}

std::shared_ptr<const NullStatisticTable> cached_null_table(const std::vector<long>& trials, std::size_t samples,
                                                           std::uint64_t seed) {
  using Key = std::tuple<std::vector<long>, std::size_t, std::uint64_t>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const NullStatisticTable>> cache;
  Key key{trials, samples, seed};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const NullStatisticTable>(trials, samples, seed);
  std::lock_guard lock(mutex);
  if (cache.size() > 4096) cache.clear();
  return cache.emplace(std::move(key), std::move(table)).first->second;
}

DetectionReport detect(const TokenSequence& seq, const WatermarkKey& key, const DecodeOptions& options) {
  auto [decoded, table] = decode_message(seq, key, options);
  DetectionReport report;
  report.decoded = std::move(decoded);
  report.effective_length = table.effective_length;
  const std::size_t m = table.bits();
  report.per_bit_counts.assign(table.successes.data(), table.successes.data() + m);
  report.per_bit_trials.assign(table.trials.data(), table.trials.data() + m);
  report.per_bit_pvalues.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const long n = report.per_bit_trials[i];
    report.per_bit_pvalues[i] = n > 0 ? binom_two_sided_pvalue(report.per_bit_counts[i], n) : 1.0;
  }
  report.zero_bit_statistic = zero_bit_statistic(table);
  if (options.mc_samples > 0) {
    report.zero_bit_pvalue = cached_null_table(report.per_bit_trials, options.mc_samples, options.mc_seed)
                                 ->pvalue(report.zero_bit_statistic);
  }
  return report;
}

}  // namespace binomark
