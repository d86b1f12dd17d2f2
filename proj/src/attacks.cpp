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

#include "binomark/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace binomark {

const char* to_string(AttackKind kind) {
  return kind == AttackKind::kDelete ? "delete" : "substitute";
}

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "delete") return AttackKind::kDelete;
  if (s == "substitute") return AttackKind::kSubstitute;
  throw Error(ErrorCode::kConfig, "unknown attack kind '" + s + "'");
}

void AttackConfig::validate() const {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error(ErrorCode::kConfig, "attack fraction must be in [0, 1]");
}

namespace {

std::size_t edit_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "attack fraction must be in [0, 1]");
  }
  // Guard against fraction * n landing a hair below an integer.
  const double raw = fraction * static_cast<double>(n);
  return std::min(n, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

std::vector<std::size_t> chosen_positions(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` entries are a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  order.resize(count);
  return order;
}

}  // namespace

TokenSequence delete_tokens(const TokenSequence& seq, double fraction, std::uint64_t seed) {
  const std::size_t n = seq.size();
  std::mt19937_64 rng(seed);
  std::vector<bool> drop(n, false);
  for (std::size_t pos : chosen_positions(n, edit_count(n, fraction), rng)) drop[pos] = true;
  TokenSequence out{seq.prefix, {}};
  for (std::size_t t = 0; t < n; ++t) {
    if (!drop[t]) out.tokens.push_back(seq.tokens[t]);
  }
  return out;
}

TokenSequence substitute_tokens(const TokenSequence& seq, double fraction, const Vocabulary& vocab,
                                std::uint64_t seed) {
  const std::size_t n = seq.size();
  std::mt19937_64 rng(seed);
  const auto positions = chosen_positions(n, edit_count(n, fraction), rng);
  TokenSequence out = seq;
  std::uniform_int_distribution<Token> other(0, static_cast<Token>(vocab.size - 2));
  for (std::size_t pos : positions) {
    // Uniform over the |vocab| - 1 tokens that differ from the original.
    const Token orig = out.tokens[pos];
    const Token r = other(rng);
    out.tokens[pos] = r >= orig ? r + 1 : r;
  }
  return out;
}

TokenSequence apply_attack(const TokenSequence& seq, const AttackConfig& cfg, const Vocabulary& vocab) {
  cfg.validate();
  return cfg.kind == AttackKind::kDelete ? delete_tokens(seq, cfg.fraction, cfg.seed)
                                         : substitute_tokens(seq, cfg.fraction, vocab, cfg.seed);
}

GenerationRecord apply_attack(const GenerationRecord& record, const AttackConfig& cfg) {
  GenerationRecord out = record;
  out.tokens = apply_attack(record.sequence(), cfg, Vocabulary(record.lm.vocab_size)).tokens;
  out.attacks.push_back({to_string(cfg.kind), cfg.fraction, cfg.seed});
  return out;
}

}  // namespace binomark
