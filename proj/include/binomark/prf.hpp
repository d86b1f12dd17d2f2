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

// Keyed pseudorandom scoring.
//
// The construction is frozen; changing it breaks decoding of every text
// produced by an earlier build.
//
//   seed    = BLAKE2b-128 keyed with the 32-byte watermark key, over the k
//             context ids encoded as little-endian uint32 (oldest first).
//   word    = SipHash-2-4 keyed with the 16-byte seed, over the 12-byte
//             message  u32le(token) || u32le(layer) || u32le(word index).
//   score   = bit (i mod 64) of the word with index i / 64.
//
// Segment selection for position allocation uses the same SipHash with the
// reserved triple (0xffffffff, 0xffffffff, 0).

#ifndef BINOMARK_PRF_HPP_
#define BINOMARK_PRF_HPP_

#include "binomark/core.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace binomark {

struct ContextSeed {
  std::array<std::uint8_t, 16> bytes{};
  friend bool operator==(const ContextSeed&, const ContextSeed&) = default;
};

using BitMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Scores for a set of candidate tokens: entry (i, c) is the bit-i score of
// token tokens[c].
struct ScoreBlock {
  std::vector<Token> tokens;
  BitMatrix bits;

  Eigen::Index rows() const { return bits.rows(); }
  Eigen::Index cols() const { return bits.cols(); }
};

/// Hashes the key with the last-k context ids. Shorter contexts are padded on
/// the left with the sentinel id |vocab|.
ContextSeed derive_seed(const WatermarkKey& key, std::span<const Token> context, const Vocabulary& vocab);

/// Seed for completion position t of `seq`.
ContextSeed position_seed(const WatermarkKey& key, const TokenSequence& seq, std::size_t t,
                          const Vocabulary& vocab);

std::uint64_t score_word(const ContextSeed& seed, Token token, std::uint32_t layer, std::uint32_t word);

int bernoulli_score(const ContextSeed& seed, Token token, std::size_t bit, std::uint32_t layer);

/// Full m x |vocab| block.
ScoreBlock score_matrix(const ContextSeed& seed, const Vocabulary& vocab, std::size_t m, std::uint32_t layer);

/// Block restricted to the given columns.
ScoreBlock score_columns(const ContextSeed& seed, std::span<const Token> tokens, std::size_t m,
                         std::uint32_t layer);

/// The m scores of one token as a column.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> score_column(const ContextSeed& seed, Token token, std::size_t m,
                                                           std::uint32_t layer);

/// Uniform draw in [0, n) keyed by the seed alone.
std::uint64_t seed_uniform(const ContextSeed& seed, std::uint64_t n);

}  // namespace binomark

#endif  // BINOMARK_PRF_HPP_
