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

#include "binomark/prf.hpp"

#include <sodium.h>

namespace binomark {
namespace {

static_assert(crypto_shorthash_siphash24_KEYBYTES == 16);
static_assert(crypto_shorthash_siphash24_BYTES == 8);

void ensure_sodium() {
  static const int init = sodium_init();
  (void)init;
}

void put_u32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v);
  out[1] = static_cast<std::uint8_t>(v >> 8);
  out[2] = static_cast<std::uint8_t>(v >> 16);
  out[3] = static_cast<std::uint8_t>(v >> 24);
}

void fill_column(const ContextSeed& seed, Token token, std::size_t m, std::uint32_t layer, std::uint8_t* col) {
  const std::size_t words = (m + 63) / 64;
  for (std::size_t w = 0; w < words; ++w) {
    const std::uint64_t bits = score_word(seed, token, layer, static_cast<std::uint32_t>(w));
    const std::size_t end = std::min(m, (w + 1) * 64);
    for (std::size_t i = w * 64; i < end; ++i) col[i] = static_cast<std::uint8_t>((bits >> (i % 64)) & 1u);
  }
}

}  // namespace

ContextSeed derive_seed(const WatermarkKey& key, std::span<const Token> context, const Vocabulary& vocab) {
  ensure_sodium();
  const std::size_t k = key.context_window;
  std::vector<std::uint8_t> msg(4 * k);
  const std::size_t pad = context.size() < k ? k - context.size() : 0;
  const std::size_t skip = context.size() > k ? context.size() - k : 0;
  for (std::size_t j = 0; j < k; ++j) {
    const Token id = j < pad ? vocab.sentinel() : context[skip + j - pad];
    put_u32(msg.data() + 4 * j, id);
  }
  ContextSeed seed;
  crypto_generichash(seed.bytes.data(), seed.bytes.size(), msg.data(), msg.size(), key.bytes.data(),
                     key.bytes.size());
  return seed;
}

ContextSeed position_seed(const WatermarkKey& key, const TokenSequence& seq, std::size_t t,
                          const Vocabulary& vocab) {
  const auto ctx = seq.context(t, key.context_window, vocab.sentinel());
  return derive_seed(key, ctx, vocab);
}

std::uint64_t score_word(const ContextSeed& seed, Token token, std::uint32_t layer, std::uint32_t word) {
  std::uint8_t msg[12];
  put_u32(msg, token);
  put_u32(msg + 4, layer);
  put_u32(msg + 8, word);
  std::uint8_t out[8];
  crypto_shorthash_siphash24(out, msg, sizeof msg, seed.bytes.data());
  std::uint64_t v = 0;
  for (int j = 7; j >= 0; --j) v = v << 8 | out[j];
  return v;
}

int bernoulli_score(const ContextSeed& seed, Token token, std::size_t bit, std::uint32_t layer) {
  const std::uint64_t w = score_word(seed, token, layer, static_cast<std::uint32_t>(bit / 64));
  return static_cast<int>((w >> (bit % 64)) & 1u);
}

ScoreBlock score_matrix(const ContextSeed& seed, const Vocabulary& vocab, std::size_t m, std::uint32_t layer) {
  std::vector<Token> all(vocab.size);
  for (std::size_t u = 0; u < vocab.size; ++u) all[u] = static_cast<Token>(u);
  return score_columns(seed, all, m, layer);
}

ScoreBlock score_columns(const ContextSeed& seed, std::span<const Token> tokens, std::size_t m,
                         std::uint32_t layer) {
  ScoreBlock block;
  block.tokens.assign(tokens.begin(), tokens.end());
  block.bits.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(tokens.size()));
  // Column-major storage: each column is contiguous.
  for (std::size_t c = 0; c < tokens.size(); ++c) {
    fill_column(seed, tokens[c], m, layer, block.bits.col(static_cast<Eigen::Index>(c)).data());
  }
  return block;
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> score_column(const ContextSeed& seed, Token token, std::size_t m,
                                                           std::uint32_t layer) {
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> col(static_cast<Eigen::Index>(m));
  fill_column(seed, token, m, layer, col.data());
  return col;
}

std::uint64_t seed_uniform(const ContextSeed& seed, std::uint64_t n) {
  const std::uint64_t h = score_word(seed, 0xffffffffu, 0xffffffffu, 0);
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * n) >> 64);
}

}  // namespace binomark
