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

// Synthetic next-token models and the watermarked generation loop.

#ifndef BINOMARK_LM_SIM_HPP_
#define BINOMARK_LM_SIM_HPP_

#include "binomark/core.hpp"
#include "binomark/encoder.hpp"
#include "binomark/schemes.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace binomark {

enum class LmKind { kMarkov1, kUniform, kFixedTable };

const char* to_string(LmKind kind);
LmKind lm_kind_from_string(const std::string& s);

struct LmSpec {
  LmKind kind = LmKind::kMarkov1;
  std::size_t vocab_size = 1024;
  double alpha = 0.3;  // Dirichlet concentration of every row
  std::uint64_t seed = 0;

  friend bool operator==(const LmSpec&, const LmSpec&) = default;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ToyLM {
 public:
  /// Rows drawn once from Dirichlet(alpha), frozen by the seed.
  static ToyLM markov1(const Vocabulary& vocab, double alpha, std::uint64_t seed);
  static ToyLM uniform(const Vocabulary& vocab);
  /// One row: context-free. |vocab| rows: row of the previous token.
  static ToyLM fixed_table(const RowMatrix& rows);
  static ToyLM from_spec(const LmSpec& spec);

  const Vocabulary& vocab() const { return vocab_; }
  const LmSpec& spec() const { return spec_; }

  /// Law of the next token given everything generated so far.
  Distribution next_distribution(std::span<const Token> history) const;
  double prob(std::span<const Token> history, Token next) const;

  /// Fixed prompt sampled from the model with a stream derived from its seed.
  std::vector<Token> prompt(std::size_t length) const;

 private:
  ToyLM(LmSpec spec, Vocabulary vocab) : spec_(spec), vocab_(vocab) {}
  Eigen::Ref<const Eigen::RowVectorXd> row(std::span<const Token> history) const;

  LmSpec spec_;
  Vocabulary vocab_;
  std::shared_ptr<const RowMatrix> rows_;   // transition rows
  std::shared_ptr<const Eigen::RowVectorXd> start_;  // law of the first token
};

struct SamplerConfig {
  double temperature = 0.7;
  std::size_t top_k = 50;
  std::size_t min_tokens = 250;
  std::size_t max_tokens = 350;

  void validate() const;
};

/// Temperature, then top-k (ties by lower token id), then renormalize.
Distribution shape_distribution(const Distribution& p, const SamplerConfig& cfg);

/// Inverse-CDF draw.
Token sample_token(const Distribution& q, std::mt19937_64& rng);

struct AttackAnnotation {
  std::string kind;
  double fraction = 0.0;
  std::uint64_t seed = 0;
};

struct GenerationRecord {
  std::vector<Token> prompt;
  std::vector<Token> tokens;
  Message message;
  SchemeConfig scheme;
  EncoderConfig encoder;
  LmSpec lm;
  SamplerConfig sampler;
  std::size_t context_window = 3;
  std::uint64_t rng_seed = 0;
  std::vector<AttackAnnotation> attacks;

  bool watermarked() const { return scheme.kind != SchemeKind::kNone; }
  TokenSequence sequence() const { return {prompt, tokens}; }
};

// Encode-time view of each step, for agreement checks against the decoder.
struct GenerationTrace {
  BitMatrix realized;  // m x n raw layer-0 scores of the sampled tokens
  std::vector<LambdaSolution> solves;
};

/// Checks that scheme, encoder and message length can be combined.
void check_combination(const SchemeConfig& scheme, const EncoderConfig& encoder, std::size_t m);

/// Algorithm: shape the LM law, score the candidates, transform, sample, and
/// feed the realized complemented scores back into the encoder state.
GenerationRecord generate(const ToyLM& lm, const WatermarkKey& key, const Message& message,
                          const SchemeConfig& scheme, const EncoderConfig& encoder, const SamplerConfig& sampler,
                          std::size_t n_tokens, std::uint64_t rng_seed, GenerationTrace* trace = nullptr);

inline constexpr std::size_t kPromptLength = 3;

/// Mean negative log-likelihood of the completion under the unshaped model.
/// Throws ZeroProbabilityToken if some token has zero probability.
double log_perplexity(const ToyLM& lm, const TokenSequence& seq);
double perplexity(const ToyLM& lm, const TokenSequence& seq);

}  // namespace binomark

#endif  // BINOMARK_LM_SIM_HPP_
