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

#ifndef BINOMARK_CORE_HPP_
#define BINOMARK_CORE_HPP_

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace binomark {

using Token = std::uint32_t;

enum class ErrorCode {
  kNegativeEntry,
  kSumNotOne,
  kBadHex,
  kTooShort,
  kInvalidArgument,
  kEmptyAfterDedup,
  kIllegalCombination,
  kZeroProbabilityToken,
  kLengthMismatch,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Payload bit vector. Index 0 is the first (most significant) bit in the
// textual hex form.
class Message {
 public:
  Message() = default;
  explicit Message(std::vector<std::uint8_t> bits);

  static Message random(std::size_t m, std::mt19937_64& rng);

  std::size_t size() const noexcept { return bits_.size(); }
  std::uint8_t operator[](std::size_t i) const { return bits_[i]; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  Message complement() const;
  std::string to_string() const;  // "0101..."

  friend bool operator==(const Message&, const Message&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Reads the first `m` bits of `hex`, most-significant bit first.
Message message_from_hex(std::string_view hex, std::size_t m);
/// Lowercase hex; the trailing nibble is zero padded.
std::string message_to_hex(const Message& message);

struct Vocabulary {
  std::size_t size = 0;

  explicit Vocabulary(std::size_t n);
  Token sentinel() const noexcept { return static_cast<Token>(size); }
  bool contains(Token t) const noexcept { return t < size; }
};

// Probability vector over the vocabulary. Always non-negative and summing to
// one within 1e-9.
class Distribution {
 public:
  static constexpr double kIngestTolerance = 1e-6;
  static constexpr double kNormTolerance = 1e-9;

  Distribution() = default;

  /// Rescales non-negative weights to sum to one. Throws on a zero total.
  static Distribution from_weights(Eigen::VectorXd weights);
  static Distribution uniform(std::size_t n);
  static Distribution one_hot(std::size_t n, Token at);

  const Eigen::VectorXd& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[static_cast<Eigen::Index>(i)]; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }

  /// Tokens with strictly positive mass, in increasing id order.
  std::vector<Token> support() const;
  double entropy() const;

 private:
  explicit Distribution(Eigen::VectorXd probs) : probs_(std::move(probs)) {}
  friend Distribution validate_distribution(std::span<const double>);

  Eigen::VectorXd probs_;
};

Distribution validate_distribution(std::span<const double> probs);

// A completion plus the tokens that precede it. The prefix only provides
// hashing context; it is never scored.
struct TokenSequence {
  std::vector<Token> prefix;
  std::vector<Token> tokens;

  std::size_t size() const noexcept { return tokens.size(); }
  bool empty() const noexcept { return tokens.empty(); }

  /// The k ids preceding completion position t, oldest first, padded on the
  /// left with `sentinel` when the history is shorter than k.
  std::vector<Token> context(std::size_t t, std::size_t k, Token sentinel) const;
};

struct WatermarkKey {
  static constexpr std::size_t kBytes = 32;

  std::array<std::uint8_t, kBytes> bytes{};
  std::size_t context_window = 3;

  static WatermarkKey from_hex(std::string_view hex, std::size_t context_window = 3);
  static WatermarkKey random(std::mt19937_64& rng, std::size_t context_window = 3);
};

struct DetectionReport {
  Message decoded;
  std::vector<double> per_bit_pvalues;
  std::vector<long> per_bit_counts;
  std::vector<long> per_bit_trials;
  long effective_length = 0;
  double zero_bit_statistic = 0.0;
  double zero_bit_pvalue = 1.0;
};

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace binomark

#endif  // BINOMARK_CORE_HPP_
