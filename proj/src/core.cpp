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

#include "binomark/core.hpp"

#include <cmath>

namespace binomark {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNegativeEntry: return "NegativeEntry";
    case ErrorCode::kSumNotOne: return "SumNotOne";
    case ErrorCode::kBadHex: return "BadHex";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyAfterDedup: return "EmptyAfterDedup";
    case ErrorCode::kIllegalCombination: return "IllegalCombination";
    case ErrorCode::kZeroProbabilityToken: return "ZeroProbabilityToken";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kConfig: return "Config";
    case ErrorCode::kIo: return "Io";
  }
  return "Unknown";
}

Message::Message(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "message must have at least one bit");
  }
  for (auto b : bits_) {
    if (b > 1) throw Error(ErrorCode::kInvalidArgument, "message bits must be 0 or 1");
  }
}

Message Message::random(std::size_t m, std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits(m);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  return Message(std::move(bits));
}

Message Message::complement() const {
  std::vector<std::uint8_t> out(bits_.size());
  for (std::size_t i = 0; i < bits_.size(); ++i) out[i] = bits_[i] ^ 1u;
  return Message(std::move(out));
}

std::string Message::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Message message_from_hex(std::string_view hex, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::kInvalidArgument, "message length must be >= 1");
  for (char c : hex) {
    if (hex_value(c) < 0) {
      throw Error(ErrorCode::kBadHex, "invalid hex digit '" + std::string(1, c) + "'");
    }
  }
  if (hex.size() * 4 < m) {
    throw Error(ErrorCode::kTooShort, "hex string encodes " + std::to_string(hex.size() * 4) +
                                          " bits, need " + std::to_string(m));
  }
  std::vector<std::uint8_t> bits(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int nibble = hex_value(hex[i / 4]);
    bits[i] = static_cast<std::uint8_t>((nibble >> (3 - i % 4)) & 1);
  }
  return Message(std::move(bits));
}

std::string message_to_hex(const Message& message) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out((message.size() + 3) / 4, '0');
  for (std::size_t i = 0; i < message.size(); ++i) {
    if (message[i]) {
      const int v = hex_value(out[i / 4]) | (1 << (3 - i % 4));
      out[i / 4] = kDigits[v];
    }
  }
  return out;
}

Vocabulary::Vocabulary(std::size_t n) : size(n) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "vocabulary needs at least 2 tokens");
}

Distribution Distribution::from_weights(Eigen::VectorXd weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw Error(ErrorCode::kInvalidArgument, "distribution weights must have a positive finite sum");
  }
  weights /= total;
  return Distribution(std::move(weights));
}

Distribution Distribution::uniform(std::size_t n) {
  return Distribution(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Distribution Distribution::one_hot(std::size_t n, Token at) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  p[at] = 1.0;
  return Distribution(std::move(p));
}

std::vector<Token> Distribution::support() const {
  std::vector<Token> out;
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) out.push_back(static_cast<Token>(i));
  }
  return out;
}

double Distribution::entropy() const {
  double h = 0.0;
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (probs_[i] > 0.0) h -= probs_[i] * std::log(probs_[i]);
  }
  return h;
}

Distribution validate_distribution(std::span<const double> probs) {
  if (probs.empty()) throw Error(ErrorCode::kInvalidArgument, "distribution is empty");
  double total = 0.0;
  for (double v : probs) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "distribution entry is not finite");
    if (v < 0.0) throw Error(ErrorCode::kNegativeEntry, "distribution has a negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > Distribution::kIngestTolerance) {
    throw Error(ErrorCode::kSumNotOne, "distribution sums to " + std::to_string(total));
  }
  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
  p /= total;
  return Distribution(std::move(p));
}

std::vector<Token> TokenSequence::context(std::size_t t, std::size_t k, Token sentinel) const {
  std::vector<Token> ctx(k, sentinel);
  // History visible at position t is prefix ++ tokens[0..t).
  const std::size_t history = prefix.size() + t;
  for (std::size_t j = 0; j < k && j < history; ++j) {
    const std::size_t idx = history - 1 - j;  // j-th most recent
    ctx[k - 1 - j] = idx >= prefix.size() ? tokens[idx - prefix.size()] : prefix[idx];
  }
  return ctx;
}

WatermarkKey WatermarkKey::from_hex(std::string_view hex, std::size_t context_window) {
  if (hex.size() != 2 * kBytes) {
    throw Error(ErrorCode::kBadHex, "watermark key must be 64 hex characters");
  }
  if (context_window < 1) throw Error(ErrorCode::kInvalidArgument, "context window must be >= 1");
  WatermarkKey key;
  key.context_window = context_window;
  for (std::size_t i = 0; i < kBytes; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(ErrorCode::kBadHex, "watermark key is not valid hex");
    key.bytes[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return key;
}

WatermarkKey WatermarkKey::random(std::mt19937_64& rng, std::size_t context_window) {
  if (context_window < 1) throw Error(ErrorCode::kInvalidArgument, "context window must be >= 1");
  WatermarkKey key;
  key.context_window = context_window;
  for (std::size_t i = 0; i < kBytes; i += 8) {
    std::uint64_t w = rng();
    for (std::size_t j = 0; j < 8; ++j) key.bytes[i + j] = static_cast<std::uint8_t>(w >> (8 * j));
  }
  return key;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace binomark
