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

#ifndef BINOMARK_ENCODER_HPP_
#define BINOMARK_ENCODER_HPP_

#include "binomark/core.hpp"
#include "binomark/prf.hpp"

#include <Eigen/Dense>

#include <vector>

namespace binomark {

/// Standard normal CDF, |error| well below 1e-12.
double normal_cdf(double x);

/// XNOR of the raw score and the message bit.
inline int complement_score(int g, int bit) { return bit ? g : 1 - g; }

/// Number of message bits a token's raw scores agree with.
int binomial_score(const Eigen::Ref<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>& g,
                   const Message& message);

/// Complemented block restricted to message bits [first, first + count).
BitMatrix complement_block(const ScoreBlock& block, const Message& message, std::size_t first,
                           std::size_t count);
inline BitMatrix complement_block(const ScoreBlock& block, const Message& message) {
  return complement_block(block, message, 0, message.size());
}

/// Per-column binomial score sum_i XNOR(G_i(u), M_i).
Eigen::VectorXd stateless_scores(const ScoreBlock& block, const Message& message);

inline const std::vector<double>& default_horizons() {
  static const std::vector<double> kHorizons = {200, 300, 500, 1000, 2000};
  return kHorizons;
}

// Running decoded statistics of the sequence being generated.
struct EncoderState {
  Eigen::VectorXi d;
  long t = 0;
  std::vector<double> horizons = default_horizons();

  explicit EncoderState(std::size_t m, std::vector<double> horizon_set = default_horizons());
};

/// d_i += 2 * realized_i - 1, t += 1.
EncoderState update_state(EncoderState state,
                          const Eigen::Ref<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>& realized);

// Scores that are affine in the complemented bits: offset + gain . G~(u).
// Both the stateless and the stateful encoders have this form, which lets the
// Soft-PPL solver draw fresh bits without knowing the encoder.
struct LinearScoreModel {
  double offset = 0.0;
  Eigen::VectorXd gain;

  std::size_t bits() const { return static_cast<std::size_t>(gain.size()); }
  Eigen::VectorXd apply(const BitMatrix& complemented) const;

  static LinearScoreModel stateless(std::size_t m);
  /// Averages Phi((d_i +/- 1) / sqrt(T)) over the horizon set.
  static LinearScoreModel stateful(const EncoderState& state);
};

/// sum_i mean_T Phi((d_i + 2 G~_i(u) - 1) / sqrt(T)) for each column u.
Eigen::VectorXd stateful_scores(const EncoderState& state, const ScoreBlock& block, const Message& message);

/// Phi(d / sqrt(remaining)): probability that a bit with statistic d is still
/// decoded correctly after `remaining` watermark-independent tokens.
double lemma1_probability(long d, long remaining);

struct AllocationConfig {
  std::size_t segments = 1;
  bool enabled = false;

  void validate(std::size_t m) const;
};

/// Segment encoded at a position. Always 0 when disabled or with one segment.
std::size_t allocate_segment(const ContextSeed& seed, const AllocationConfig& cfg);

enum class EncoderMode { kStateless, kStateful, kAllocation };

struct EncoderConfig {
  EncoderMode mode = EncoderMode::kStateless;
  std::size_t segments = 1;  // allocation only
  std::vector<double> horizons = default_horizons();

  AllocationConfig allocation() const {
    return {mode == EncoderMode::kAllocation ? segments : 1, mode == EncoderMode::kAllocation};
  }
};

const char* to_string(EncoderMode mode);
EncoderMode encoder_mode_from_string(const std::string& s);

}  // namespace binomark

#endif  // BINOMARK_ENCODER_HPP_
