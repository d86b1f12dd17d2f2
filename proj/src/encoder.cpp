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

#include "binomark/encoder.hpp"

#include <cmath>

namespace binomark {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

int binomial_score(const Eigen::Ref<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>& g,
                   const Message& message) {
  if (static_cast<std::size_t>(g.size()) != message.size()) {
    throw Error(ErrorCode::kLengthMismatch, "score column and message lengths differ");
  }
  int s = 0;
  for (Eigen::Index i = 0; i < g.size(); ++i) s += complement_score(g[i], message[static_cast<std::size_t>(i)]);
  return s;
}

BitMatrix complement_block(const ScoreBlock& block, const Message& message, std::size_t first,
                           std::size_t count) {
  if (static_cast<std::size_t>(block.rows()) != message.size() || first + count > message.size()) {
    throw Error(ErrorCode::kLengthMismatch, "score block rows do not match the message");
  }
  BitMatrix out(static_cast<Eigen::Index>(count), block.cols());
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    for (std::size_t r = 0; r < count; ++r) {
      const auto i = static_cast<Eigen::Index>(first + r);
      out(static_cast<Eigen::Index>(r), c) =
          static_cast<std::uint8_t>(complement_score(block.bits(i, c), message[first + r]));
    }
  }
  return out;
}

Eigen::VectorXd stateless_scores(const ScoreBlock& block, const Message& message) {
  return complement_block(block, message).cast<double>().colwise().sum().transpose();
}

EncoderState::EncoderState(std::size_t m, std::vector<double> horizon_set)
    : d(Eigen::VectorXi::Zero(static_cast<Eigen::Index>(m))), horizons(std::move(horizon_set)) {
  if (horizons.empty()) throw Error(ErrorCode::kInvalidArgument, "horizon set must not be empty");
  for (double h : horizons) {
    if (!(h > 0)) throw Error(ErrorCode::kInvalidArgument, "horizons must be positive");
  }
}

EncoderState update_state(EncoderState state,
                          const Eigen::Ref<const Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>>& realized) {
  if (realized.size() != state.d.size()) {
    throw Error(ErrorCode::kLengthMismatch, "realized scores do not match encoder state");
  }
  state.d += (2 * realized.cast<int>().array() - 1).matrix();
  state.t += 1;
  return state;
}

Eigen::VectorXd LinearScoreModel::apply(const BitMatrix& complemented) const {
  Eigen::VectorXd s = complemented.cast<double>().transpose() * gain;
  s.array() += offset;
  return s;
}

LinearScoreModel LinearScoreModel::stateless(std::size_t m) {
  return {0.0, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m))};
}

LinearScoreModel LinearScoreModel::stateful(const EncoderState& state) {
  const Eigen::Index m = state.d.size();
  LinearScoreModel model;
  model.gain.resize(m);
  const double inv = 1.0 / static_cast<double>(state.horizons.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    double hit = 0.0, miss = 0.0;
    for (double T : state.horizons) {
      const double r = 1.0 / std::sqrt(T);
      hit += normal_cdf((state.d[i] + 1) * r);
      miss += normal_cdf((state.d[i] - 1) * r);
    }
    model.offset += miss * inv;
    model.gain[i] = (hit - miss) * inv;
  }
  return model;
}

Eigen::VectorXd stateful_scores(const EncoderState& state, const ScoreBlock& block, const Message& message) {
  if (static_cast<std::size_t>(state.d.size()) != message.size()) {
    throw Error(ErrorCode::kLengthMismatch, "encoder state does not match the message");
  }
  return LinearScoreModel::stateful(state).apply(complement_block(block, message));
}

double lemma1_probability(long d, long remaining) {
  if (remaining < 1) throw Error(ErrorCode::kInvalidArgument, "remaining must be >= 1");
  return normal_cdf(static_cast<double>(d) / std::sqrt(static_cast<double>(remaining)));
}

void AllocationConfig::validate(std::size_t m) const {
  if (segments < 1 || segments > m || m % segments != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "segment count " + std::to_string(segments) + " must divide message length " + std::to_string(m));
  }
}

std::size_t allocate_segment(const ContextSeed& seed, const AllocationConfig& cfg) {
  if (cfg.segments < 1) throw Error(ErrorCode::kInvalidArgument, "segment count must be >= 1");
  if (!cfg.enabled || cfg.segments == 1) return 0;
  return static_cast<std::size_t>(seed_uniform(seed, cfg.segments));
}

const char* to_string(EncoderMode mode) {
  switch (mode) {
    case EncoderMode::kStateless: return "stateless";
    case EncoderMode::kStateful: return "stateful";
    case EncoderMode::kAllocation: return "allocation";
  }
  return "unknown";
}

EncoderMode encoder_mode_from_string(const std::string& s) {
  if (s == "stateless") return EncoderMode::kStateless;
  if (s == "stateful") return EncoderMode::kStateful;
  if (s == "allocation") return EncoderMode::kAllocation;
  throw Error(ErrorCode::kConfig, "unknown encoder mode '" + s + "'");
}

}  // namespace binomark
