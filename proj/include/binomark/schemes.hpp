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

// Watermark transforms q(scores, p).
//
// All transforms take a score vector indexed by token id, with the same
// length as the distribution. Tokens with p(u) = 0 never receive mass.

#ifndef BINOMARK_SCHEMES_HPP_
#define BINOMARK_SCHEMES_HPP_

#include "binomark/core.hpp"
#include "binomark/encoder.hpp"
#include "binomark/prf.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>

namespace binomark {

enum class SchemeKind { kNone, kRedGreen, kSoftPpl, kSoftPplUnconstrained, kSynthId };

const char* to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& s);

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kRedGreen;
  double delta = 2.0;      // red_green
  double epsilon = 0.3;    // soft_ppl
  double lambda = 1.0;     // soft_ppl_unconstrained
  std::size_t layers = 100;  // synthid
  std::size_t mc_samples = 128;
  std::size_t iterations = 60;
  std::uint64_t solver_seed = 0;
  bool allow_stateful = false;  // synthid ablation

  void validate() const;
};

/// q(u) proportional to p(u) exp(delta * score(u)).
Distribution red_green_transform(const Distribution& p, const Eigen::VectorXd& scores, double delta);

/// argmax over the support of score(u) + lambda log p(u); ties drawn uniformly.
Token soft_ppl_transform(const Distribution& p, const Eigen::VectorXd& scores, double lambda,
                         std::mt19937_64& tie_rng);

enum class SolveStatus { kOk, kDegenerate, kInfeasible, kSaturated };
const char* to_string(SolveStatus status);

struct SolverOptions {
  std::size_t mc_samples = 128;
  std::size_t iterations = 60;
  std::uint64_t seed = 0;
  double upper = 100.0;
};

struct LambdaSolution {
  double lambda = 0.0;
  SolveStatus status = SolveStatus::kOk;
  double target = 0.0;    // p . log p - epsilon
  double achieved = 0.0;  // Monte-Carlo E[log p(argmax)] at lambda
};

/// Bisection for the smallest lambda in (0, upper) whose expected log
/// probability of the selected token reaches p . log p - epsilon. The
/// expectation is estimated on one fixed batch of fresh score draws, so the
/// objective is monotone in lambda and the solve is deterministic.
///
/// Degenerate: single-token support, returns `upper`.
/// Infeasible: even lambda -> 0 distorts less than epsilon, returns the lower
///             end of the bracket.
/// Saturated:  lambda = upper still distorts more than epsilon.
LambdaSolution solve_lambda(const Distribution& p, const LinearScoreModel& model, double epsilon,
                            const SolverOptions& options = {});
LambdaSolution solve_lambda(const Distribution& p, std::size_t m, double epsilon,
                            const SolverOptions& options = {});

/// Independent Monte-Carlo estimate of E_G[q . log p] at a fixed lambda.
double expected_log_prob(const Distribution& p, const LinearScoreModel& model, double lambda,
                         std::size_t samples, std::uint64_t seed);

/// One distortion-free tournament layer with sigma = 1 / (max - min) over all
/// scores. Equal scores leave p unchanged.
Distribution synthid_layer(const Distribution& p, const Eigen::VectorXd& scores);

/// n_layer layers, layer l scored with its own PRF block and the same message.
Distribution synthid_multibit_transform(const Distribution& p, const ContextSeed& seed, const Message& message,
                                        std::size_t n_layer);
/// Same, with the per-layer scores produced by `model` from the complemented bits.
Distribution synthid_multibit_transform(const Distribution& p, const ContextSeed& seed, const Message& message,
                                        std::size_t n_layer, const LinearScoreModel& model);

/// Linearly decaying 10 -> 1, rescaled to sum to n_layer.
Eigen::VectorXd synthid_weights(std::size_t n_layer);

/// Weighted mean over layers of one token's raw scores (m x n_layer).
Eigen::VectorXd synthid_weighted_decode(const BitMatrix& layer_scores);

}  // namespace binomark

#endif  // BINOMARK_SCHEMES_HPP_
