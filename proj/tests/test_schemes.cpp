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

#include "binomark/schemes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace binomark {
namespace {

Distribution dist(std::initializer_list<double> v) { return validate_distribution(std::vector<double>(v)); }

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

Distribution random_distribution(std::size_t n, std::mt19937_64& rng) {
  std::gamma_distribution<double> g(0.5, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (auto& x : w) x = g(rng) + 1e-12;
  return Distribution::from_weights(w);
}

TEST(RedGreenTest, ZeroDeltaIsIdentity) {
  const Distribution p = dist({0.2, 0.3, 0.5});
  const Distribution q = red_green_transform(p, vec({3, 0, 1}), 0.0);
  EXPECT_LT((q.probs() - p.probs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RedGreenTest, ClosedFormTilt) {
  const Distribution q = red_green_transform(dist({0.5, 0.5}), vec({1, 0}), std::log(2.0));
  EXPECT_NEAR(q[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(q[1], 1.0 / 3.0, 1e-15);
}

TEST(RedGreenTest, ConstantScoresCancel) {
  const Distribution p = dist({0.1, 0.6, 0.3});
  const Distribution q = red_green_transform(p, vec({7, 7, 7}), 5.0);
  EXPECT_LT((q.probs() - p.probs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RedGreenTest, StableForHugeDelta) {
  const Distribution q = red_green_transform(dist({0.5, 0.5}), vec({32, 0}), 1000.0);
  EXPECT_DOUBLE_EQ(q[0], 1.0);
  EXPECT_THROW(red_green_transform(dist({0.5, 0.5}), vec({1}), 1.0), Error);
}

TEST(SoftPplTest, LimitsAndTieFreeExample) {
  std::mt19937_64 rng(1);
  const Distribution p = dist({0.1, 0.6, 0.3});
  const Eigen::VectorXd s = vec({5, 0, 1});
  EXPECT_EQ(soft_ppl_transform(p, s, 1e9, rng), 1u);
  EXPECT_EQ(soft_ppl_transform(p, s, 1e-9, rng), 0u);
  EXPECT_EQ(soft_ppl_transform(dist({0.5, 0.5}), vec({3, 1}), 1.0, rng), 0u);
}

TEST(SoftPplTest, NeverPicksZeroProbability) {
  std::mt19937_64 rng(2);
  EXPECT_EQ(soft_ppl_transform(dist({0.0, 1.0}), vec({100, 0}), 1e-9, rng), 1u);
}

TEST(SoftPplTest, TiesAreBrokenByTheRng) {
  std::vector<int> picks(2);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 400; ++i) ++picks[soft_ppl_transform(dist({0.5, 0.5}), vec({1, 1}), 1.0, rng)];
  EXPECT_GT(picks[0], 100);
  EXPECT_GT(picks[1], 100);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(soft_ppl_transform(dist({0.5, 0.5}), vec({1, 1}), 1.0, a),
            soft_ppl_transform(dist({0.5, 0.5}), vec({1, 1}), 1.0, b));
}

TEST(SolveLambdaTest, DegenerateSupport) {
  const Distribution p = Distribution::one_hot(8, 3);
  const LambdaSolution sol = solve_lambda(p, 16, 0.3);
  EXPECT_EQ(sol.status, SolveStatus::kDegenerate);
  std::mt19937_64 rng(1);
  Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(8, 16, 0);
  for (double lambda : {1e-6, 1.0, sol.lambda}) EXPECT_EQ(soft_ppl_transform(p, s, lambda, rng), 3u);
}

TEST(SolveLambdaTest, ObjectiveIsMonotoneInLambda) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const Distribution p = random_distribution(64, rng);
    const LinearScoreModel model = LinearScoreModel::stateless(16);
    double prev = -INFINITY;
    for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
      const double v = expected_log_prob(p, model, lambda, 2000, 77);
      EXPECT_GE(v, prev - 1e-12);
      prev = v;
    }
  }
}

TEST(SolveLambdaTest, UniformTargetIsExact) {
  const Distribution p = Distribution::uniform(16);
  const LambdaSolution sol = solve_lambda(p, 8, 0.0);
  const double target = -std::log(16.0);
  EXPECT_NEAR(sol.target, target, 1e-12);
  const double check = expected_log_prob(p, LinearScoreModel::stateless(8), sol.lambda, 10000, 12345);
  EXPECT_NEAR(check, target, 0.02);
}

TEST(SolveLambdaTest, HitsTheTargetOnTheSolverBatch) {
  std::mt19937_64 rng(5);
  for (double eps : {0.0, 0.3, 1.0}) {
    const Distribution p = random_distribution(64, rng);
    const LambdaSolution sol = solve_lambda(p, 16, eps, {512, 60, 7, 100.0});
    if (sol.status != SolveStatus::kOk) continue;
    EXPECT_GE(sol.achieved, sol.target - 1e-9);
    EXPECT_GT(sol.lambda, 0.0);
    EXPECT_LT(sol.lambda, 100.0);
  }
}

TEST(SolveLambdaTest, StatusNames) {
  EXPECT_STREQ(to_string(SolveStatus::kOk), "ok");
  EXPECT_STREQ(to_string(SolveStatus::kDegenerate), "degenerate");
}

TEST(SynthIdLayerTest, EqualScoresLeavePUnchanged) {
  const Distribution p = dist({0.2, 0.5, 0.3});
  const Distribution q = synthid_layer(p, vec({2, 2, 2}));
  EXPECT_LT((q.probs() - p.probs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SynthIdLayerTest, ClosedFormTwoTokens) {
  for (double m : {1.0, 4.0, 32.0}) {
    const Distribution q = synthid_layer(dist({0.5, 0.5}), vec({m, 0}));
    EXPECT_NEAR(q[0], 0.75, 1e-15);
    EXPECT_NEAR(q[1], 0.25, 1e-15);
  }
}

// Average of q over every assignment of m x |vocab| raw bits.
Eigen::VectorXd exhaustive_mean(const Distribution& p, std::size_t m) {
  const auto n = static_cast<Eigen::Index>(p.size());
  const std::size_t cells = m * p.size();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  for (std::uint64_t a = 0; a < (1ULL << cells); ++a) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
    for (std::size_t c = 0; c < cells; ++c) s[static_cast<Eigen::Index>(c / m)] += (a >> c) & 1;
    sum += synthid_layer(p, s).probs();
  }
  return sum / static_cast<double>(1ULL << cells);
}

TEST(SynthIdLayerTest, DistortionFreeExhaustive) {
  const Distribution p3 = dist({0.2, 0.5, 0.3});
  EXPECT_LT((exhaustive_mean(p3, 2) - p3.probs()).cwiseAbs().maxCoeff(), 1e-12);
  const Distribution p4 = dist({0.1, 0.2, 0.3, 0.4});
  EXPECT_LT((exhaustive_mean(p4, 1) - p4.probs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SynthIdLayerTest, TwoLayerCompositionIsDistortionFree) {
  const Distribution p = dist({0.35, 0.65});
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
  int count = 0;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const Distribution q1 = synthid_layer(p, vec({double(a & 1), double((a >> 1) & 1)}));
      sum += synthid_layer(q1, vec({double(b & 1), double((b >> 1) & 1)})).probs();
      ++count;
    }
  }
  EXPECT_LT((sum / count - p.probs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SynthIdMultibitTest, SingleLayerMatchesStatelessScores) {
  ContextSeed seed;
  seed.bytes.fill(7);
  const Vocabulary vocab(12);
  const Message msg({1, 0, 1});
  std::mt19937_64 rng(6);
  const Distribution p = random_distribution(12, rng);
  const Distribution direct = synthid_layer(p, stateless_scores(score_matrix(seed, vocab, 3, 0), msg));
  const Distribution via_transform = synthid_multibit_transform(p, seed, msg, 1);
  EXPECT_LT((direct.probs() - via_transform.probs()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(SynthIdWeightsTest, Normalization) {
  EXPECT_NEAR(synthid_weights(1)[0], 1.0, 1e-15);
  const Eigen::VectorXd w2 = synthid_weights(2);
  EXPECT_NEAR(w2[0], 20.0 / 11.0, 1e-14);
  EXPECT_NEAR(w2[1], 2.0 / 11.0, 1e-14);
  EXPECT_NEAR(synthid_weights(100).sum(), 100.0, 1e-9);
  EXPECT_GT(synthid_weights(100)[0], synthid_weights(100)[99]);
}

TEST(SynthIdWeightsTest, UnanimousLayersContributeOne) {
  for (std::size_t n : {1, 2, 7, 100}) {
    const BitMatrix ones = BitMatrix::Ones(3, static_cast<Eigen::Index>(n));
    const Eigen::VectorXd c = synthid_weighted_decode(ones);
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(c[i], 1.0, 1e-12);
  }
}

TEST(SchemeConfigTest, DefaultsAndStrings) {
  EXPECT_EQ(SchemeConfig{}.layers, 100u);
  for (auto k : {SchemeKind::kNone, SchemeKind::kRedGreen, SchemeKind::kSoftPpl, SchemeKind::kSoftPplUnconstrained,
                 SchemeKind::kSynthId}) {
    EXPECT_EQ(scheme_kind_from_string(to_string(k)), k);
  }
  SchemeConfig bad;
  bad.delta = -1;
  EXPECT_THROW(bad.validate(), Error);
}

}  // namespace
}  // namespace binomark
