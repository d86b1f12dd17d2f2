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

#include "binomark/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace binomark {
namespace {

TEST(SignTest, CountsAndTail) {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{0, 0, 0, 0, 5};
  const SignTestResult r = paired_sign_test(a, b);
  EXPECT_EQ(r.wins, 4);
  EXPECT_EQ(r.losses, 0);
  EXPECT_EQ(r.ties, 1);
  EXPECT_NEAR(r.pvalue, 1.0 / 16.0, 1e-15);
  EXPECT_DOUBLE_EQ(paired_sign_test(b, b).pvalue, 1.0);
}

TEST(SpearmanTest, PerfectAndTied) {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  const std::vector<double> y{2, 4, 8, 16, 32, 64};
  EXPECT_NEAR(spearman(x, y).rho, 1.0, 1e-12);
  const std::vector<double> rev(y.rbegin(), y.rend());
  EXPECT_NEAR(spearman(x, rev).rho, -1.0, 1e-12);
  const std::vector<double> flat(6, 1.0);
  EXPECT_DOUBLE_EQ(spearman(x, flat).pvalue, 1.0);
}

TEST(SpearmanTest, KnownValueWithTies) {
  // Ranks x: 1 2 3 4 5, y: 1.5 1.5 3 5 4 -> Pearson on ranks.
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{1, 1, 2, 4, 3};
  const double rx[] = {1, 2, 3, 4, 5};
  const double ry[] = {1.5, 1.5, 3, 5, 4};
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 5; ++i) {
    sxy += (rx[i] - 3) * (ry[i] - 3);
    sxx += (rx[i] - 3) * (rx[i] - 3);
    syy += (ry[i] - 3) * (ry[i] - 3);
  }
  EXPECT_NEAR(spearman(x, y).rho, sxy / std::sqrt(sxx * syy), 1e-12);
}

TEST(KsTest, UniformPassesAndSkewFails) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> good(2000), bad(2000);
  for (auto& v : good) v = u(rng);
  for (auto& v : bad) v = u(rng) * u(rng);
  EXPECT_GT(ks_uniform(good).pvalue, 0.01);
  EXPECT_LT(ks_uniform(bad).pvalue, 1e-6);
}

TEST(KsTest, StatisticOfPointMass) {
  const std::vector<double> half(10, 0.5);
  EXPECT_NEAR(ks_uniform(half).statistic, 0.5, 1e-15);
}

TEST(WilsonTest, Bounds) {
  const Interval i = wilson_interval(50, 100);
  EXPECT_LT(i.low, 0.5);
  EXPECT_GT(i.high, 0.5);
  EXPECT_NEAR(i.low, 0.4038, 1e-4);
  EXPECT_DOUBLE_EQ(wilson_interval(0, 100).low, 0.0);
  EXPECT_DOUBLE_EQ(wilson_interval(100, 100).high, 1.0);
}

}  // namespace
}  // namespace binomark
