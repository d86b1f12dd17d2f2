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

// Small hypothesis tests used to gate experiment trends.

#ifndef BINOMARK_STATS_HPP_
#define BINOMARK_STATS_HPP_

#include <span>

namespace binomark {

struct SignTestResult {
  long wins = 0;    // pairs with a > b
  long losses = 0;  // pairs with a < b
  long ties = 0;
  double pvalue = 1.0;  // one-sided, H1: a tends to exceed b
};

/// Paired sign test over non-tied pairs.
SignTestResult paired_sign_test(std::span<const double> a, std::span<const double> b);

struct CorrelationResult {
  double rho = 0.0;
  double pvalue = 1.0;  // two-sided, t approximation with n - 2 dof
};

/// Spearman rank correlation with average ranks for ties.
CorrelationResult spearman(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1).
KsResult ks_uniform(std::span<const double> samples);

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Wilson score interval for k successes out of n.
Interval wilson_interval(long k, long n, double z = 1.959963984540054);

}  // namespace binomark

#endif  // BINOMARK_STATS_HPP_
