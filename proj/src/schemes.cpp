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

#include <bit>
#include <cmath>
#include <limits>

namespace binomark {

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kNone: return "none";
    case SchemeKind::kRedGreen: return "red_green";
    case SchemeKind::kSoftPpl: return "soft_ppl";
    case SchemeKind::kSoftPplUnconstrained: return "soft_ppl_unconstrained";
    case SchemeKind::kSynthId: return "synthid";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& s) {
  if (s == "none") return SchemeKind::kNone;
  if (s == "red_green") return SchemeKind::kRedGreen;
  if (s == "soft_ppl") return SchemeKind::kSoftPpl;
  if (s == "soft_ppl_unconstrained") return SchemeKind::kSoftPplUnconstrained;
  if (s == "synthid") return SchemeKind::kSynthId;
  throw Error(ErrorCode::kConfig, "unknown scheme '" + s + "'");
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOk: return "ok";
    case SolveStatus::kDegenerate: return "degenerate";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kSaturated: return "saturated";
  }
  return "unknown";
}

void SchemeConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kConfig, what); };
  if (!(delta >= 0)) bad("delta must be >= 0");
  if (!(epsilon >= 0)) bad("epsilon must be >= 0");
  if (kind == SchemeKind::kSoftPplUnconstrained && !(lambda > 0)) bad("lambda must be > 0");
  if (layers < 1) bad("layers must be >= 1");
  if (mc_samples < 1) bad("mc_samples must be >= 1");
  if (iterations < 1) bad("iterations must be >= 1");
}

namespace {

void check_lengths(const Distribution& p, const Eigen::VectorXd& scores) {
  if (static_cast<std::size_t>(scores.size()) != p.size()) {
    throw Error(ErrorCode::kLengthMismatch, "score vector and distribution lengths differ");
  }
}

// Fixed batch of fresh score draws on the support of p.
class SoftPplObjective {
 public:
  SoftPplObjective(const Distribution& p, const LinearScoreModel& model, std::size_t samples, std::uint64_t seed) {
    const auto support = p.support();
    const auto n = static_cast<Eigen::Index>(support.size());
    log_p_.resize(n);
    for (Eigen::Index c = 0; c < n; ++c) log_p_[c] = std::log(p[support[static_cast<std::size_t>(c)]]);

    const std::size_t m = model.bits();
    const bool plain = (model.gain.array() == model.gain[0]).all();
    scores_.resize(static_cast<Eigen::Index>(samples), n);
    std::mt19937_64 rng(seed);
    for (Eigen::Index j = 0; j < scores_.rows(); ++j) {
      for (Eigen::Index c = 0; c < n; ++c) {
        double s = model.offset;
        for (std::size_t w = 0; w * 64 < m; ++w) {
          std::uint64_t bits = rng();
          const std::size_t width = std::min<std::size_t>(64, m - w * 64);
          if (width < 64) bits &= (std::uint64_t{1} << width) - 1;
          if (plain) {
            s += model.gain[0] * std::popcount(bits);
          } else {
            while (bits) {
              const int b = std::countr_zero(bits);
              s += model.gain[static_cast<Eigen::Index>(w * 64 + b)];
              bits &= bits - 1;
            }
          }
        }
        scores_(j, c) = s;
      }
    }
  }

  double value(double lambda) const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < scores_.rows(); ++j) {
      Eigen::Index best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < scores_.cols(); ++c) {
        const double v = scores_(j, c) + lambda * log_p_[c];
        if (v > best_v) {
          best_v = v;
          best = c;
        }
      }
      total += log_p_[best];
    }
    return total / static_cast<double>(scores_.rows());
  }

  // lambda -> 0+: highest score, ties resolved toward higher probability.
  double value_at_zero() const {
    double total = 0.0;
    for (Eigen::Index j = 0; j < scores_.rows(); ++j) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < scores_.cols(); ++c) {
        if (scores_(j, c) > scores_(j, best) || (scores_(j, c) == scores_(j, best) && log_p_[c] > log_p_[best])) {
          best = c;
        }
      }
      total += log_p_[best];
    }
    return total / static_cast<double>(scores_.rows());
  }

 private:
  Eigen::VectorXd log_p_;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> scores_;
};

}  // namespace

Distribution red_green_transform(const Distribution& p, const Eigen::VectorXd& scores, double delta) {
  check_lengths(p, scores);
  if (!(delta >= 0)) throw Error(ErrorCode::kInvalidArgument, "delta must be >= 0");
  const double top = scores.maxCoeff();
  Eigen::VectorXd w = p.probs().array() * (delta * (scores.array() - top)).exp();
  return Distribution::from_weights(std::move(w));
}

Token soft_ppl_transform(const Distribution& p, const Eigen::VectorXd& scores, double lambda,
                         std::mt19937_64& tie_rng) {
  check_lengths(p, scores);
  if (!(lambda > 0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be > 0");
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Token> ties;
  for (Eigen::Index u = 0; u < scores.size(); ++u) {
    if (!(p[static_cast<std::size_t>(u)] > 0.0)) continue;
    const double v = scores[u] + lambda * std::log(p[static_cast<std::size_t>(u)]);
    const double tol = 1e-12 * std::max(1.0, std::abs(v));
    if (v > best + tol) {
      best = v;
      ties.assign(1, static_cast<Token>(u));
    } else if (v >= best - tol) {
      ties.push_back(static_cast<Token>(u));
    }
  }
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(tie_rng)];
}

LambdaSolution solve_lambda(const Distribution& p, const LinearScoreModel& model, double epsilon,
                            const SolverOptions& options) {
  if (!(epsilon >= 0)) throw Error(ErrorCode::kInvalidArgument, "epsilon must be >= 0");
  if (options.mc_samples < 1 || options.iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "solver needs at least one sample and one iteration");
  }
  LambdaSolution sol;
  sol.target = -p.entropy() - epsilon;
  if (p.support().size() <= 1) {
    sol.lambda = options.upper;
    sol.status = SolveStatus::kDegenerate;
    sol.achieved = -p.entropy();
    return sol;
  }

  const SoftPplObjective objective(p, model, options.mc_samples, options.seed);
  const double slack = 1e-12 * std::max(1.0, std::abs(sol.target));

  double lo = 0.0, hi = options.upper;
  const double at_upper = objective.value(hi);
  if (at_upper < sol.target - slack) {
    sol.lambda = hi;
    sol.status = SolveStatus::kSaturated;
    sol.achieved = at_upper;
    return sol;
  }
  for (std::size_t it = 0; it < options.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (objective.value(mid) >= sol.target - slack) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  sol.lambda = hi;
  sol.achieved = objective.value(hi);
  if (objective.value_at_zero() > sol.target + slack) sol.status = SolveStatus::kInfeasible;
  return sol;
}

LambdaSolution solve_lambda(const Distribution& p, std::size_t m, double epsilon, const SolverOptions& options) {
  return solve_lambda(p, LinearScoreModel::stateless(m), epsilon, options);
}

double expected_log_prob(const Distribution& p, const LinearScoreModel& model, double lambda,
                         std::size_t samples, std::uint64_t seed) {
  if (p.support().size() <= 1) return -p.entropy();
  return SoftPplObjective(p, model, samples, seed).value(lambda);
}

Distribution synthid_layer(const Distribution& p, const Eigen::VectorXd& scores) {
  check_lengths(p, scores);
  const double range = scores.maxCoeff() - scores.minCoeff();
  if (!(range > 0.0)) return p;
  const double sigma = 1.0 / range;
  const double mean = p.probs().dot(scores);
  Eigen::VectorXd q = p.probs().array() * (1.0 + sigma * (scores.array() - mean));
  // Rounding can leave tiny negatives on the minimum-score token.
  q = q.cwiseMax(0.0);
  return Distribution::from_weights(std::move(q));
}

Distribution synthid_multibit_transform(const Distribution& p, const ContextSeed& seed, const Message& message,
                                        std::size_t n_layer) {
  return synthid_multibit_transform(p, seed, message, n_layer, LinearScoreModel::stateless(message.size()));
}

Distribution synthid_multibit_transform(const Distribution& p, const ContextSeed& seed, const Message& message,
                                        std::size_t n_layer, const LinearScoreModel& model) {
  if (n_layer < 1) throw Error(ErrorCode::kInvalidArgument, "n_layer must be >= 1");
  const Vocabulary vocab(p.size());
  Distribution q = p;
  for (std::size_t l = 0; l < n_layer; ++l) {
    const ScoreBlock block = score_matrix(seed, vocab, message.size(), static_cast<std::uint32_t>(l));
    q = synthid_layer(q, model.apply(complement_block(block, message)));
  }
  return q;
}

Eigen::VectorXd synthid_weights(std::size_t n_layer) {
  if (n_layer < 1) throw Error(ErrorCode::kInvalidArgument, "n_layer must be >= 1");
  const auto n = static_cast<Eigen::Index>(n_layer);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(1, 10.0);
  if (n_layer > 1) w = Eigen::VectorXd::LinSpaced(n, 10.0, 1.0);
  return w * (static_cast<double>(n_layer) / w.sum());
}

Eigen::VectorXd synthid_weighted_decode(const BitMatrix& layer_scores) {
  const auto n_layer = static_cast<std::size_t>(layer_scores.cols());
  const Eigen::VectorXd w = synthid_weights(n_layer);
  return layer_scores.cast<double>() * w / static_cast<double>(n_layer);
}

}  // namespace binomark
