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

#include "binomark/lm_sim.hpp"

#include "binomark/prf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace binomark {

const char* to_string(LmKind kind) {
  switch (kind) {
    case LmKind::kMarkov1: return "markov1";
    case LmKind::kUniform: return "uniform";
    case LmKind::kFixedTable: return "fixed_table";
  }
  return "unknown";
}

LmKind lm_kind_from_string(const std::string& s) {
  if (s == "markov1") return LmKind::kMarkov1;
  if (s == "uniform") return LmKind::kUniform;
  if (s == "fixed_table") return LmKind::kFixedTable;
  throw Error(ErrorCode::kConfig, "unknown lm kind '" + s + "'");
}

namespace {

Eigen::RowVectorXd dirichlet_row(std::size_t n, double alpha, std::mt19937_64& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(n));
  for (Eigen::Index u = 0; u < row.size(); ++u) row[u] = gamma(rng);
  return row / row.sum();
}

}  // namespace

ToyLM ToyLM::markov1(const Vocabulary& vocab, double alpha, std::uint64_t seed) {
  if (!(alpha > 0)) throw Error(ErrorCode::kInvalidArgument, "Dirichlet concentration must be > 0");
  ToyLM lm({LmKind::kMarkov1, vocab.size, alpha, seed}, vocab);
  std::mt19937_64 rng(seed);
  auto rows = std::make_shared<RowMatrix>(vocab.size, vocab.size);
  for (std::size_t r = 0; r < vocab.size; ++r) rows->row(static_cast<Eigen::Index>(r)) = dirichlet_row(vocab.size, alpha, rng);
  lm.rows_ = std::move(rows);
  lm.start_ = std::make_shared<Eigen::RowVectorXd>(dirichlet_row(vocab.size, alpha, rng));
  return lm;
}

ToyLM ToyLM::uniform(const Vocabulary& vocab) {
  ToyLM lm({LmKind::kUniform, vocab.size, 1.0, 0}, vocab);
  const double v = 1.0 / static_cast<double>(vocab.size);
  lm.start_ = std::make_shared<Eigen::RowVectorXd>(Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(vocab.size), v));
  lm.rows_ = std::make_shared<RowMatrix>(*lm.start_);
  return lm;
}

ToyLM ToyLM::fixed_table(const RowMatrix& rows) {
  const Vocabulary vocab(static_cast<std::size_t>(rows.cols()));
  if (rows.rows() != 1 && static_cast<std::size_t>(rows.rows()) != vocab.size) {
    throw Error(ErrorCode::kInvalidArgument, "fixed table needs 1 or |vocab| rows");
  }
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    std::vector<double> row(rows.row(r).begin(), rows.row(r).end());
    validate_distribution(row);
  }
  ToyLM lm({LmKind::kFixedTable, vocab.size, 0.0, 0}, vocab);
  lm.rows_ = std::make_shared<RowMatrix>(rows);
  lm.start_ = std::make_shared<Eigen::RowVectorXd>(
      rows.rows() == 1 ? Eigen::RowVectorXd(rows.row(0))
                       : Eigen::RowVectorXd::Constant(rows.cols(), 1.0 / static_cast<double>(rows.cols())));
  return lm;
}

ToyLM ToyLM::from_spec(const LmSpec& spec) {
  const Vocabulary vocab(spec.vocab_size);
  switch (spec.kind) {
    case LmKind::kMarkov1: return markov1(vocab, spec.alpha, spec.seed);
    case LmKind::kUniform: return uniform(vocab);
    case LmKind::kFixedTable: break;
  }
  throw Error(ErrorCode::kConfig, "fixed_table models cannot be built from a spec");
}

Eigen::Ref<const Eigen::RowVectorXd> ToyLM::row(std::span<const Token> history) const {
  if (rows_->rows() == 1) return rows_->row(0);
  if (history.empty()) return *start_;
  const Token last = history.back();
  if (!vocab_.contains(last)) throw Error(ErrorCode::kInvalidArgument, "token id outside the vocabulary");
  return rows_->row(static_cast<Eigen::Index>(last));
}

Distribution ToyLM::next_distribution(std::span<const Token> history) const {
  return Distribution::from_weights(row(history).transpose());
}

double ToyLM::prob(std::span<const Token> history, Token next) const {
  if (!vocab_.contains(next)) throw Error(ErrorCode::kInvalidArgument, "token id outside the vocabulary");
  return row(history)[static_cast<Eigen::Index>(next)];
}

std::vector<Token> ToyLM::prompt(std::size_t length) const {
  std::mt19937_64 rng(mix_seed(spec_.seed, 0x70726f6d7074ULL));
  std::vector<Token> out;
  for (std::size_t i = 0; i < length; ++i) out.push_back(sample_token(next_distribution(out), rng));
  return out;
}

void SamplerConfig::validate() const {
  if (!(temperature > 0)) throw Error(ErrorCode::kConfig, "temperature must be > 0");
  if (top_k < 1) throw Error(ErrorCode::kConfig, "top_k must be >= 1");
  if (min_tokens > max_tokens) throw Error(ErrorCode::kConfig, "min_tokens must be <= max_tokens");
}

Distribution shape_distribution(const Distribution& p, const SamplerConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(p.size());
  Eigen::VectorXd w = p.probs();
  if (cfg.temperature != 1.0) {
    const double log_top = std::log(w.maxCoeff());
    for (Eigen::Index u = 0; u < n; ++u) {
      w[u] = w[u] > 0.0 ? std::exp((std::log(w[u]) - log_top) / cfg.temperature) : 0.0;
    }
  }
  if (cfg.top_k < p.size()) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto kth = order.begin() + static_cast<std::ptrdiff_t>(cfg.top_k);
    std::nth_element(order.begin(), kth - 1, order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return w[a] != w[b] ? w[a] > w[b] : a < b;
    });
    for (auto it = kth; it != order.end(); ++it) w[*it] = 0.0;
  }
  return Distribution::from_weights(std::move(w));
}

Token sample_token(const Distribution& q, std::mt19937_64& rng) {
  const double r = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  Token last = 0;
  for (std::size_t u = 0; u < q.size(); ++u) {
    if (q[u] <= 0.0) continue;
    acc += q[u];
    last = static_cast<Token>(u);
    if (r < acc) return last;
  }
  return last;  // r landed in the rounding gap above the final cumulative sum
}

void check_combination(const SchemeConfig& scheme, const EncoderConfig& encoder, std::size_t m) {
  scheme.validate();
  if (m < 1) throw Error(ErrorCode::kInvalidArgument, "message length must be >= 1");
  if (encoder.mode == EncoderMode::kAllocation) {
    if (encoder.segments < 1 || m % encoder.segments != 0) {
      throw Error(ErrorCode::kIllegalCombination, "allocation segments must divide the message length");
    }
    if (scheme.kind == SchemeKind::kSynthId) {
      throw Error(ErrorCode::kIllegalCombination, "position allocation is not supported with synthid");
    }
  }
  if (encoder.mode == EncoderMode::kStateful && scheme.kind == SchemeKind::kSynthId && !scheme.allow_stateful) {
    throw Error(ErrorCode::kIllegalCombination, "stateful encoding with synthid requires allow_stateful");
  }
}

GenerationRecord generate(const ToyLM& lm, const WatermarkKey& key, const Message& message,
                          const SchemeConfig& scheme, const EncoderConfig& encoder, const SamplerConfig& sampler,
                          std::size_t n_tokens, std::uint64_t rng_seed, GenerationTrace* trace) {
  check_combination(scheme, encoder, message.size());
  sampler.validate();
  const Vocabulary& vocab = lm.vocab();
  const std::size_t m = message.size();
  const bool stateful = encoder.mode == EncoderMode::kStateful;
  const AllocationConfig alloc = encoder.allocation();
  const std::size_t seg_bits = m / alloc.segments;

  GenerationRecord rec;
  rec.prompt = lm.prompt(kPromptLength);
  rec.message = message;
  rec.scheme = scheme;
  rec.encoder = encoder;
  rec.lm = lm.spec();
  rec.sampler = sampler;
  rec.context_window = key.context_window;
  rec.rng_seed = rng_seed;
  rec.tokens.reserve(n_tokens);

  if (trace) {
    trace->realized.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n_tokens));
    trace->solves.clear();
  }

  std::mt19937_64 rng(rng_seed);
  EncoderState state(m, encoder.horizons);
  TokenSequence seq{rec.prompt, {}};
  std::vector<Token> history = rec.prompt;
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vocab.size));

  for (std::size_t step = 0; step < n_tokens; ++step) {
    const Distribution p = shape_distribution(lm.next_distribution(history), sampler);
    const ContextSeed seed = position_seed(key, seq, step, vocab);
    Token token = 0;

    if (scheme.kind == SchemeKind::kNone) {
      token = sample_token(p, rng);
    } else if (scheme.kind == SchemeKind::kSynthId) {
      const LinearScoreModel model = stateful ? LinearScoreModel::stateful(state) : LinearScoreModel::stateless(m);
      token = sample_token(synthid_multibit_transform(p, seed, message, scheme.layers, model), rng);
    } else {
      const std::vector<Token> support = p.support();
      const ScoreBlock block = score_columns(seed, support, m, 0);
      const std::size_t first = allocate_segment(seed, alloc) * seg_bits;
      const LinearScoreModel model =
          stateful ? LinearScoreModel::stateful(state) : LinearScoreModel::stateless(seg_bits);
      const Eigen::VectorXd support_scores = model.apply(complement_block(block, message, first, seg_bits));
      scores.setZero();
      for (std::size_t c = 0; c < support.size(); ++c) scores[support[c]] = support_scores[static_cast<Eigen::Index>(c)];

      switch (scheme.kind) {
        case SchemeKind::kRedGreen:
          token = sample_token(red_green_transform(p, scores, scheme.delta), rng);
          break;
        case SchemeKind::kSoftPpl: {
          const SolverOptions opts{scheme.mc_samples, scheme.iterations,
                                   mix_seed(mix_seed(scheme.solver_seed, rng_seed), step)};
          const LambdaSolution sol = solve_lambda(p, model, scheme.epsilon, opts);
          if (trace) trace->solves.push_back(sol);
          token = soft_ppl_transform(p, scores, sol.lambda, rng);
          break;
        }
        case SchemeKind::kSoftPplUnconstrained:
          token = soft_ppl_transform(p, scores, scheme.lambda, rng);
          break;
        default:
          break;
      }
    }

    const auto realized = score_column(seed, token, m, 0);
    if (trace) trace->realized.col(static_cast<Eigen::Index>(step)) = realized;
    if (stateful) {
      Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1> comp(static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < m; ++i) {
        comp[static_cast<Eigen::Index>(i)] =
            static_cast<std::uint8_t>(complement_score(realized[static_cast<Eigen::Index>(i)], message[i]));
      }
      state = update_state(std::move(state), comp);
    }
    rec.tokens.push_back(token);
    seq.tokens.push_back(token);
    history.push_back(token);
  }
  return rec;
}

double log_perplexity(const ToyLM& lm, const TokenSequence& seq) {
  if (seq.empty()) throw Error(ErrorCode::kInvalidArgument, "perplexity of an empty sequence");
  std::vector<Token> history = seq.prefix;
  double nll = 0.0;
  for (Token t : seq.tokens) {
    const double pr = lm.prob(history, t);
    if (!(pr > 0.0)) throw Error(ErrorCode::kZeroProbabilityToken, "token " + std::to_string(t) + " has probability 0");
    nll -= std::log(pr);
    history.push_back(t);
  }
  return nll / static_cast<double>(seq.size());
}

double perplexity(const ToyLM& lm, const TokenSequence& seq) { return std::exp(log_perplexity(lm, seq)); }

}  // namespace binomark
