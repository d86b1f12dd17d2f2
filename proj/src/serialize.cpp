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

#include "binomark/serialize.hpp"

#include <algorithm>

namespace binomark {
namespace {

template <typename T>
T get_or(const Json& j, const char* name, T fallback) {
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("field '") + name + "': " + e.what());
  }
}

template <typename T>
T get_required(const Json& j, const char* name, std::string_view where) {
  if (!j.contains(name)) {
    throw Error(ErrorCode::kConfig, std::string(where) + ": missing field '" + name + "'");
  }
  return get_or<T>(j, name, T{});
}

void require_object(const Json& j, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, std::string(where) + " must be a JSON object");
}

}  // namespace

void require_known_fields(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  require_object(j, where);
  for (const auto& [name, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      throw Error(ErrorCode::kConfig, std::string(where) + ": unknown field '" + name + "'");
    }
  }
}

Json to_json(const Message& message) {
  return {{"hex", message_to_hex(message)}, {"bits", message.size()}};
}

Message message_from_json(const Json& j) {
  require_known_fields(j, {"hex", "bits"}, "message");
  return message_from_hex(get_required<std::string>(j, "hex", "message"),
                          get_required<std::size_t>(j, "bits", "message"));
}

Json to_json(const Distribution& p) {
  return Json(std::vector<double>(p.probs().data(), p.probs().data() + p.size()));
}

Distribution distribution_from_json(const Json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kConfig, "distribution must be a JSON array");
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("distribution: ") + e.what());
  }
  return validate_distribution(v);
}

Json to_json(const SchemeConfig& cfg) {
  Json j{{"kind", to_string(cfg.kind)}};
  switch (cfg.kind) {
    case SchemeKind::kRedGreen: j["delta"] = cfg.delta; break;
    case SchemeKind::kSoftPpl:
      j["epsilon"] = cfg.epsilon;
      j["mc_samples"] = cfg.mc_samples;
      j["iterations"] = cfg.iterations;
      j["solver_seed"] = cfg.solver_seed;
      break;
    case SchemeKind::kSoftPplUnconstrained: j["lambda"] = cfg.lambda; break;
    case SchemeKind::kSynthId:
      j["layers"] = cfg.layers;
      j["allow_stateful"] = cfg.allow_stateful;
      break;
    case SchemeKind::kNone: break;
  }
  return j;
}

SchemeConfig scheme_from_json(const Json& j) {
  require_known_fields(
      j, {"kind", "delta", "epsilon", "lambda", "layers", "mc_samples", "iterations", "solver_seed", "allow_stateful"},
      "scheme");
  SchemeConfig cfg;
  cfg.kind = scheme_kind_from_string(get_required<std::string>(j, "kind", "scheme"));
  cfg.delta = get_or(j, "delta", cfg.delta);
  cfg.epsilon = get_or(j, "epsilon", cfg.epsilon);
  cfg.lambda = get_or(j, "lambda", cfg.lambda);
  cfg.layers = get_or(j, "layers", cfg.layers);
  cfg.mc_samples = get_or(j, "mc_samples", cfg.mc_samples);
  cfg.iterations = get_or(j, "iterations", cfg.iterations);
  cfg.solver_seed = get_or(j, "solver_seed", cfg.solver_seed);
  cfg.allow_stateful = get_or(j, "allow_stateful", cfg.allow_stateful);
  cfg.validate();
  return cfg;
}

Json to_json(const EncoderConfig& cfg) {
  Json j{{"mode", to_string(cfg.mode)}};
  if (cfg.mode == EncoderMode::kAllocation) j["segments"] = cfg.segments;
  if (cfg.mode == EncoderMode::kStateful) j["horizons"] = cfg.horizons;
  return j;
}

EncoderConfig encoder_from_json(const Json& j) {
  require_known_fields(j, {"mode", "segments", "horizons"}, "encoder");
  EncoderConfig cfg;
  cfg.mode = encoder_mode_from_string(get_or<std::string>(j, "mode", "stateless"));
  cfg.segments = get_or(j, "segments", cfg.segments);
  cfg.horizons = get_or(j, "horizons", cfg.horizons);
  if (cfg.horizons.empty()) throw Error(ErrorCode::kConfig, "encoder: horizons must not be empty");
  for (double h : cfg.horizons) {
    if (!(h > 0)) throw Error(ErrorCode::kConfig, "encoder: horizons must be positive");
  }
  if (cfg.segments < 1) throw Error(ErrorCode::kConfig, "encoder: segments must be >= 1");
  return cfg;
}

Json to_json(const SamplerConfig& cfg) {
  return {{"temperature", cfg.temperature},
          {"top_k", cfg.top_k},
          {"min_tokens", cfg.min_tokens},
          {"max_tokens", cfg.max_tokens}};
}

SamplerConfig sampler_from_json(const Json& j) {
  require_known_fields(j, {"temperature", "top_k", "min_tokens", "max_tokens"}, "sampler");
  SamplerConfig cfg;
  cfg.temperature = get_or(j, "temperature", cfg.temperature);
  cfg.top_k = get_or(j, "top_k", cfg.top_k);
  cfg.min_tokens = get_or(j, "min_tokens", cfg.min_tokens);
  cfg.max_tokens = get_or(j, "max_tokens", cfg.max_tokens);
  cfg.validate();
  return cfg;
}

Json to_json(const LmSpec& spec) {
  Json j{{"kind", to_string(spec.kind)}, {"vocab_size", spec.vocab_size}};
  if (spec.kind == LmKind::kMarkov1) {
    j["alpha"] = spec.alpha;
    j["seed"] = spec.seed;
  }
  return j;
}

LmSpec lm_from_json(const Json& j) {
  require_known_fields(j, {"kind", "vocab_size", "alpha", "seed"}, "lm");
  LmSpec spec;
  spec.kind = lm_kind_from_string(get_or<std::string>(j, "kind", "markov1"));
  spec.vocab_size = get_or(j, "vocab_size", spec.vocab_size);
  spec.alpha = get_or(j, "alpha", spec.alpha);
  spec.seed = get_or(j, "seed", spec.seed);
  if (spec.vocab_size < 2) throw Error(ErrorCode::kConfig, "lm: vocab_size must be >= 2");
  if (!(spec.alpha > 0)) throw Error(ErrorCode::kConfig, "lm: alpha must be > 0");
  return spec;
}

Json to_json(const AttackConfig& cfg) {
  return {{"kind", to_string(cfg.kind)}, {"fraction", cfg.fraction}, {"seed", cfg.seed}};
}

AttackConfig attack_from_json(const Json& j) {
  require_known_fields(j, {"kind", "fraction", "seed"}, "attack");
  AttackConfig cfg;
  cfg.kind = attack_kind_from_string(get_required<std::string>(j, "kind", "attack"));
  cfg.fraction = get_or(j, "fraction", cfg.fraction);
  cfg.seed = get_or(j, "seed", cfg.seed);
  cfg.validate();
  return cfg;
}

Json to_json(const GenerationRecord& record) {
  Json attacks = Json::array();
  for (const auto& a : record.attacks) attacks.push_back({{"kind", a.kind}, {"fraction", a.fraction}, {"seed", a.seed}});
  return {{"schema_version", kSchemaVersion},
          {"type", "generation_record"},
          {"prompt", record.prompt},
          {"tokens", record.tokens},
          {"message", to_json(record.message)},
          {"scheme", to_json(record.scheme)},
          {"encoder", to_json(record.encoder)},
          {"lm", to_json(record.lm)},
          {"sampler", to_json(record.sampler)},
          {"context_window", record.context_window},
          {"rng_seed", record.rng_seed},
          {"watermarked", record.watermarked()},
          {"attacks", attacks}};
}

GenerationRecord record_from_json(const Json& j) {
  require_known_fields(j,
                       {"schema_version", "type", "prompt", "tokens", "message", "scheme", "encoder", "lm", "sampler",
                        "context_window", "rng_seed", "watermarked", "attacks"},
                       "record");
  if (get_required<int>(j, "schema_version", "record") != kSchemaVersion) {
    throw Error(ErrorCode::kConfig, "record: unsupported schema_version");
  }
  GenerationRecord r;
  r.prompt = get_or(j, "prompt", std::vector<Token>{});
  r.tokens = get_required<std::vector<Token>>(j, "tokens", "record");
  r.message = message_from_json(j.at("message"));
  r.scheme = scheme_from_json(get_required<Json>(j, "scheme", "record"));
  r.encoder = encoder_from_json(get_or(j, "encoder", Json::object()));
  r.lm = lm_from_json(get_required<Json>(j, "lm", "record"));
  r.sampler = sampler_from_json(get_or(j, "sampler", Json::object()));
  r.context_window = get_or(j, "context_window", r.context_window);
  r.rng_seed = get_or(j, "rng_seed", r.rng_seed);
  for (const auto& a : get_or(j, "attacks", Json::array())) {
    require_known_fields(a, {"kind", "fraction", "seed"}, "record.attacks");
    r.attacks.push_back({get_required<std::string>(a, "kind", "record.attacks"), get_or(a, "fraction", 0.0),
                         get_or<std::uint64_t>(a, "seed", 0)});
  }
  const Vocabulary vocab(r.lm.vocab_size);
  for (Token t : r.prompt) {
    if (!vocab.contains(t)) throw Error(ErrorCode::kConfig, "record: prompt token outside the vocabulary");
  }
  for (Token t : r.tokens) {
    if (!vocab.contains(t)) throw Error(ErrorCode::kConfig, "record: token outside the vocabulary");
  }
  if (r.context_window < 1) throw Error(ErrorCode::kConfig, "record: context_window must be >= 1");
  return r;
}

Json to_json(const DetectionReport& report) {
  return {{"schema_version", kSchemaVersion},
          {"type", "detection_report"},
          {"decoded", to_json(report.decoded)},
          {"per_bit_pvalues", report.per_bit_pvalues},
          {"per_bit_counts", report.per_bit_counts},
          {"per_bit_trials", report.per_bit_trials},
          {"effective_length", report.effective_length},
          {"zero_bit_statistic", report.zero_bit_statistic},
          {"zero_bit_pvalue", report.zero_bit_pvalue}};
}

DetectionReport report_from_json(const Json& j) {
  require_known_fields(j,
                       {"schema_version", "type", "decoded", "per_bit_pvalues", "per_bit_counts", "per_bit_trials",
                        "effective_length", "zero_bit_statistic", "zero_bit_pvalue", "record_index", "embedded",
                        "bit_accuracy"},
                       "report");
  DetectionReport r;
  r.decoded = message_from_json(j.at("decoded"));
  r.per_bit_pvalues = get_required<std::vector<double>>(j, "per_bit_pvalues", "report");
  r.per_bit_counts = get_or(j, "per_bit_counts", std::vector<long>{});
  r.per_bit_trials = get_or(j, "per_bit_trials", std::vector<long>{});
  r.effective_length = get_or(j, "effective_length", 0L);
  r.zero_bit_statistic = get_or(j, "zero_bit_statistic", 0.0);
  r.zero_bit_pvalue = get_or(j, "zero_bit_pvalue", 1.0);
  return r;
}

Json header_line(std::string_view content) {
  return {{"schema_version", kSchemaVersion}, {"type", "header"}, {"content", content}, {"generator", "binomark"}};
}

bool is_header_line(const Json& j) {
  return j.is_object() && j.contains("type") && j["type"] == "header";
}

}  // namespace binomark
