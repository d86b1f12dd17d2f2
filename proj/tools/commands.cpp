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

#include "commands.hpp"

#include "binomark/attacks.hpp"
#include "binomark/decoder.hpp"
#include "binomark/eval.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

namespace binomark::cli {
namespace {

constexpr const char* kCalibrationVersionLine = "# binomark-calibration v1";

// Per-record seed streams.
enum Stream : std::uint64_t { kMessageStream = 2, kGenerateStream = 3, kLengthStream = 4, kKeyStream = 5 };

std::uint64_t record_seed(std::uint64_t seed, std::size_t index, Stream stream) {
  return mix_seed(mix_seed(seed, index), stream);
}

template <typename F>
auto as_usage(F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError&) {
    throw;
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("cannot open config '" + path.string() + "'");
  try {
    return Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

bool looks_like_hex_key(const std::string& s) {
  return s.size() == 2 * WatermarkKey::kBytes &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isxdigit(c); });
}

// Output sink: a file when a path is given, the caller's stream otherwise.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::trunc);
      if (!*file_) throw Error(ErrorCode::kIo, "cannot open output '" + path + "'");
      stream_ = file_.get();
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

// Input lines from a file or the caller's stream.
std::vector<std::string> read_lines(const std::string& path, std::istream& in) {
  std::vector<std::string> lines;
  std::unique_ptr<std::ifstream> file;
  std::istream* src = &in;
  if (!path.empty() && path != "-") {
    file = std::make_unique<std::ifstream>(path);
    if (!*file) throw UsageError("cannot open input '" + path + "'");
    src = file.get();
  }
  for (std::string line; std::getline(*src, line);) lines.push_back(line);
  return lines;
}

// JSONL writer that emits the header line just before the first record.
class JsonlWriter {
 public:
  JsonlWriter(std::ostream& out, std::string content) : out_(out), content_(std::move(content)) {}
  void write(const Json& j) {
    if (!header_written_) {
      out_ << header_line(content_).dump() << '\n';
      header_written_ = true;
    }
    out_ << j.dump() << '\n';
  }

 private:
  std::ostream& out_;
  std::string content_;
  bool header_written_ = false;
};

std::size_t default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

struct CommonFlags {
  std::string config;
  std::string key;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = default_jobs();
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_key) {
  cmd->add_option("-c,--config", f.config, "JSON run configuration");
  if (with_key) cmd->add_option("-k,--key", f.key, "watermark key: 64 hex characters or a key file");
  cmd->add_option("-o,--output", f.output, "output file (default: stdout)");
  cmd->add_option("--seed", f.seed, "master seed; overrides the config");
  cmd->add_option("-j,--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

RunConfig load_run_config(const CommonFlags& f) {
  RunConfig cfg;
  if (!f.config.empty()) {
    const std::filesystem::path path(f.config);
    cfg = parse_run_config(load_json_file(path), path.parent_path());
  }
  if (f.seed) cfg.seed = *f.seed;
  if (!f.key.empty()) cfg.key = as_usage([&] { return resolve_key(f.key, cfg.context_window); });
  return cfg;
}

WatermarkKey require_key(const RunConfig& cfg) {
  if (!cfg.key) throw UsageError("missing field 'key' (set it in the config or pass --key)");
  return *cfg.key;
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
  CommonFlags common;
  std::size_t count = 1;
  std::optional<std::size_t> tokens;
  std::string message;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.common);
  if (f.tokens) cfg.tokens = *f.tokens;
  if (!f.message.empty()) cfg.message_hex = f.message;
  const WatermarkKey key = require_key(cfg);
  std::optional<Message> fixed;
  if (cfg.message_hex) fixed = as_usage([&] { return message_from_hex(*cfg.message_hex, cfg.m); });
  as_usage([&] {
    check_combination(cfg.scheme, cfg.encoder, cfg.m);
    return 0;
  });
  const ToyLM lm = as_usage([&] { return ToyLM::from_spec(cfg.lm); });

  std::vector<GenerationRecord> records(f.count);
  parallel_for(f.count, f.common.jobs, [&](std::size_t i) {
    Message message;
    if (fixed) {
      message = *fixed;
    } else {
      std::mt19937_64 rng(record_seed(cfg.seed, i, kMessageStream));
      message = Message::random(cfg.m, rng);
    }
    std::size_t n = cfg.tokens;
    if (n == 0) {
      n = cfg.sampler.min_tokens + record_seed(cfg.seed, i, kLengthStream) %
                                       (cfg.sampler.max_tokens - cfg.sampler.min_tokens + 1);
    }
    records[i] = generate(lm, key, message, cfg.scheme, cfg.encoder, cfg.sampler, n,
                          record_seed(cfg.seed, i, kGenerateStream));
  });
  Sink sink(f.common.output, out);
  JsonlWriter writer(*sink, "generation_records");
  for (const auto& r : records) writer.write(to_json(r));
  err << "generated " << records.size() << " record(s)\n";
  return kSuccess;
}

// ---------------------------------------------------------- decode / detect

struct DecodeFlags {
  CommonFlags common;
  std::string input = "-";
  std::string format = "auto";
  std::optional<std::size_t> bits;
  std::optional<std::size_t> vocab;
  std::size_t segments = 1;
  std::size_t synthid_layers = 0;
  std::optional<std::size_t> mc_samples;
  bool no_dedup = false;
};

struct ParsedInput {
  TokenSequence seq;
  DecodeOptions opts;
  std::size_t context_window = 3;
  std::optional<Message> embedded;
};

int cmd_decode(const DecodeFlags& f, bool zero_bit_only, std::istream& in, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_run_config(f.common);
  const WatermarkKey key = require_key(cfg);
  if (f.format != "auto" && f.format != "records" && f.format != "tokens") {
    throw UsageError("--format must be auto, records or tokens");
  }
  const std::size_t mc_samples = f.mc_samples.value_or(cfg.mc_samples);
  const std::size_t raw_m = f.bits.value_or(cfg.m);
  const std::size_t raw_vocab = f.vocab.value_or(cfg.lm.vocab_size);
  if (f.format == "tokens" || f.format == "auto") {
    as_usage([&] {
      Vocabulary v(raw_vocab);
      AllocationConfig{f.segments, f.segments > 1}.validate(raw_m);
      return v.size;
    });
  }

  const auto lines = read_lines(f.input, in);
  Sink sink(f.common.output, out);
  JsonlWriter writer(*sink, zero_bit_only ? "zero_bit_reports" : "detection_reports");
  std::size_t attempted = 0;
  std::size_t failed = 0;
  std::size_t index = 0;
  for (std::size_t line_no = 0; line_no < lines.size(); ++line_no) {
    const std::string line = trim(lines[line_no]);
    if (line.empty()) continue;
    const bool is_json = line.front() == '{';
    if (is_json) {
      try {
        if (is_header_line(Json::parse(line))) continue;
      } catch (const nlohmann::json::exception&) {
      }
    }
    ++attempted;
    const std::size_t record_index = index++;
    try {
      ParsedInput parsed;
      if (is_json && f.format != "tokens") {
        const GenerationRecord r = record_from_json(Json::parse(line));
        parsed.seq = r.sequence();
        parsed.opts = decode_options_for(r.scheme, r.encoder, r.message.size(), r.lm.vocab_size);
        parsed.opts.tie_seed = mix_seed(cfg.tie_seed, r.rng_seed);
        parsed.context_window = r.context_window;
        parsed.embedded = r.message;
      } else if (!is_json && f.format != "records") {
        std::istringstream ls(line);
        long long v = 0;
        while (ls >> v) {
          if (v < 0 || static_cast<unsigned long long>(v) >= raw_vocab) {
            throw Error(ErrorCode::kInvalidArgument, "token " + std::to_string(v) + " outside the vocabulary");
          }
          parsed.seq.tokens.push_back(static_cast<Token>(v));
        }
        if (!ls.eof()) throw Error(ErrorCode::kInvalidArgument, "non-numeric token");
        parsed.opts.m = raw_m;
        parsed.opts.vocab_size = raw_vocab;
        parsed.opts.allocation = {f.segments, f.segments > 1};
        parsed.opts.synthid_layers = f.synthid_layers;
        parsed.opts.tie_seed = mix_seed(cfg.tie_seed, record_index);
        parsed.context_window = cfg.context_window;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "line does not match --format " + f.format);
      }
      parsed.opts.dedup = !f.no_dedup;
      parsed.opts.mc_samples = mc_samples;
      parsed.opts.mc_seed = cfg.mc_seed;
      WatermarkKey k = key;
      k.context_window = parsed.context_window;
      const DetectionReport report = detect(parsed.seq, k, parsed.opts);
      Json j;
      if (zero_bit_only) {
        j = {{"schema_version", kSchemaVersion},
             {"type", "zero_bit_report"},
             {"statistic", report.zero_bit_statistic},
             {"pvalue", report.zero_bit_pvalue},
             {"effective_length", report.effective_length}};
      } else {
        j = to_json(report);
        if (parsed.embedded) {
          j["embedded"] = to_json(*parsed.embedded);
          j["bit_accuracy"] = bit_accuracy(*parsed.embedded, report.decoded);
        }
      }
      j["record_index"] = record_index;
      writer.write(j);
    } catch (const std::exception& e) {
      ++failed;
      writer.write({{"schema_version", kSchemaVersion},
                    {"type", "error"},
                    {"record_index", record_index},
                    {"line", line_no + 1},
                    {"error", e.what()}});
    }
  }
  err << "decoded " << attempted - failed << " of " << attempted << " input(s)\n";
  return attempted > 0 && failed == attempted ? kRuntimeFailure : kSuccess;
}

// ------------------------------------------------------------------ attack

struct AttackFlags {
  CommonFlags common;
  std::string input = "-";
  std::string kind;
  double fraction = 0.0;
};

int cmd_attack(const AttackFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  AttackConfig base = as_usage([&] {
    AttackConfig a;
    a.kind = attack_kind_from_string(f.kind);
    a.fraction = f.fraction;
    a.validate();
    return a;
  });
  const std::uint64_t seed = f.common.seed.value_or(0);
  const auto lines = read_lines(f.input, in);
  Sink sink(f.common.output, out);
  JsonlWriter writer(*sink, "generation_records");
  std::size_t index = 0;
  for (const auto& raw : lines) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kConfig, std::string("malformed input line: ") + e.what());
    }
    if (is_header_line(j)) continue;
    AttackConfig cfg = base;
    cfg.seed = mix_seed(seed, index++);
    writer.write(to_json(apply_attack(record_from_json(j), cfg)));
  }
  err << "attacked " << index << " record(s)\n";
  return kSuccess;
}

// -------------------------------------------------------------------- eval

struct EvalFlags {
  CommonFlags common;
  std::string input;
  std::optional<std::size_t> mc_samples;
};

void write_metric_header(std::ostream& os) { os << kMetricCsvVersionLine << '\n' << metric_csv_header() << '\n'; }

int cmd_eval(const EvalFlags& f, std::istream& in, std::ostream& out, std::ostream& err) {
  if (f.input.empty() == f.common.config.empty()) {
    throw UsageError("eval needs exactly one of --config (sweep) or --input (records)");
  }
  if (!f.input.empty()) {
    CommonFlags common = f.common;
    RunConfig cfg = load_run_config(common);
    const WatermarkKey key = require_key(cfg);
    std::vector<GenerationRecord> records;
    for (const auto& raw : read_lines(f.input, in)) {
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const Json j = Json::parse(line);
      if (is_header_line(j)) continue;
      records.push_back(record_from_json(j));
    }
    DecodeOptions base;
    base.mc_samples = f.mc_samples.value_or(cfg.mc_samples);
    base.mc_seed = cfg.mc_seed;
    base.tie_seed = cfg.tie_seed;
    Sink sink(f.common.output, out);
    write_metric_header(*sink);
    if (records.empty()) return kSuccess;
    *sink << to_csv(evaluate_records(records, key, base, f.common.jobs)) << '\n';
    err << "evaluated " << records.size() << " record(s)\n";
    return kSuccess;
  }
  const Json doc = load_json_file(f.common.config);
  std::vector<SweepCell> cells = as_usage([&] { return expand_sweep(doc); });
  if (f.mc_samples) {
    for (auto& c : cells) c.mc_samples = *f.mc_samples;
  }
  const std::uint64_t seed = f.common.seed.value_or(doc.value("seed", std::uint64_t{0}));
  Sink sink(f.common.output, out);
  write_metric_header(*sink);
  std::size_t failed = 0;
  run_sweep(cells, seed, f.common.jobs, [&](const MetricRow& row) {
    *sink << to_csv(row) << '\n' << std::flush;
    if (!row.error.empty()) ++failed;
    err << "cell '" << row.name << "' done" << (row.error.empty() ? "" : " (failed)") << '\n';
  });
  return failed == cells.size() ? kRuntimeFailure : kSuccess;
}

// --------------------------------------------------------------- calibrate

struct CalibrateFlags {
  CommonFlags common;
  std::size_t n = 1000;
  std::string source = "random";
  std::string detector = "per_bit";
  std::vector<double> alphas{0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::optional<std::size_t> bits;
  std::optional<std::size_t> tokens;
  std::optional<std::size_t> mc_samples;
};

int cmd_calibrate(const CalibrateFlags& f, std::ostream& out, std::ostream& err) {
  if (f.n < 100) throw UsageError("calibrate needs -n >= 100");
  if (f.source != "random" && f.source != "lm") throw UsageError("--source must be random or lm");
  if (f.detector != "per_bit" && f.detector != "zero_bit") throw UsageError("--detector must be per_bit or zero_bit");
  for (std::size_t i = 0; i < f.alphas.size(); ++i) {
    if (!(f.alphas[i] > 0.0 && f.alphas[i] <= 1.0)) throw UsageError("alphas must be in (0, 1]");
    if (i > 0 && f.alphas[i] < f.alphas[i - 1]) throw UsageError("alphas must be sorted");
  }
  RunConfig cfg = load_run_config(f.common);
  if (f.bits) cfg.m = *f.bits;
  const std::size_t n_tokens = f.tokens.value_or(cfg.tokens == 0 ? 200 : cfg.tokens);
  const std::size_t mc = f.mc_samples.value_or(cfg.mc_samples);
  if (cfg.m < 1) throw UsageError("message bits must be >= 1");
  if (f.detector == "zero_bit" && mc == 0) throw UsageError("zero_bit calibration needs Monte-Carlo samples");
  const Vocabulary vocab = as_usage([&] { return Vocabulary(cfg.lm.vocab_size); });
  std::optional<ToyLM> lm;
  if (f.source == "lm") lm = as_usage([&] { return ToyLM::from_spec(cfg.lm); });
  SchemeConfig none;
  none.kind = SchemeKind::kNone;

  std::vector<DetectionReport> reports(f.n);
  parallel_for(f.n, f.common.jobs, [&](std::size_t i) {
    WatermarkKey key;
    if (cfg.key) {
      key = *cfg.key;
    } else {
      std::mt19937_64 key_rng(record_seed(cfg.seed, i, kKeyStream));
      key = WatermarkKey::random(key_rng);
    }
    key.context_window = cfg.context_window;
    TokenSequence seq;
    if (lm) {
      const Message dummy(std::vector<std::uint8_t>(cfg.m, 0));
      seq = generate(*lm, key, dummy, none, EncoderConfig{}, cfg.sampler, n_tokens,
                     record_seed(cfg.seed, i, kGenerateStream))
                .sequence();
    } else {
      std::mt19937_64 rng(record_seed(cfg.seed, i, kGenerateStream));
      std::uniform_int_distribution<Token> pick(0, static_cast<Token>(vocab.size - 1));
      for (std::size_t t = 0; t < n_tokens; ++t) seq.tokens.push_back(pick(rng));
    }
    DecodeOptions opts;
    opts.m = cfg.m;
    opts.vocab_size = vocab.size;
    opts.tie_seed = record_seed(cfg.seed, i, kMessageStream);
    opts.mc_samples = f.detector == "zero_bit" ? mc : 0;
    opts.mc_seed = cfg.mc_seed;
    reports[i] = detect(seq, key, opts);
  });

  std::vector<double> pvalues;
  for (const auto& r : reports) {
    if (f.detector == "zero_bit") {
      pvalues.push_back(r.zero_bit_pvalue);
    } else {
      pvalues.insert(pvalues.end(), r.per_bit_pvalues.begin(), r.per_bit_pvalues.end());
    }
  }
  const auto curve = calibration_curve(pvalues, f.alphas);
  Sink sink(f.common.output, out);
  *sink << kCalibrationVersionLine << '\n' << "alpha,empirical_fpr,ci_low,ci_high\n";
  for (const auto& pt : curve) {
    *sink << pt.alpha << ',' << pt.empirical_fpr << ',' << pt.ci.low << ',' << pt.ci.high << '\n';
  }
  err << "calibrated " << f.detector << " detector on " << f.n << " null sequence(s)\n";
  return kSuccess;
}

}  // namespace

WatermarkKey resolve_key(const std::string& value, std::size_t context_window, const std::filesystem::path& base_dir) {
  std::string hex = trim(value);
  if (!looks_like_hex_key(hex)) {
    std::filesystem::path path(hex);
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    std::ifstream f(path);
    if (!f) throw UsageError("key is neither 64 hex characters nor a readable file");
    std::stringstream ss;
    ss << f.rdbuf();
    hex = trim(ss.str());
  }
  try {
    return WatermarkKey::from_hex(hex, context_window);
  } catch (const Error&) {
    throw UsageError("key must be exactly 64 hex characters");
  }
}

RunConfig parse_run_config(const Json& j, const std::filesystem::path& base_dir) {
  return as_usage([&] {
    require_known_fields(j,
                         {"key", "message_bits", "message", "context_window", "scheme", "encoder", "sampler", "lm",
                          "seed", "tokens", "decode"},
                         "config");
    RunConfig cfg;
    try {
      cfg.m = j.value("message_bits", cfg.m);
      cfg.context_window = j.value("context_window", cfg.context_window);
      cfg.seed = j.value("seed", cfg.seed);
      cfg.tokens = j.value("tokens", cfg.tokens);
      if (j.contains("message")) cfg.message_hex = j["message"].get<std::string>();
      if (j.contains("key")) cfg.key = resolve_key(j["key"].get<std::string>(), cfg.context_window, base_dir);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError(std::string("config: ") + e.what());
    }
    if (cfg.m < 1) throw UsageError("config: message_bits must be >= 1");
    if (cfg.context_window < 1) throw UsageError("config: context_window must be >= 1");
    if (j.contains("scheme")) cfg.scheme = scheme_from_json(j["scheme"]);
    if (j.contains("encoder")) cfg.encoder = encoder_from_json(j["encoder"]);
    if (j.contains("sampler")) cfg.sampler = sampler_from_json(j["sampler"]);
    if (j.contains("lm")) cfg.lm = lm_from_json(j["lm"]);
    if (j.contains("decode")) {
      const Json& d = j["decode"];
      require_known_fields(d, {"mc_samples", "mc_seed", "tie_seed"}, "config.decode");
      cfg.mc_samples = d.value("mc_samples", cfg.mc_samples);
      cfg.mc_seed = d.value("mc_seed", cfg.mc_seed);
      cfg.tie_seed = d.value("tie_seed", cfg.tie_seed);
    }
    if (cfg.message_hex) message_from_hex(*cfg.message_hex, cfg.m);
    check_combination(cfg.scheme, cfg.encoder, cfg.m);
    return cfg;
  });
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"binomark: multibit watermarking over token sequences"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "binomark 1.0.0");

  GenerateFlags gen;
  auto* generate_cmd = app.add_subcommand("generate", "generate watermarked records as JSONL");
  add_common(generate_cmd, gen.common, true);
  generate_cmd->add_option("-n,--count", gen.count, "number of records");
  generate_cmd->add_option("-t,--tokens", gen.tokens, "tokens per record; overrides the config");
  generate_cmd->add_option("--message", gen.message, "payload as hex; random per record when absent");

  DecodeFlags dec;
  DecodeFlags det;
  auto setup_decode = [&](CLI::App* cmd, DecodeFlags& f) {
    add_common(cmd, f.common, true);
    cmd->add_option("-i,--input", f.input, "JSONL records or raw token lines ('-' for stdin)");
    cmd->add_option("--format", f.format, "auto, records or tokens");
    cmd->add_option("-m,--bits", f.bits, "message bits for raw token input");
    cmd->add_option("--vocab", f.vocab, "vocabulary size for raw token input");
    cmd->add_option("--segments", f.segments, "position-allocation segments for raw token input");
    cmd->add_option("--synthid-layers", f.synthid_layers, "tournament layers for raw token input");
    cmd->add_option("--mc-samples", f.mc_samples, "Monte-Carlo draws for the zero-bit p-value");
    cmd->add_flag("--no-dedup", f.no_dedup, "keep repeated (context, token) pairs");
  };
  auto* decode_cmd = app.add_subcommand("decode", "decode payloads with per-bit p-values");
  setup_decode(decode_cmd, dec);
  auto* detect_cmd = app.add_subcommand("detect", "zero-bit detection only");
  setup_decode(detect_cmd, det);

  AttackFlags att;
  auto* attack_cmd = app.add_subcommand("attack", "edit records with token deletion or substitution");
  attack_cmd->add_option("-i,--input", att.input, "JSONL records ('-' for stdin)");
  attack_cmd->add_option("-o,--output", att.common.output, "output file (default: stdout)");
  attack_cmd->add_option("--seed", att.common.seed, "attack seed");
  attack_cmd->add_option("--kind", att.kind, "delete or substitute")->required();
  attack_cmd->add_option("-f,--fraction", att.fraction, "fraction of tokens to edit")->required();

  EvalFlags ev;
  auto* eval_cmd = app.add_subcommand("eval", "metrics of a sweep config or of existing records");
  add_common(eval_cmd, ev.common, true);
  eval_cmd->add_option("-i,--input", ev.input, "JSONL records to evaluate");
  eval_cmd->add_option("--mc-samples", ev.mc_samples, "Monte-Carlo draws for the zero-bit p-value");

  CalibrateFlags cal;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "empirical false-positive rate on null text");
  add_common(calibrate_cmd, cal.common, true);
  calibrate_cmd->add_option("-n,--samples", cal.n, "null sequences (>= 100)");
  calibrate_cmd->add_option("--source", cal.source, "random or lm");
  calibrate_cmd->add_option("--detector", cal.detector, "per_bit or zero_bit");
  calibrate_cmd->add_option("--alphas", cal.alphas, "sorted alpha grid")->delimiter(',');
  calibrate_cmd->add_option("-m,--bits", cal.bits, "message bits");
  calibrate_cmd->add_option("-t,--tokens", cal.tokens, "tokens per null sequence (default 200)");
  calibrate_cmd->add_option("--mc-samples", cal.mc_samples, "Monte-Carlo draws for the zero-bit p-value");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (*generate_cmd) return cmd_generate(gen, out, err);
    if (*decode_cmd) return cmd_decode(dec, false, in, out, err);
    if (*detect_cmd) return cmd_decode(det, true, in, out, err);
    if (*attack_cmd) return cmd_attack(att, in, out, err);
    if (*eval_cmd) return cmd_eval(ev, in, out, err);
    if (*calibrate_cmd) return cmd_calibrate(cal, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace binomark::cli
