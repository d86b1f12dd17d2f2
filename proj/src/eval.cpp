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

#include "binomark/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace binomark {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Stream labels for per-sample seeds.
enum Stream : std::uint64_t { kKeyStream = 1, kMessageStream, kGenerateStream, kLengthStream, kTieStream, kAttackStream };
constexpr std::uint64_t kNullSalt = 0x6e756c6c5f746578ULL;

std::uint64_t sample_seed(std::uint64_t master, std::size_t index, Stream stream) {
  return mix_seed(mix_seed(master, index), stream);
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1)");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Sorted summation keeps means independent of record order.
double sorted_sum(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double mean_finite(const std::vector<double>& v) {
  std::vector<double> kept;
  for (double x : v) {
    if (std::isfinite(x)) kept.push_back(x);
  }
  const auto n = static_cast<double>(kept.size());
  return kept.empty() ? kNaN : sorted_sum(std::move(kept)) / n;
}

double safe_log_perplexity(const ToyLM& lm, const TokenSequence& seq) {
  try {
    return log_perplexity(lm, seq);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kZeroProbabilityToken || e.code() == ErrorCode::kInvalidArgument) return kNaN;
    throw;
  }
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct Rates {
  double bit_accuracy = kNaN;
  double message_accuracy = kNaN;
  std::array<double, kReportAlphas.size()> ba{};
  std::array<double, kReportAlphas.size()> tpr{};
};

Rates watermarked_rates(const std::vector<DecodedSample>& samples) {
  Rates r;
  r.ba.fill(kNaN);
  r.tpr.fill(kNaN);
  if (samples.empty()) return r;
  std::vector<double> bits;
  std::vector<double> zero_bit;
  for (const auto& s : samples) {
    bits.push_back(bit_accuracy(s.truth, s.report.decoded));
    zero_bit.push_back(s.report.zero_bit_pvalue);
  }
  r.bit_accuracy = sorted_sum(std::move(bits)) / static_cast<double>(samples.size());
  r.message_accuracy = message_accuracy(samples);
  for (std::size_t a = 0; a < kReportAlphas.size(); ++a) {
    r.ba[a] = ba_at_fpr(samples, kReportAlphas[a]);
    r.tpr[a] = tpr_at_fpr(zero_bit, kReportAlphas[a]);
  }
  return r;
}

void fill_null_rates(MetricRow& row, const std::vector<DetectionReport>& null_reports) {
  row.fpr_at.fill(kNaN);
  row.bit_fpr_at.fill(kNaN);
  if (null_reports.empty()) return;
  std::vector<double> zero_bit;
  std::vector<double> per_bit;
  for (const auto& r : null_reports) {
    zero_bit.push_back(r.zero_bit_pvalue);
    per_bit.insert(per_bit.end(), r.per_bit_pvalues.begin(), r.per_bit_pvalues.end());
  }
  for (std::size_t a = 0; a < kReportAlphas.size(); ++a) {
    row.fpr_at[a] = tpr_at_fpr(zero_bit, kReportAlphas[a]);
    row.bit_fpr_at[a] = tpr_at_fpr(per_bit, kReportAlphas[a]);
  }
}

}  // namespace

double bit_accuracy(const Message& truth, const Message& decoded) {
  if (truth.size() != decoded.size()) throw Error(ErrorCode::kLengthMismatch, "messages differ in length");
  if (truth.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty message");
  std::size_t same = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) same += truth[i] == decoded[i];
  return static_cast<double>(same) / static_cast<double>(truth.size());
}

double message_accuracy(std::span<const DecodedSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::kInvalidArgument, "message accuracy needs at least one sample");
  std::size_t exact = 0;
  for (const auto& s : samples) {
    if (s.truth.size() != s.report.decoded.size()) {
      throw Error(ErrorCode::kLengthMismatch, "messages differ in length");
    }
    exact += s.truth == s.report.decoded;
  }
  return static_cast<double>(exact) / static_cast<double>(samples.size());
}

double ba_at_fpr(std::span<const DecodedSample> samples, double alpha) {
  check_alpha(alpha);
  std::size_t credited = 0;
  std::size_t total = 0;
  for (const auto& s : samples) {
    const auto& decoded = s.report.decoded;
    if (s.truth.size() != decoded.size() || s.report.per_bit_pvalues.size() != decoded.size()) {
      throw Error(ErrorCode::kLengthMismatch, "decode and p-values differ in length");
    }
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      credited += s.truth[i] == decoded[i] && s.report.per_bit_pvalues[i] < alpha;
    }
    total += decoded.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(credited) / static_cast<double>(total);
}

double tpr_at_fpr(std::span<const double> pvalues, double alpha) {
  check_alpha(alpha);
  if (pvalues.empty()) throw Error(ErrorCode::kInvalidArgument, "no p-values");
  const auto hits = std::count_if(pvalues.begin(), pvalues.end(), [&](double p) { return p < alpha; });
  return static_cast<double>(hits) / static_cast<double>(pvalues.size());
}

std::vector<CalibrationPoint> calibration_curve(std::span<const double> null_pvalues, std::span<const double> alphas,
                                                std::size_t min_samples) {
  if (null_pvalues.size() < min_samples) {
    throw Error(ErrorCode::kInvalidArgument, "calibration needs at least " + std::to_string(min_samples) + " samples");
  }
  if (alphas.empty()) throw Error(ErrorCode::kInvalidArgument, "empty alpha grid");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0 && alphas[i] <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1]");
    if (i > 0 && alphas[i] < alphas[i - 1]) throw Error(ErrorCode::kInvalidArgument, "alpha grid must be sorted");
  }
  std::vector<double> sorted(null_pvalues.begin(), null_pvalues.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CalibrationPoint> curve;
  const long n = static_cast<long>(sorted.size());
  for (double alpha : alphas) {
    const long flagged = std::upper_bound(sorted.begin(), sorted.end(), alpha) - sorted.begin();
    curve.push_back({alpha, static_cast<double>(flagged) / static_cast<double>(n), flagged, n,
                     wilson_interval(flagged, n)});
  }
  return curve;
}

std::string metric_csv_header() {
  std::ostringstream os;
  os << "name,fingerprint,n_samples,n_null,bit_accuracy,message_accuracy";
  for (const char* col : {"ba_at_fpr", "tpr_at_fpr", "fpr_at", "bit_fpr_at"}) {
    for (double a : kReportAlphas) os << ',' << col << '_' << format_double(a);
  }
  os << ",mean_log_perplexity,mean_effective_length,error";
  return os.str();
}

std::string to_csv(const MetricRow& row) {
  auto quoted = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
      if (c == '"') out += '"';
      out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
  };
  std::ostringstream os;
  os << quoted(row.name) << ',' << row.fingerprint << ',' << row.n_samples << ',' << row.n_null << ','
     << format_double(row.bit_accuracy) << ',' << format_double(row.message_accuracy);
  for (const auto* arr : {&row.ba_at_fpr, &row.tpr_at_fpr, &row.fpr_at, &row.bit_fpr_at}) {
    for (double v : *arr) os << ',' << format_double(v);
  }
  os << ',' << format_double(row.mean_log_perplexity) << ',' << format_double(row.mean_effective_length) << ','
     << quoted(row.error);
  return os.str();
}

Json to_json(const SweepCell& cell) {
  Json j{{"name", cell.name},
         {"lm", to_json(cell.lm)},
         {"sampler", to_json(cell.sampler)},
         {"scheme", to_json(cell.scheme)},
         {"encoder", to_json(cell.encoder)},
         {"message_bits", cell.m},
         {"tokens", cell.tokens},
         {"samples", cell.samples},
         {"null_samples", cell.null_samples},
         {"context_window", cell.context_window},
         {"decode", {{"mc_samples", cell.mc_samples}, {"mc_seed", cell.mc_seed}}}};
  if (cell.attack) j["attack"] = to_json(*cell.attack);
  return j;
}

SweepCell cell_from_json(const Json& j) {
  require_known_fields(j,
                       {"name", "lm", "sampler", "scheme", "encoder", "message_bits", "tokens", "attack", "samples",
                        "null_samples", "context_window", "key", "decode"},
                       "cell");
  SweepCell cell;
  try {
    cell.name = j.value("name", cell.name);
    if (j.contains("lm")) cell.lm = lm_from_json(j["lm"]);
    if (j.contains("sampler")) cell.sampler = sampler_from_json(j["sampler"]);
    if (j.contains("scheme")) cell.scheme = scheme_from_json(j["scheme"]);
    if (j.contains("encoder")) cell.encoder = encoder_from_json(j["encoder"]);
    cell.m = j.value("message_bits", cell.m);
    cell.tokens = j.value("tokens", cell.tokens);
    if (j.contains("attack") && !j["attack"].is_null()) cell.attack = attack_from_json(j["attack"]);
    cell.samples = j.value("samples", cell.samples);
    cell.null_samples = j.value("null_samples", cell.null_samples);
    cell.context_window = j.value("context_window", cell.context_window);
    if (j.contains("key")) {
      cell.key = WatermarkKey::from_hex(j["key"].get<std::string>(), cell.context_window);
    }
    if (j.contains("decode")) {
      const Json& d = j["decode"];
      require_known_fields(d, {"mc_samples", "mc_seed"}, "cell.decode");
      cell.mc_samples = d.value("mc_samples", cell.mc_samples);
      cell.mc_seed = d.value("mc_seed", cell.mc_seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("cell: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kBadHex || e.code() == ErrorCode::kTooShort) {
      throw Error(ErrorCode::kConfig, std::string("cell.key: ") + e.what());
    }
    throw;
  }
  if (cell.m < 1) throw Error(ErrorCode::kConfig, "cell: message_bits must be >= 1");
  if (cell.samples < 1) throw Error(ErrorCode::kConfig, "cell: samples must be >= 1");
  if (cell.context_window < 1) throw Error(ErrorCode::kConfig, "cell: context_window must be >= 1");
  check_combination(cell.scheme, cell.encoder, cell.m);
  return cell;
}

std::string fingerprint(const SweepCell& cell) {
  Json j = to_json(cell);
  j.erase("name");
  std::uint64_t h = fnv1a(j.dump());
  if (cell.key) {
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(cell.key->bytes.data()), cell.key->bytes.size()), h);
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

DecodeOptions decode_options_for(const SchemeConfig& scheme, const EncoderConfig& encoder, std::size_t m,
                                 std::size_t vocab_size) {
  DecodeOptions opts;
  opts.m = m;
  opts.vocab_size = vocab_size;
  opts.allocation = encoder.allocation();
  opts.synthid_layers = scheme.kind == SchemeKind::kSynthId ? scheme.layers : 0;
  return opts;
}

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

CellOutcome run_cell(const SweepCell& cell, std::uint64_t master_seed, std::size_t jobs, const ToyLM* lm) {
  check_combination(cell.scheme, cell.encoder, cell.m);
  std::optional<ToyLM> owned;
  if (lm == nullptr) {
    owned = ToyLM::from_spec(cell.lm);
    lm = &*owned;
  }
  const Vocabulary vocab = lm->vocab();
  DecodeOptions base = decode_options_for(cell.scheme, cell.encoder, cell.m, vocab.size);
  base.mc_samples = cell.mc_samples;
  base.mc_seed = cell.mc_seed;
  SchemeConfig null_scheme;
  null_scheme.kind = SchemeKind::kNone;
  const EncoderConfig plain_encoder;

  auto run_one = [&](std::size_t index, bool null) {
    const std::uint64_t master = null ? master_seed ^ kNullSalt : master_seed;
    SampleOutcome out;
    if (cell.key) {
      out.key = *cell.key;
    } else {
      std::mt19937_64 key_rng(sample_seed(master, index, kKeyStream));
      out.key = WatermarkKey::random(key_rng);
    }
    out.key.context_window = cell.context_window;
    std::mt19937_64 msg_rng(sample_seed(master, index, kMessageStream));
    const Message message = Message::random(cell.m, msg_rng);
    std::size_t n_tokens = cell.tokens;
    if (n_tokens == 0) {
      const std::size_t span = cell.sampler.max_tokens - cell.sampler.min_tokens + 1;
      n_tokens = cell.sampler.min_tokens + sample_seed(master, index, kLengthStream) % span;
    }
    out.record = generate(*lm, out.key, message, null ? null_scheme : cell.scheme, null ? plain_encoder : cell.encoder,
                          cell.sampler, n_tokens, sample_seed(master, index, kGenerateStream));
    out.record.lm = cell.lm;
    out.log_perplexity = safe_log_perplexity(*lm, out.record.sequence());
    out.attacked = out.record.sequence();
    if (cell.attack) {
      AttackConfig attack = *cell.attack;
      attack.seed = mix_seed(sample_seed(master, index, kAttackStream), cell.attack->seed);
      out.attacked = apply_attack(out.attacked, attack, vocab);
    }
    DecodeOptions opts = base;
    opts.tie_seed = sample_seed(master, index, kTieStream);
    out.report = detect(out.attacked, out.key, opts);
    return out;
  };

  CellOutcome result;
  result.watermarked.resize(cell.samples);
  result.null.resize(cell.null_samples);
  const std::size_t total = cell.samples + cell.null_samples;
  parallel_for(total, jobs, [&](std::size_t i) {
    if (i < cell.samples) {
      result.watermarked[i] = run_one(i, false);
    } else {
      result.null[i - cell.samples] = run_one(i - cell.samples, true);
    }
  });
  return result;
}

MetricRow summarize(const SweepCell& cell, const CellOutcome& outcome) {
  MetricRow row;
  row.name = cell.name;
  row.fingerprint = fingerprint(cell);
  row.n_samples = static_cast<long>(outcome.watermarked.size());
  row.n_null = static_cast<long>(outcome.null.size());
  std::vector<DecodedSample> samples;
  std::vector<double> ppl;
  double eff = 0.0;
  for (const auto& s : outcome.watermarked) {
    samples.push_back({s.record.message, s.report});
    ppl.push_back(s.log_perplexity);
    eff += static_cast<double>(s.report.effective_length);
  }
  const Rates r = watermarked_rates(samples);
  row.bit_accuracy = r.bit_accuracy;
  row.message_accuracy = r.message_accuracy;
  row.ba_at_fpr = r.ba;
  row.tpr_at_fpr = r.tpr;
  std::vector<DetectionReport> null_reports;
  for (const auto& s : outcome.null) null_reports.push_back(s.report);
  fill_null_rates(row, null_reports);
  row.mean_log_perplexity = mean_finite(ppl);
  row.mean_effective_length = samples.empty() ? kNaN : eff / static_cast<double>(samples.size());
  return row;
}

MetricRow evaluate_records(std::span<const GenerationRecord> records, const WatermarkKey& key,
                           const DecodeOptions& base, std::size_t jobs) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "no records to evaluate");
  std::vector<DetectionReport> reports(records.size());
  std::vector<double> ppl(records.size(), kNaN);
  std::map<std::tuple<int, std::size_t, double, std::uint64_t>, std::shared_ptr<const ToyLM>> models;
  for (const auto& r : records) {
    if (r.lm.kind == LmKind::kFixedTable) continue;
    const auto k = std::make_tuple(static_cast<int>(r.lm.kind), r.lm.vocab_size, r.lm.alpha, r.lm.seed);
    if (!models.count(k)) models[k] = std::make_shared<const ToyLM>(ToyLM::from_spec(r.lm));
  }
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    const auto& r = records[i];
    WatermarkKey k = key;
    k.context_window = r.context_window;
    DecodeOptions opts = decode_options_for(r.scheme, r.encoder, r.message.size(), r.lm.vocab_size);
    opts.dedup = base.dedup;
    opts.mc_samples = base.mc_samples;
    opts.mc_seed = base.mc_seed;
    opts.tie_seed = mix_seed(base.tie_seed, r.rng_seed);
    reports[i] = detect(r.sequence(), k, opts);
    if (r.lm.kind != LmKind::kFixedTable) {
      const auto mk = std::make_tuple(static_cast<int>(r.lm.kind), r.lm.vocab_size, r.lm.alpha, r.lm.seed);
      ppl[i] = safe_log_perplexity(*models.at(mk), r.sequence());
    }
  });

  MetricRow row;
  row.name = "records";
  std::vector<DecodedSample> samples;
  std::vector<DetectionReport> null_reports;
  std::vector<double> wm_ppl;
  double eff = 0.0;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].watermarked()) {
      samples.push_back({records[i].message, reports[i]});
      wm_ppl.push_back(ppl[i]);
      eff += static_cast<double>(reports[i].effective_length);
    } else {
      null_reports.push_back(reports[i]);
    }
  }
  // Order-invariant fingerprint: XOR of per-record hashes.
  std::uint64_t acc = 0;
  for (const auto& r : records) acc ^= fnv1a(to_json(r).dump(), h);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(acc));
  row.fingerprint = buf;
  row.n_samples = static_cast<long>(samples.size());
  row.n_null = static_cast<long>(null_reports.size());
  const Rates r = watermarked_rates(samples);
  row.bit_accuracy = r.bit_accuracy;
  row.message_accuracy = r.message_accuracy;
  row.ba_at_fpr = r.ba;
  row.tpr_at_fpr = r.tpr;
  fill_null_rates(row, null_reports);
  row.mean_log_perplexity = mean_finite(wm_ppl);
  row.mean_effective_length = samples.empty() ? kNaN : eff / static_cast<double>(samples.size());
  return row;
}

std::vector<MetricRow> run_sweep(std::span<const SweepCell> cells, std::uint64_t master_seed, std::size_t jobs,
                                 const std::function<void(const MetricRow&)>& on_row) {
  if (cells.empty()) throw Error(ErrorCode::kInvalidArgument, "empty sweep grid");
  std::vector<std::pair<LmSpec, std::shared_ptr<const ToyLM>>> models;
  std::vector<MetricRow> rows;
  for (const auto& cell : cells) {
    MetricRow row;
    try {
      std::shared_ptr<const ToyLM> lm;
      for (const auto& [spec, model] : models) {
        if (spec == cell.lm) lm = model;
      }
      if (!lm) {
        lm = std::make_shared<const ToyLM>(ToyLM::from_spec(cell.lm));
        models.emplace_back(cell.lm, lm);
      }
      row = summarize(cell, run_cell(cell, master_seed, jobs, lm.get()));
    } catch (const std::exception& e) {
      row = MetricRow{};
      row.name = cell.name;
      row.fingerprint = fingerprint(cell);
      row.bit_accuracy = row.message_accuracy = row.mean_log_perplexity = row.mean_effective_length = kNaN;
      for (auto* arr : {&row.ba_at_fpr, &row.tpr_at_fpr, &row.fpr_at, &row.bit_fpr_at}) arr->fill(kNaN);
      row.error = e.what();
    }
    if (on_row) on_row(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<SweepCell> expand_sweep(const Json& doc) {
  require_known_fields(doc, {"seed", "base", "axes", "cells"}, "sweep");
  const Json base = doc.value("base", Json::object());
  const std::string base_name = base.value("name", std::string("cell"));
  if (doc.contains("axes") && doc.contains("cells")) {
    throw Error(ErrorCode::kConfig, "sweep: use either 'axes' or 'cells', not both");
  }
  std::vector<std::pair<Json, std::string>> docs;
  if (doc.contains("cells")) {
    for (const auto& patch : doc["cells"]) {
      Json j = base;
      j.merge_patch(patch);
      docs.emplace_back(j, j.value("name", base_name));
    }
  } else if (doc.contains("axes")) {
    docs.emplace_back(base, base_name);
    for (const auto& axis : doc["axes"]) {
      require_known_fields(axis, {"path", "values"}, "sweep.axes");
      const std::string path = axis.at("path").get<std::string>();
      if (!axis.at("values").is_array() || axis["values"].empty()) {
        throw Error(ErrorCode::kConfig, "sweep.axes: '" + path + "' needs a non-empty values array");
      }
      std::vector<std::pair<Json, std::string>> next;
      for (const auto& [j, name] : docs) {
        for (const auto& v : axis["values"]) {
          Json copy = j;
          try {
            copy[Json::json_pointer(path)] = v;
          } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::kConfig, "sweep.axes: bad path '" + path + "': " + e.what());
          }
          next.emplace_back(std::move(copy), name + " " + path + "=" + v.dump());
        }
      }
      docs = std::move(next);
    }
  } else {
    docs.emplace_back(base, base_name);
  }
  std::vector<SweepCell> cells;
  for (auto& [j, name] : docs) {
    j["name"] = name;
    cells.push_back(cell_from_json(j));
  }
  if (cells.empty()) throw Error(ErrorCode::kConfig, "sweep: empty grid");
  return cells;
}

}  // namespace binomark
