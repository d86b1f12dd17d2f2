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

// Metrics and reproducible experiment sweeps.

#ifndef BINOMARK_EVAL_HPP_
#define BINOMARK_EVAL_HPP_

#include "binomark/attacks.hpp"
#include "binomark/core.hpp"
#include "binomark/decoder.hpp"
#include "binomark/lm_sim.hpp"
#include "binomark/schemes.hpp"
#include "binomark/serialize.hpp"
#include "binomark/stats.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace binomark {

/// Fraction of matching bits. Throws LengthMismatch.
double bit_accuracy(const Message& truth, const Message& decoded);

// One decoded text together with the payload it should carry.
struct DecodedSample {
  Message truth;
  DetectionReport report;
};

/// Fraction of samples decoded without a single bit error.
double message_accuracy(std::span<const DecodedSample> samples);

/// Mean over all (sample, bit) pairs of 1{correct and p < alpha}.
double ba_at_fpr(std::span<const DecodedSample> samples, double alpha);

/// Fraction of p-values strictly below alpha. Throws on an empty set.
double tpr_at_fpr(std::span<const double> pvalues, double alpha);

struct CalibrationPoint {
  double alpha = 0.0;
  double empirical_fpr = 0.0;
  long flagged = 0;
  long total = 0;
  Interval ci;
};

/// Per alpha, the fraction of null p-values with p <= alpha. The grid must be
/// sorted and inside (0, 1]; at least `min_samples` p-values are required.
std::vector<CalibrationPoint> calibration_curve(std::span<const double> null_pvalues, std::span<const double> alphas,
                                                std::size_t min_samples = 100);

inline constexpr std::array<double, 2> kReportAlphas{0.01, 0.05};

struct MetricRow {
  std::string name;
  std::string fingerprint;
  long n_samples = 0;  // watermarked
  long n_null = 0;
  double bit_accuracy = 0.0;
  double message_accuracy = 0.0;
  std::array<double, kReportAlphas.size()> ba_at_fpr{};
  std::array<double, kReportAlphas.size()> tpr_at_fpr{};
  std::array<double, kReportAlphas.size()> fpr_at{};      // zero-bit, null texts
  std::array<double, kReportAlphas.size()> bit_fpr_at{};  // per-bit, null texts
  double mean_log_perplexity = 0.0;
  double mean_effective_length = 0.0;
  std::string error;  // non-empty when the cell failed
};

/// Fixed column order of the metrics CSV.
std::string metric_csv_header();
std::string to_csv(const MetricRow& row);
inline constexpr const char* kMetricCsvVersionLine = "# binomark-metrics v1";

struct SweepCell {
  std::string name = "cell";
  LmSpec lm;
  SamplerConfig sampler;
  SchemeConfig scheme;
  EncoderConfig encoder;
  std::size_t m = 16;
  std::size_t tokens = 0;  // 0 draws each length from the sampler range
  std::optional<AttackConfig> attack;
  std::size_t samples = 100;
  std::size_t null_samples = 0;
  std::size_t context_window = 3;
  std::optional<WatermarkKey> key;  // default: a fresh key per sample
  std::size_t mc_samples = 20000;
  std::uint64_t mc_seed = 0;
};

Json to_json(const SweepCell& cell);
SweepCell cell_from_json(const Json& j);

/// Stable hash of the cell configuration, 16 hex digits.
std::string fingerprint(const SweepCell& cell);

struct SampleOutcome {
  GenerationRecord record;   // before any attack
  TokenSequence attacked;    // what the detector saw
  WatermarkKey key;
  DetectionReport report;
  double log_perplexity = 0.0;  // NaN if some token had zero probability
};

struct CellOutcome {
  std::vector<SampleOutcome> watermarked;
  std::vector<SampleOutcome> null;
};

/// Samples of a cell. Seeds depend on the master seed and sample index only,
/// so cells run with one master seed are paired sample by sample.
CellOutcome run_cell(const SweepCell& cell, std::uint64_t master_seed, std::size_t jobs = 1,
                     const ToyLM* lm = nullptr);

MetricRow summarize(const SweepCell& cell, const CellOutcome& outcome);

/// Metrics of already generated records. Records without a scheme count as
/// null texts.
MetricRow evaluate_records(std::span<const GenerationRecord> records, const WatermarkKey& key,
                           const DecodeOptions& base, std::size_t jobs = 1);

/// Runs every cell; failures land in MetricRow::error and the sweep goes on.
/// `on_row` sees rows in cell order as they complete.
std::vector<MetricRow> run_sweep(std::span<const SweepCell> cells, std::uint64_t master_seed, std::size_t jobs,
                                 const std::function<void(const MetricRow&)>& on_row = {});

/// Sweep document: {"base": cell, "axes": [{"path": "/scheme/delta", "values": [...]}]}
/// or {"base": cell, "cells": [patch, ...]}. Axes expand as a cartesian product.
std::vector<SweepCell> expand_sweep(const Json& doc);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Rethrows the first error.
void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Decode options matching a cell configuration.
DecodeOptions decode_options_for(const SchemeConfig& scheme, const EncoderConfig& encoder, std::size_t m,
                                 std::size_t vocab_size);

}  // namespace binomark

#endif  // BINOMARK_EVAL_HPP_
