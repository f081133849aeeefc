#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crowdaudit/corpus.hpp"
#include "crowdaudit/detector.hpp"
#include "crowdaudit/overlap.hpp"

namespace crowdaudit::stats {

using corpus::Label;
using detector::ScoreRecord;

struct MetricValues {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double precision = 0.0;  // synthetic is the positive class
  double recall = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;

  bool operator==(const MetricValues&) const = default;
};

struct ConfusionCounts {
  std::size_t true_synthetic = 0;   // predicted synthetic, labeled synthetic
  std::size_t false_synthetic = 0;  // predicted synthetic, labeled human
  std::size_t true_human = 0;
  std::size_t false_human = 0;      // predicted human, labeled synthetic
};

struct MetricReport {
  MetricValues mean;
  std::optional<MetricValues> stddev;  // sample stddev across repeats
  std::size_t n_repeats = 1;
  double threshold = 0.0;
  std::vector<MetricValues> runs;
  ConfusionCounts confusion;  // single evaluation only
};

/// Classifies every score at `threshold` and compares against `labels`.
/// Precision and recall with an empty denominator are 0. Throws
/// ValidationError listing the response_ids without a label.
MetricReport evaluate(const std::vector<ScoreRecord>& scores, const std::unordered_map<std::string, Label>& labels,
                      double threshold);

/// Runs `pipeline(seed)` for seeds base_seed .. base_seed + k - 1 and reports
/// the mean and sample standard deviation of each metric. Requires k >= 2.
MetricReport repeated_evaluate(std::size_t k, const std::function<MetricReport(std::uint64_t)>& pipeline,
                               std::uint64_t base_seed = 0);

// Mean and sample standard deviation of the runs, keeping the runs.
MetricReport summarize_runs(std::vector<MetricValues> runs, double threshold);

struct SweepPoint {
  double threshold = 0.0;
  std::size_t count_synthetic = 0;
  std::size_t n = 0;
  double fraction_synthetic = 0.0;
};

// Fraction of logits strictly above each threshold. Thresholds must be ascending.
std::vector<SweepPoint> threshold_sweep(const std::vector<ScoreRecord>& scores, const std::vector<double>& thresholds);

// first, first + step, ... up to and including `last` (within rounding), each computed as first + i * step.
std::vector<double> threshold_range(double first, double last, double step);

enum class CiMethod { normal_approx, wilson, bootstrap_percentile };
enum class Aggregation { micro_summary, macro_worker };

std::string_view to_string(CiMethod method);
std::string_view to_string(Aggregation aggregation);
CiMethod parse_ci_method(std::string_view s);

struct PrevalenceEstimate {
  double threshold = 0.0;
  std::size_t count_synthetic = 0;
  std::size_t n = 0;
  std::size_t n_workers = 0;  // macro_worker only
  double point = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  CiMethod ci_method = CiMethod::normal_approx;
  double ci_level = 0.95;
  Aggregation aggregation = Aggregation::micro_summary;

  bool operator==(const PrevalenceEstimate&) const = default;
};

struct PrevalenceOptions {
  CiMethod ci_method = CiMethod::normal_approx;
  double ci_level = 0.95;
  std::size_t bootstrap_reps = 10'000;
  std::uint64_t seed = 0;
};

// Two-sided standard normal quantile for `level`, e.g. 1.959964 for 0.95.
double z_for_level(double level);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

// p +- z sqrt(p(1-p)/n), clamped to [0, 1].
Interval normal_interval(double p, double n, double level);
// Wilson score interval.
Interval wilson_interval(double p, double n, double level);
// Percentile interval of the mean over seeded resamples of `values`.
Interval bootstrap_interval(const std::vector<double>& values, double level, std::size_t reps, std::uint64_t seed);

/// Share of responses classified synthetic at `threshold` with a confidence
/// interval. Throws ValidationError for empty input.
PrevalenceEstimate prevalence(const std::vector<ScoreRecord>& scores, double threshold,
                              const PrevalenceOptions& options = {});

/// Per-worker synthetic fraction averaged uniformly over workers. The interval
/// treats workers as the sampling unit (bootstrap resamples workers), so it
/// reduces to `prevalence` exactly when every worker has one response.
PrevalenceEstimate worker_prevalence(const std::vector<ScoreRecord>& scores,
                                     const std::unordered_map<std::string, std::string>& worker_of, double threshold,
                                     const PrevalenceOptions& options = {});

// counts[decision][paste]: decision 0 = synthetic, 1 = human; paste 0 = with, 1 = without.
struct PasteDecisionMatrix {
  std::array<std::array<std::size_t, 2>, 2> counts{};

  std::size_t total() const;
  bool operator==(const PasteDecisionMatrix&) const = default;
};

PasteDecisionMatrix paste_decision_matrix(const std::map<std::string, Label>& decisions,
                                          const std::map<std::string, bool>& paste_flags);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t synthetic = 0;
  std::size_t human = 0;
};

struct OverlapReport {
  std::vector<HistogramBin> histogram;
  std::size_t low_overlap_count = 0;
  std::size_t low_overlap_synthetic = 0;
  std::optional<double> low_overlap_synthetic_share;  // absent when no item is low-overlap
};

struct OverlapReportOptions {
  double bin_width = 0.05;
  double low_overlap_threshold = 0.10;
};

OverlapReport overlap_report(const std::vector<overlap::OverlapResult>& overlaps,
                             const std::map<std::string, Label>& decisions, const OverlapReportOptions& options = {});

// 1 / (1 + exp(-t)), evaluated without overflow.
double logit_to_probability(double t);

}  // namespace crowdaudit::stats
