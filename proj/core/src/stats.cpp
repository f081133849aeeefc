#include "crowdaudit/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <set>

#include "crowdaudit/error.hpp"
#include "crowdaudit/random.hpp"

namespace crowdaudit::stats {

namespace {

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1(double precision, double recall) { return safe_div(2.0 * precision * recall, precision + recall); }

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += " " + id;
  return out;
}

}  // namespace

MetricReport evaluate(const std::vector<ScoreRecord>& scores, const std::unordered_map<std::string, Label>& labels,
                      double threshold) {
  std::vector<std::string> missing;
  ConfusionCounts c;
  for (const auto& s : scores) {
    auto it = labels.find(s.response_id);
    if (it == labels.end()) {
      missing.push_back(s.response_id);
      continue;
    }
    const bool predicted = detector::classify(s.logit, threshold) == Label::synthetic;
    const bool actual = it->second == Label::synthetic;
    if (predicted && actual) ++c.true_synthetic;
    if (predicted && !actual) ++c.false_synthetic;
    if (!predicted && !actual) ++c.true_human;
    if (!predicted && actual) ++c.false_human;
  }
  if (!missing.empty()) throw ValidationError("evaluate: no label for response_ids:" + join_ids(missing));
  if (scores.empty()) throw ValidationError("evaluate: no scores");

  const auto tp = static_cast<double>(c.true_synthetic);
  const auto fp = static_cast<double>(c.false_synthetic);
  const auto tn = static_cast<double>(c.true_human);
  const auto fn = static_cast<double>(c.false_human);
  MetricValues v;
  v.accuracy = (tp + tn) / (tp + fp + tn + fn);
  v.precision = safe_div(tp, tp + fp);
  v.recall = safe_div(tp, tp + fn);
  const double human_precision = safe_div(tn, tn + fn);
  const double human_recall = safe_div(tn, tn + fp);
  v.macro_precision = 0.5 * (v.precision + human_precision);
  v.macro_recall = 0.5 * (v.recall + human_recall);
  v.macro_f1 = 0.5 * (f1(v.precision, v.recall) + f1(human_precision, human_recall));

  MetricReport report;
  report.mean = v;
  report.threshold = threshold;
  report.runs = {v};
  report.confusion = c;
  return report;
}

MetricReport summarize_runs(std::vector<MetricValues> runs, double threshold) {
  if (runs.empty()) throw ValidationError("summarize_runs: no runs");
  constexpr std::array fields = {&MetricValues::accuracy,        &MetricValues::macro_f1,
                                 &MetricValues::precision,       &MetricValues::recall,
                                 &MetricValues::macro_precision, &MetricValues::macro_recall};
  const auto k = static_cast<double>(runs.size());
  MetricValues mean, sd;
  for (auto field : fields) {
    double sum = 0.0;
    for (const auto& r : runs) sum += r.*field;
    mean.*field = sum / k;
    double ss = 0.0;
    for (const auto& r : runs) ss += (r.*field - mean.*field) * (r.*field - mean.*field);
    sd.*field = runs.size() > 1 ? std::sqrt(ss / (k - 1.0)) : 0.0;
  }
  MetricReport report;
  report.mean = mean;
  if (runs.size() > 1) report.stddev = sd;
  report.n_repeats = runs.size();
  report.threshold = threshold;
  report.runs = std::move(runs);
  return report;
}

MetricReport repeated_evaluate(std::size_t k, const std::function<MetricReport(std::uint64_t)>& pipeline,
                               std::uint64_t base_seed) {
  if (k < 2) throw ValidationError("repeated_evaluate: k must be >= 2");
  std::vector<MetricValues> runs;
  runs.reserve(k);
  double threshold = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const MetricReport r = pipeline(base_seed + i);
    threshold = r.threshold;
    runs.push_back(r.mean);
  }
  return summarize_runs(std::move(runs), threshold);
}

std::vector<SweepPoint> threshold_sweep(const std::vector<ScoreRecord>& scores, const std::vector<double>& thresholds) {
  if (scores.empty()) throw ValidationError("threshold_sweep: empty scores");
  if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
    throw ValidationError("threshold_sweep: thresholds must be ascending");
  }
  std::vector<double> logits;
  logits.reserve(scores.size());
  for (const auto& s : scores) logits.push_back(s.logit);
  std::sort(logits.begin(), logits.end());
  std::vector<SweepPoint> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    const auto above = static_cast<std::size_t>(logits.end() - std::upper_bound(logits.begin(), logits.end(), t));
    out.push_back({t, above, logits.size(), static_cast<double>(above) / static_cast<double>(logits.size())});
  }
  return out;
}

std::vector<double> threshold_range(double first, double last, double step) {
  if (!(step > 0.0) || last < first) throw ValidationError("threshold_range: need step > 0 and last >= first");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double t = first + static_cast<double>(i) * step;
    if (t > last + 1e-9 * step) break;
    out.push_back(t);
  }
  return out;
}

std::string_view to_string(CiMethod method) {
  switch (method) {
    case CiMethod::normal_approx: return "normal_approx";
    case CiMethod::wilson: return "wilson";
    case CiMethod::bootstrap_percentile: return "bootstrap_percentile";
  }
  return "normal_approx";
}

std::string_view to_string(Aggregation aggregation) {
  return aggregation == Aggregation::micro_summary ? "micro_summary" : "macro_worker";
}

CiMethod parse_ci_method(std::string_view s) {
  if (s == "normal_approx" || s == "normal") return CiMethod::normal_approx;
  if (s == "wilson") return CiMethod::wilson;
  if (s == "bootstrap_percentile" || s == "bootstrap") return CiMethod::bootstrap_percentile;
  throw ValidationError("unknown CI method '" + std::string(s) + "'");
}

double z_for_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  const boost::math::normal standard;
  return boost::math::quantile(standard, 1.0 - (1.0 - level) / 2.0);
}

Interval normal_interval(double p, double n, double level) {
  const double half = z_for_level(level) * std::sqrt(p * (1.0 - p) / n);
  return {std::clamp(p - half, 0.0, 1.0), std::clamp(p + half, 0.0, 1.0)};
}

Interval wilson_interval(double p, double n, double level) {
  const double z = z_for_level(level);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // Algebraically inside [0, 1]; the clamp only absorbs rounding at p = 0 or 1.
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

namespace {

// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean_of(const std::vector<double>& values) {
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

Interval bootstrap_interval(const std::vector<double>& values, double level, std::size_t reps, std::uint64_t seed) {
  if (values.empty()) throw ValidationError("bootstrap_interval: empty sample");
  if (reps < 2) throw ValidationError("bootstrap_interval: need at least 2 replicates");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  std::vector<double> means(reps);
  const std::size_t n = values.size();
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng(derive_seed(seed, r));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += values[static_cast<std::size_t>(uniform_below(rng, n))];
    means[r] = sum / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - level;
  return {quantile_sorted(means, alpha / 2.0), quantile_sorted(means, 1.0 - alpha / 2.0)};
}

namespace {

// `values` are per-unit synthetic shares; their mean is the point estimate.
void fill_interval(PrevalenceEstimate& est, const std::vector<double>& values, const PrevalenceOptions& options) {
  const auto units = static_cast<double>(values.size());
  Interval ci;
  switch (options.ci_method) {
    case CiMethod::normal_approx: ci = normal_interval(est.point, units, options.ci_level); break;
    case CiMethod::wilson: ci = wilson_interval(est.point, units, options.ci_level); break;
    case CiMethod::bootstrap_percentile:
      ci = bootstrap_interval(values, options.ci_level, options.bootstrap_reps, options.seed);
      break;
  }
  // A percentile interval need not bracket the sample mean; widen to keep low <= point <= high.
  est.ci_low = std::min(ci.low, est.point);
  est.ci_high = std::max(ci.high, est.point);
  est.ci_method = options.ci_method;
  est.ci_level = options.ci_level;
}

}  // namespace

PrevalenceEstimate prevalence(const std::vector<ScoreRecord>& scores, double threshold,
                              const PrevalenceOptions& options) {
  if (scores.empty()) throw ValidationError("prevalence: no scores");
  std::vector<double> indicators;
  indicators.reserve(scores.size());
  for (const auto& s : scores) indicators.push_back(detector::classify(s.logit, threshold) == Label::synthetic);
  PrevalenceEstimate est;
  est.threshold = threshold;
  est.n = scores.size();
  est.count_synthetic = static_cast<std::size_t>(std::count(indicators.begin(), indicators.end(), 1.0));
  est.point = mean_of(indicators);
  est.aggregation = Aggregation::micro_summary;
  fill_interval(est, indicators, options);
  return est;
}

PrevalenceEstimate worker_prevalence(const std::vector<ScoreRecord>& scores,
                                     const std::unordered_map<std::string, std::string>& worker_of, double threshold,
                                     const PrevalenceOptions& options) {
  if (scores.empty()) throw ValidationError("worker_prevalence: no workers");
  std::vector<std::string> unmapped;
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::pair<double, double>> tallies;  // (synthetic, total) per worker, first-appearance order
  std::size_t synthetic = 0;
  for (const auto& s : scores) {
    auto it = worker_of.find(s.response_id);
    if (it == worker_of.end()) {
      unmapped.push_back(s.response_id);
      continue;
    }
    auto [pos, inserted] = slot.emplace(it->second, tallies.size());
    if (inserted) tallies.emplace_back(0.0, 0.0);
    const bool is_synthetic = detector::classify(s.logit, threshold) == Label::synthetic;
    tallies[pos->second].first += is_synthetic;
    tallies[pos->second].second += 1.0;
    synthetic += is_synthetic;
  }
  if (!unmapped.empty()) throw ValidationError("worker_prevalence: responses without a worker:" + join_ids(unmapped));

  std::vector<double> fractions;
  fractions.reserve(tallies.size());
  for (const auto& [syn, total] : tallies) fractions.push_back(syn / total);
  PrevalenceEstimate est;
  est.threshold = threshold;
  est.n = scores.size();
  est.n_workers = fractions.size();
  est.count_synthetic = synthetic;
  est.point = mean_of(fractions);
  est.aggregation = Aggregation::macro_worker;
  fill_interval(est, fractions, options);
  return est;
}

std::size_t PasteDecisionMatrix::total() const {
  return counts[0][0] + counts[0][1] + counts[1][0] + counts[1][1];
}

PasteDecisionMatrix paste_decision_matrix(const std::map<std::string, Label>& decisions,
                                          const std::map<std::string, bool>& paste_flags) {
  std::vector<std::string> mismatched;
  for (const auto& [id, _] : decisions) {
    if (!paste_flags.contains(id)) mismatched.push_back(id);
  }
  for (const auto& [id, _] : paste_flags) {
    if (!decisions.contains(id)) mismatched.push_back(id);
  }
  if (!mismatched.empty()) {
    throw ValidationError("paste_decision_matrix: key sets differ; unmatched ids:" + join_ids(mismatched));
  }
  PasteDecisionMatrix m;
  for (const auto& [id, label] : decisions) {
    const std::size_t row = label == Label::synthetic ? 0 : 1;
    const std::size_t col = paste_flags.at(id) ? 0 : 1;
    ++m.counts[row][col];
  }
  return m;
}

OverlapReport overlap_report(const std::vector<overlap::OverlapResult>& overlaps,
                             const std::map<std::string, Label>& decisions, const OverlapReportOptions& options) {
  if (overlaps.empty()) throw ValidationError("overlap_report: no overlap results");
  if (!(options.bin_width > 0.0 && options.bin_width <= 1.0)) {
    throw ValidationError("overlap_report: bin width must lie in (0, 1]");
  }
  std::vector<std::string> missing;
  for (const auto& o : overlaps) {
    if (!decisions.contains(o.summary_id)) missing.push_back(o.summary_id);
  }
  if (!missing.empty()) throw ValidationError("overlap_report: no decision for summaries:" + join_ids(missing));

  OverlapReport report;
  const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / options.bin_width - 1e-9));
  for (std::size_t b = 0; b < n_bins; ++b) {
    report.histogram.push_back({static_cast<double>(b) * options.bin_width,
                                std::min(1.0, static_cast<double>(b + 1) * options.bin_width), 0, 0});
  }
  for (const auto& o : overlaps) {
    const bool synthetic = decisions.at(o.summary_id) == Label::synthetic;
    auto bin = static_cast<std::size_t>(std::floor(o.ratio / options.bin_width + 1e-9));
    bin = std::min(bin, n_bins - 1);
    (synthetic ? report.histogram[bin].synthetic : report.histogram[bin].human)++;
    if (overlap::low_overlap(o, options.low_overlap_threshold)) {
      ++report.low_overlap_count;
      report.low_overlap_synthetic += synthetic;
    }
  }
  if (report.low_overlap_count > 0) {
    report.low_overlap_synthetic_share =
        static_cast<double>(report.low_overlap_synthetic) / static_cast<double>(report.low_overlap_count);
  }
  return report;
}

double logit_to_probability(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace crowdaudit::stats
