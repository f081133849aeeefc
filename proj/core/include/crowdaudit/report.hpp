#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "crowdaudit/corpus.hpp"
#include "crowdaudit/detector.hpp"
#include "crowdaudit/overlap.hpp"
#include "crowdaudit/stats.hpp"
#include "crowdaudit/telemetry.hpp"

namespace crowdaudit::report {

enum class OverlapScope { pasted, all };

struct AuditConfig {
  std::vector<double> thresholds = {0.0, 4.0};
  std::vector<double> sweep_thresholds = stats::threshold_range(-8.0, 8.0, 0.5);
  // Decision threshold for the paste matrix and the overlap analysis.
  double posthoc_threshold = 4.0;
  stats::PrevalenceOptions prevalence;
  telemetry::PasteOptions paste;
  overlap::OverlapOptions overlap;
  OverlapScope overlap_scope = OverlapScope::pasted;
  double histogram_bin_width = 0.05;
};

struct AuditInputs {
  std::vector<telemetry::ResponseTrace> traces;
  std::vector<detector::ScoreRecord> scores;
  std::vector<corpus::Abstract> abstracts;
  // Optional ground truth; when present metrics are evaluated at each threshold.
  std::unordered_map<std::string, corpus::Label> labels;
};

struct AuditReport {
  std::size_t n_responses = 0;
  std::size_t n_workers = 0;
  std::vector<stats::PrevalenceEstimate> prevalence;        // micro, one per threshold
  std::vector<stats::PrevalenceEstimate> worker_prevalence;  // macro, one per threshold
  std::vector<stats::SweepPoint> sweep;
  double posthoc_threshold = 0.0;
  stats::PasteDecisionMatrix paste_matrix;
  std::vector<overlap::OverlapResult> overlaps;
  stats::OverlapReport overlap;
  double low_overlap_threshold = 0.10;
  std::vector<stats::MetricReport> metrics;  // empty without labels
  std::vector<std::string> scorer_names;
};

/// Runs the post-hoc audit over traced responses. Only scores of traced
/// responses are used. Throws ValidationError listing response_ids that lack
/// a score, and for traces whose abstract is unknown.
AuditReport run_audit(const AuditInputs& inputs, const AuditConfig& config = {});

// Short human-readable digest; the same text is written to summary.txt.
std::string summary_text(const AuditReport& report);

std::string to_json(const stats::PrevalenceEstimate& estimate);
std::string to_json(const stats::MetricReport& report);
std::string metrics_csv(const stats::MetricReport& report);
std::string prevalence_json(const AuditReport& report);
std::string prevalence_csv(const AuditReport& report);
std::string sweep_csv(const std::vector<stats::SweepPoint>& sweep);
std::string paste_matrix_csv(const stats::PasteDecisionMatrix& matrix);
std::string paste_matrix_json(const stats::PasteDecisionMatrix& matrix);
std::string overlap_hist_csv(const stats::OverlapReport& overlap);
std::string posthoc_json(const AuditReport& report);
std::string metrics_json(const AuditReport& report);

/// Writes the bundle into `dir`: prevalence.json, prevalence.csv, sweep.csv,
/// paste_matrix.csv, paste_matrix.json, overlap_hist.csv, overlap.csv,
/// posthoc.json, metrics.json, summary.txt and metadata.json. Only
/// metadata.json carries a timestamp.
void write_audit_bundle(const std::filesystem::path& dir, const AuditReport& report);

void write_text_file(const std::filesystem::path& file, const std::string& content);

}  // namespace crowdaudit::report
