#include "crowdaudit/report.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "crowdaudit/csv.hpp"
#include "crowdaudit/error.hpp"
#include "json.hpp"

namespace crowdaudit::report {

using nlohmann::ordered_json;

AuditReport run_audit(const AuditInputs& inputs, const AuditConfig& config) {
  if (inputs.traces.empty()) throw ValidationError("audit: the trace log has no responses");
  if (config.thresholds.empty()) throw ValidationError("audit: no thresholds configured");

  std::unordered_map<std::string, const detector::ScoreRecord*> score_of;
  for (const auto& s : inputs.scores) score_of.emplace(s.response_id, &s);
  std::unordered_map<std::string, const corpus::Abstract*> abstract_of;
  for (const auto& a : inputs.abstracts) abstract_of.emplace(a.abstract_id, &a);

  std::vector<std::string> missing_scores;
  std::vector<std::string> missing_abstracts;
  std::vector<detector::ScoreRecord> scores;
  std::unordered_map<std::string, std::string> worker_of;
  std::set<std::string> scorer_names;
  for (const auto& t : inputs.traces) {
    auto it = score_of.find(t.response_id);
    if (it == score_of.end()) {
      missing_scores.push_back(t.response_id);
      continue;
    }
    scores.push_back(*it->second);
    scorer_names.insert(it->second->scorer_name);
    worker_of.emplace(t.response_id, t.worker_id);
    if (!abstract_of.contains(t.abstract_id)) missing_abstracts.push_back(t.response_id);
  }
  if (!missing_scores.empty()) {
    std::string msg = "audit: missing scores for response_ids:";
    for (const auto& id : missing_scores) msg += " " + id;
    throw ValidationError(msg);
  }
  if (!missing_abstracts.empty()) {
    std::string msg = "audit: traces reference abstracts absent from the corpus; response_ids:";
    for (const auto& id : missing_abstracts) msg += " " + id;
    throw ValidationError(msg);
  }

  AuditReport report;
  report.n_responses = scores.size();
  report.scorer_names.assign(scorer_names.begin(), scorer_names.end());
  {
    std::unordered_set<std::string> workers;
    for (const auto& [_, w] : worker_of) workers.insert(w);
    report.n_workers = workers.size();
  }

  std::vector<double> thresholds = config.thresholds;
  for (double t : thresholds) {
    report.prevalence.push_back(stats::prevalence(scores, t, config.prevalence));
    report.worker_prevalence.push_back(stats::worker_prevalence(scores, worker_of, t, config.prevalence));
    if (!inputs.labels.empty()) report.metrics.push_back(stats::evaluate(scores, inputs.labels, t));
  }
  if (!config.sweep_thresholds.empty()) report.sweep = stats::threshold_sweep(scores, config.sweep_thresholds);

  report.posthoc_threshold = config.posthoc_threshold;
  report.low_overlap_threshold = config.overlap.low_overlap_threshold;
  std::map<std::string, corpus::Label> decisions;
  std::map<std::string, bool> pasted;
  for (const auto& t : inputs.traces) {
    decisions[t.response_id] = detector::classify(score_of.at(t.response_id)->logit, config.posthoc_threshold);
    pasted[t.response_id] = telemetry::has_paste(t, config.paste);
  }
  report.paste_matrix = stats::paste_decision_matrix(decisions, pasted);

  for (const auto& t : inputs.traces) {
    if (config.overlap_scope == OverlapScope::pasted && !pasted.at(t.response_id)) continue;
    const auto* a = abstract_of.at(t.abstract_id);
    report.overlaps.push_back(overlap::compute_overlap(t.response_id, t.final_text, a->abstract_id, a->text,
                                                       config.overlap));
  }
  if (!report.overlaps.empty()) {
    report.overlap = stats::overlap_report(report.overlaps, decisions,
                                           {config.histogram_bin_width, config.overlap.low_overlap_threshold});
  }
  return report;
}

namespace {

std::string percent(double v, int digits = 1) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << 100.0 * v << '%';
  return ss.str();
}

std::string plain(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

ordered_json prevalence_object(const stats::PrevalenceEstimate& e) {
  ordered_json j;
  j["threshold"] = e.threshold;
  j["probability_threshold"] = stats::logit_to_probability(e.threshold);
  j["aggregation"] = std::string(stats::to_string(e.aggregation));
  j["count_synthetic"] = e.count_synthetic;
  j["n"] = e.n;
  if (e.aggregation == stats::Aggregation::macro_worker) j["n_workers"] = e.n_workers;
  j["point"] = e.point;
  j["ci_low"] = e.ci_low;
  j["ci_high"] = e.ci_high;
  j["ci_method"] = std::string(stats::to_string(e.ci_method));
  j["ci_level"] = e.ci_level;
  return j;
}

ordered_json metric_values(const stats::MetricValues& v) {
  ordered_json j;
  j["accuracy"] = v.accuracy;
  j["macro_f1"] = v.macro_f1;
  j["precision_synthetic"] = v.precision;
  j["recall_synthetic"] = v.recall;
  j["precision_macro"] = v.macro_precision;
  j["recall_macro"] = v.macro_recall;
  return j;
}

ordered_json metric_object(const stats::MetricReport& r) {
  ordered_json j;
  j["threshold"] = r.threshold;
  j["n_repeats"] = r.n_repeats;
  j["mean"] = metric_values(r.mean);
  j["stddev"] = r.stddev ? metric_values(*r.stddev) : ordered_json(nullptr);
  if (r.n_repeats == 1) {
    j["confusion"] = {{"true_synthetic", r.confusion.true_synthetic},
                      {"false_synthetic", r.confusion.false_synthetic},
                      {"true_human", r.confusion.true_human},
                      {"false_human", r.confusion.false_human}};
  } else {
    ordered_json runs = ordered_json::array();
    for (const auto& run : r.runs) runs.push_back(metric_values(run));
    j["runs"] = runs;
  }
  return j;
}

ordered_json matrix_object(const stats::PasteDecisionMatrix& m) {
  ordered_json j;
  j["rows"] = {"synthetic", "human"};
  j["columns"] = {"with_pasting", "without_pasting"};
  j["counts"] = {{m.counts[0][0], m.counts[0][1]}, {m.counts[1][0], m.counts[1][1]}};
  j["total"] = m.total();
  return j;
}

}  // namespace

std::string to_json(const stats::PrevalenceEstimate& estimate) { return prevalence_object(estimate).dump(2); }

std::string to_json(const stats::MetricReport& report) { return metric_object(report).dump(2); }

std::string metrics_csv(const stats::MetricReport& r) {
  std::ostringstream out;
  out << "metric,mean,stddev\n";
  auto row = [&](const char* name, double stats::MetricValues::*field) {
    out << name << ',' << csv::format_double(r.mean.*field) << ','
        << (r.stddev ? csv::format_double((*r.stddev).*field) : "") << '\n';
  };
  row("accuracy", &stats::MetricValues::accuracy);
  row("macro_f1", &stats::MetricValues::macro_f1);
  row("precision_synthetic", &stats::MetricValues::precision);
  row("recall_synthetic", &stats::MetricValues::recall);
  row("precision_macro", &stats::MetricValues::macro_precision);
  row("recall_macro", &stats::MetricValues::macro_recall);
  return out.str();
}

std::string prevalence_json(const AuditReport& report) {
  ordered_json j;
  j["n_responses"] = report.n_responses;
  j["n_workers"] = report.n_workers;
  ordered_json micro = ordered_json::array();
  for (const auto& e : report.prevalence) micro.push_back(prevalence_object(e));
  ordered_json macro = ordered_json::array();
  for (const auto& e : report.worker_prevalence) macro.push_back(prevalence_object(e));
  j["micro_summary"] = micro;
  j["macro_worker"] = macro;
  return j.dump(2) + "\n";
}

std::string prevalence_csv(const AuditReport& report) {
  std::ostringstream out;
  out << "threshold,aggregation,count_synthetic,n,n_workers,point,ci_low,ci_high,ci_method,ci_level\n";
  auto emit = [&](const stats::PrevalenceEstimate& e) {
    out << csv::join({csv::format_double(e.threshold), std::string(stats::to_string(e.aggregation)),
                      std::to_string(e.count_synthetic), std::to_string(e.n), std::to_string(e.n_workers),
                      csv::format_double(e.point), csv::format_double(e.ci_low), csv::format_double(e.ci_high),
                      std::string(stats::to_string(e.ci_method)), csv::format_double(e.ci_level)})
        << '\n';
  };
  for (const auto& e : report.prevalence) emit(e);
  for (const auto& e : report.worker_prevalence) emit(e);
  return out.str();
}

std::string sweep_csv(const std::vector<stats::SweepPoint>& sweep) {
  std::ostringstream out;
  out << "threshold,probability_threshold,count_synthetic,n,fraction_synthetic\n";
  for (const auto& p : sweep) {
    out << csv::join({csv::format_double(p.threshold), csv::format_double(stats::logit_to_probability(p.threshold)),
                      std::to_string(p.count_synthetic), std::to_string(p.n), csv::format_double(p.fraction_synthetic)})
        << '\n';
  }
  return out.str();
}

std::string paste_matrix_csv(const stats::PasteDecisionMatrix& m) {
  std::ostringstream out;
  out << "decision,with_pasting,without_pasting\n";
  out << "synthetic," << m.counts[0][0] << ',' << m.counts[0][1] << '\n';
  out << "human," << m.counts[1][0] << ',' << m.counts[1][1] << '\n';
  return out.str();
}

std::string paste_matrix_json(const stats::PasteDecisionMatrix& m) { return matrix_object(m).dump(2) + "\n"; }

std::string overlap_hist_csv(const stats::OverlapReport& overlap) {
  std::ostringstream out;
  out << "bin_lower,bin_upper,synthetic,human\n";
  for (const auto& b : overlap.histogram) {
    out << csv::format_double(b.lower) << ',' << csv::format_double(b.upper) << ',' << b.synthetic << ',' << b.human
        << '\n';
  }
  return out.str();
}

std::string posthoc_json(const AuditReport& report) {
  ordered_json j;
  j["decision_threshold"] = report.posthoc_threshold;
  j["paste_matrix"] = matrix_object(report.paste_matrix);
  ordered_json o;
  o["n_compared"] = report.overlaps.size();
  o["low_overlap_threshold"] = report.low_overlap_threshold;
  o["low_overlap_count"] = report.overlap.low_overlap_count;
  o["low_overlap_synthetic"] = report.overlap.low_overlap_synthetic;
  o["low_overlap_synthetic_share"] = report.overlap.low_overlap_synthetic_share
                                         ? ordered_json(*report.overlap.low_overlap_synthetic_share)
                                         : ordered_json(nullptr);
  j["overlap"] = o;
  return j.dump(2) + "\n";
}

std::string metrics_json(const AuditReport& report) {
  ordered_json j;
  j["scorer_names"] = report.scorer_names;
  j["n_responses"] = report.n_responses;
  ordered_json evals = ordered_json::array();
  for (const auto& m : report.metrics) evals.push_back(metric_object(m));
  j["evaluation"] = report.metrics.empty() ? ordered_json(nullptr) : evals;
  return j.dump(2) + "\n";
}

std::string summary_text(const AuditReport& report) {
  std::ostringstream out;
  out << "audited " << report.n_responses << " responses from " << report.n_workers << " workers\n";
  for (std::size_t i = 0; i < report.prevalence.size(); ++i) {
    const auto& e = report.prevalence[i];
    out << "prevalence @ logit > " << plain(e.threshold) << " (p > " << percent(stats::logit_to_probability(e.threshold))
        << "): " << percent(e.point) << " (" << e.count_synthetic << "/" << e.n << "), "
        << percent(e.ci_level, 0) << " CI [" << percent(e.ci_low) << ", " << percent(e.ci_high) << "] "
        << stats::to_string(e.ci_method);
    if (i < report.worker_prevalence.size()) {
      out << "; macro over workers " << percent(report.worker_prevalence[i].point);
    }
    out << '\n';
  }
  const auto& m = report.paste_matrix.counts;
  out << "paste x decision @ logit > " << plain(report.posthoc_threshold) << ": [[" << m[0][0] << "," << m[0][1]
      << "],[" << m[1][0] << "," << m[1][1] << "]] (rows synthetic/human, columns with/without pasting)\n";
  out << "low overlap (< " << percent(report.low_overlap_threshold, 0) << "): " << report.overlap.low_overlap_count
      << " of " << report.overlaps.size() << " compared summaries";
  if (report.overlap.low_overlap_synthetic_share) {
    out << ", " << report.overlap.low_overlap_synthetic << " synthetic ("
        << percent(*report.overlap.low_overlap_synthetic_share) << ")";
  } else {
    out << ", synthetic share undefined";
  }
  out << '\n';
  return out.str();
}

void write_text_file(const std::filesystem::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << content;
  if (!out) throw IoError("write error on " + file.string());
}

void write_audit_bundle(const std::filesystem::path& dir, const AuditReport& report) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_text_file(dir / "prevalence.json", prevalence_json(report));
  write_text_file(dir / "prevalence.csv", prevalence_csv(report));
  write_text_file(dir / "sweep.csv", sweep_csv(report.sweep));
  write_text_file(dir / "paste_matrix.csv", paste_matrix_csv(report.paste_matrix));
  write_text_file(dir / "paste_matrix.json", paste_matrix_json(report.paste_matrix));
  write_text_file(dir / "overlap_hist.csv", overlap_hist_csv(report.overlap));
  {
    std::ostringstream overlaps;
    overlap::write_overlap_csv(overlaps, report.overlaps);
    write_text_file(dir / "overlap.csv", overlaps.str());
  }
  write_text_file(dir / "posthoc.json", posthoc_json(report));
  write_text_file(dir / "metrics.json", metrics_json(report));
  write_text_file(dir / "summary.txt", summary_text(report));

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream stamp;
  stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  ordered_json meta;
  meta["generated_at"] = stamp.str();
  meta["tool"] = "crowdaudit";
  write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace crowdaudit::report
