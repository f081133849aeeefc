#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <unordered_map>
#include <string>
#include <vector>

#include "crowdaudit/corpus.hpp"
#include "crowdaudit/detector.hpp"
#include "crowdaudit/report.hpp"
#include "crowdaudit/stats.hpp"
#include "crowdaudit/synthgen.hpp"

namespace crowdaudit::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kValidationError = 2 };

// Maps the in-flight exception to a stable exit code and writes the diagnostic to `err`.
int exit_code_for_current_exception(std::ostream& err);

struct SynthOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir = ".crowdaudit-cache";
  synthgen::HttpEndpoint endpoint;
  std::string model_name = "gpt-3.5-turbo";
  std::vector<double> temperatures = {0.7, 1.0};
  int n = 10;
  double rate_per_second = 1.0;
  int parallelism = 1;
  int max_attempts = 5;
  int backoff_ms = 500;
  bool cache_only = false;
};

struct SynthResult {
  std::size_t synthetic_items = 0;
  std::size_t training_items = 0;
  synthgen::GenerationStats stats;
};

/// Generates synthetic summaries for every abstract in the corpus and writes
/// `abstracts.jsonl` plus a merged training `texts.jsonl` (abstracts and human
/// summaries labeled human, completions labeled synthetic) to `out_dir`.
/// `client` overrides the HTTP client built from `options.endpoint`.
SynthResult cmd_synth(const SynthOptions& options, synthgen::ChatClient* client = nullptr);

struct TrainOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> model_path;  // default: <out_dir>/model.txt
  corpus::SplitPolicy policy = corpus::SplitPolicy::summary_level;
  std::uint64_t seed = 0;
  detector::Hyperparameters hyperparameters;
  double threshold = 0.0;
  std::size_t repeats = 0;  // >= 2 adds mean/stddev over re-split, retrained runs
};

struct TrainResult {
  corpus::DatasetSplit split;
  detector::BaselineModel model;
  stats::MetricReport test_metrics;
  std::optional<stats::MetricReport> repeated;
  std::filesystem::path model_path;
};

// Deduplicates, splits, trains, evaluates on the test ids. Writes model,
// split.json, test_scores.csv, metrics.json and metrics.csv.
TrainResult cmd_train(const TrainOptions& options);

struct ScoreOptions {
  std::filesystem::path model_path;
  std::optional<std::filesystem::path> traces;      // score each response's final text
  std::optional<std::filesystem::path> corpus_dir;  // or every item of texts.jsonl
  std::optional<std::filesystem::path> out;         // default: stdout
};

std::vector<detector::ScoreRecord> cmd_score(const ScoreOptions& options, std::ostream& out);

struct AuditOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path traces;
  std::optional<std::filesystem::path> scores;  // exactly one of scores / model
  std::optional<std::filesystem::path> model;
  std::optional<std::filesystem::path> labels;  // CSV response_id,label
  std::filesystem::path out_dir;
  report::AuditConfig config;
};

/// Loads traces, abstracts and scores, runs the audit, writes the report
/// bundle and prints the summary to `out`.
report::AuditReport cmd_audit(const AuditOptions& options, std::ostream& out);

struct SweepOptions {
  std::filesystem::path scores;
  std::vector<double> thresholds;
  std::optional<std::filesystem::path> out;
};

std::vector<stats::SweepPoint> cmd_sweep(const SweepOptions& options, std::ostream& out);

struct SplitCommandOptions {
  std::filesystem::path corpus_dir;
  std::filesystem::path out;
  corpus::SplitPolicy policy = corpus::SplitPolicy::summary_level;
  std::uint64_t seed = 0;
};

corpus::DatasetSplit cmd_split(const SplitCommandOptions& options);

// Writes the built-in toy corpus (abstracts.jsonl, texts.jsonl) to `out_dir`.
corpus::Corpus cmd_toy_corpus(const std::filesystem::path& out_dir, std::size_t n_items, std::uint64_t seed);

// "response_id,label" CSV with label human|synthetic.
std::unordered_map<std::string, corpus::Label> load_labels(const std::filesystem::path& file);

}  // namespace crowdaudit::cli
