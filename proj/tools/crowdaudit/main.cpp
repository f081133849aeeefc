#include <algorithm>
#include <iostream>

#include "CLI11.hpp"
#include "crowdaudit/commands.hpp"
#include "crowdaudit/error.hpp"

using namespace crowdaudit;

namespace {

struct SweepRange {
  double from = -8.0;
  double to = 8.0;
  double step = 0.5;
};

void add_sweep_flags(CLI::App* cmd, SweepRange& range) {
  cmd->add_option("--sweep-from", range.from, "First sweep threshold (logit)")->capture_default_str();
  cmd->add_option("--sweep-to", range.to, "Last sweep threshold (logit)")->capture_default_str();
  cmd->add_option("--sweep-step", range.step, "Sweep step")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdaudit: audit crowdsourced text responses for LLM-generated content"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.require_subcommand(1);

  // synth
  cli::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate synthetic training summaries via a chat-completion endpoint");
  synth_cmd->add_option("--corpus", synth.corpus_dir, "Corpus directory with abstracts.jsonl")->required();
  synth_cmd->add_option("--out", synth.out_dir, "Output corpus directory")->required();
  synth_cmd->add_option("--cache-dir", synth.cache_dir, "Response cache directory")->capture_default_str();
  synth_cmd->add_option("--endpoint", synth.endpoint.base_url, "Base URL of the chat-completion service")
      ->capture_default_str();
  synth_cmd->add_option("--api-path", synth.endpoint.path, "Request path")->capture_default_str();
  synth_cmd->add_option("--payload-template", synth.endpoint.payload_template,
                        "JSON body with {{model}}, {{temperature}}, {{prompt}} placeholders");
  synth_cmd->add_option("--response-pointer", synth.endpoint.response_pointer, "JSON pointer to the completion text")
      ->capture_default_str();
  synth_cmd->add_option("--api-key-env", synth.endpoint.api_key_env, "Environment variable holding the API token")
      ->capture_default_str();
  synth_cmd->add_option("--model-name", synth.model_name, "Model name sent to the endpoint")->capture_default_str();
  synth_cmd->add_option("--temperatures", synth.temperatures, "Sampling temperatures")->delimiter(',')
      ->capture_default_str();
  synth_cmd->add_option("--n", synth.n, "Completions per (abstract, temperature)")->capture_default_str();
  synth_cmd->add_option("--rate", synth.rate_per_second, "Request rate limit per second (<= 0: unlimited)")
      ->capture_default_str();
  synth_cmd->add_option("--parallelism", synth.parallelism, "Concurrent requests")->capture_default_str();
  synth_cmd->add_option("--max-attempts", synth.max_attempts, "Attempts per request")->capture_default_str();
  synth_cmd->add_option("--backoff-ms", synth.backoff_ms, "Initial retry backoff")->capture_default_str();
  synth_cmd->add_flag("--cache-only", synth.cache_only, "Serve from cache only; a miss is an error");

  // train
  cli::TrainOptions train;
  std::string train_policy = "summary_level";
  std::string train_model;
  auto* train_cmd = app.add_subcommand("train", "Train the baseline n-gram classifier and evaluate on held-out data");
  train_cmd->add_option("--corpus", train.corpus_dir, "Training corpus directory")->required();
  train_cmd->add_option("--out", train.out_dir, "Output directory")->required();
  train_cmd->add_option("--model", train_model, "Model file to write (default <out>/model.txt)");
  train_cmd->add_option("--split", train_policy, "summary_level | abstract_level")->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Split and training seed")->capture_default_str();
  train_cmd->add_option("--threshold", train.threshold, "Decision threshold for evaluation")->capture_default_str();
  train_cmd->add_option("--repeats", train.repeats, "Seeded repeats for mean/stddev (>= 2)");
  train_cmd->add_option("--learning-rate", train.hyperparameters.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch-size", train.hyperparameters.batch_size)->capture_default_str();
  train_cmd->add_option("--epochs", train.hyperparameters.epochs)->capture_default_str();
  train_cmd->add_option("--l2", train.hyperparameters.l2)->capture_default_str();

  // score
  cli::ScoreOptions score;
  std::string score_traces, score_corpus, score_out;
  auto* score_cmd = app.add_subcommand("score", "Score texts with a trained baseline model");
  score_cmd->add_option("--model", score.model_path, "Model file")->required();
  auto* score_traces_opt = score_cmd->add_option("--traces", score_traces, "Trace log whose final texts are scored");
  auto* score_corpus_opt = score_cmd->add_option("--corpus", score_corpus, "Corpus whose texts.jsonl is scored");
  score_traces_opt->excludes(score_corpus_opt);
  score_cmd->add_option("--out", score_out, "Score file to write (default stdout)");

  // audit
  cli::AuditOptions audit;
  std::string audit_scores, audit_model, audit_labels, ci_method = "normal_approx", overlap_scope = "pasted";
  SweepRange audit_range;
  auto* audit_cmd = app.add_subcommand("audit", "Estimate prevalence and run post-hoc validation");
  audit_cmd->add_option("--corpus", audit.corpus_dir, "Corpus directory with abstracts.jsonl")->required();
  audit_cmd->add_option("--traces", audit.traces, "Trace log (JSON Lines)")->required();
  auto* audit_scores_opt = audit_cmd->add_option("--scores", audit_scores, "Score file from any scorer");
  auto* audit_model_opt = audit_cmd->add_option("--model", audit_model, "Baseline model to score traces with");
  audit_scores_opt->excludes(audit_model_opt);
  audit_cmd->add_option("--labels", audit_labels, "Optional ground truth CSV (response_id,label)");
  audit_cmd->add_option("--out", audit.out_dir, "Report directory")->required();
  audit_cmd->add_option("--thresholds", audit.config.thresholds, "Prevalence thresholds (logits), e.g. 0,4")
      ->delimiter(',')
      ->capture_default_str();
  audit_cmd->add_option("--posthoc-threshold", audit.config.posthoc_threshold,
                        "Decision threshold for paste and overlap analysis")
      ->capture_default_str();
  audit_cmd->add_option("--ci-method", ci_method, "normal_approx | wilson | bootstrap_percentile")
      ->capture_default_str();
  audit_cmd->add_option("--ci-level", audit.config.prevalence.ci_level)->capture_default_str();
  audit_cmd->add_option("--bootstrap-reps", audit.config.prevalence.bootstrap_reps)->capture_default_str();
  audit_cmd->add_option("--seed", audit.config.prevalence.seed, "Bootstrap seed")->capture_default_str();
  audit_cmd->add_option("--overlap-scope", overlap_scope, "pasted | all")->capture_default_str();
  audit_cmd->add_option("--low-overlap", audit.config.overlap.low_overlap_threshold)->capture_default_str();
  audit_cmd->add_option("--bin-width", audit.config.histogram_bin_width)->capture_default_str();
  audit_cmd->add_option("--burst-chars", audit.config.paste.burst_insert_chars,
                        "Single input events this long count as pastes")
      ->capture_default_str();
  add_sweep_flags(audit_cmd, audit_range);

  // sweep
  cli::SweepOptions sweep;
  std::string sweep_out;
  SweepRange sweep_range;
  auto* sweep_cmd = app.add_subcommand("sweep", "Fraction predicted synthetic across logit thresholds");
  sweep_cmd->add_option("--scores", sweep.scores, "Score file")->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV to write (default stdout)");
  add_sweep_flags(sweep_cmd, sweep_range);
  std::vector<double> sweep_list;
  sweep_cmd->add_option("--thresholds", sweep_list, "Explicit ascending thresholds, e.g. 0,4 (overrides the range)")
      ->delimiter(',');

  // split
  cli::SplitCommandOptions split;
  std::string split_policy = "summary_level";
  auto* split_cmd = app.add_subcommand("split", "Write a train/validation/test split.json");
  split_cmd->add_option("--corpus", split.corpus_dir)->required();
  split_cmd->add_option("--out", split.out, "split.json path")->required();
  split_cmd->add_option("--split", split_policy, "summary_level | abstract_level")->capture_default_str();
  split_cmd->add_option("--seed", split.seed)->capture_default_str();

  // toy-corpus
  std::string toy_out;
  std::size_t toy_items = 200;
  std::uint64_t toy_seed = 7;
  auto* toy_cmd = app.add_subcommand("toy-corpus", "Write the built-in two-family toy corpus");
  toy_cmd->add_option("--out", toy_out)->required();
  toy_cmd->add_option("--items", toy_items)->capture_default_str();
  toy_cmd->add_option("--seed", toy_seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kValidationError;
  }

  try {
    if (*synth_cmd) {
      const auto r = cli::cmd_synth(synth);
      std::cout << "synthetic items: " << r.synthetic_items << "; training items: " << r.training_items
                << "; cache hits: " << r.stats.cache_hits << "; network calls: " << r.stats.network_calls << '\n';
    } else if (*train_cmd) {
      train.policy = corpus::parse_policy(train_policy);
      if (!train_model.empty()) train.model_path = train_model;
      const auto r = cli::cmd_train(train);
      const auto& m = r.repeated ? r.repeated->mean : r.test_metrics.mean;
      std::cout << "split " << corpus::to_string(r.split.policy) << " train/validation/test = " << r.split.train.size()
                << "/" << r.split.validation.size() << "/" << r.split.test.size() << "; best epoch "
                << r.model.best_epoch << "\n"
                << "accuracy " << m.accuracy << "  macro-F1 " << m.macro_f1 << "  precision " << m.precision
                << "  recall " << m.recall << "\nmodel: " << r.model_path.string() << '\n';
    } else if (*score_cmd) {
      if (!score_traces.empty()) score.traces = score_traces;
      if (!score_corpus.empty()) score.corpus_dir = score_corpus;
      if (!score_out.empty()) score.out = score_out;
      cli::cmd_score(score, std::cout);
    } else if (*audit_cmd) {
      if (!audit_scores.empty()) audit.scores = audit_scores;
      if (!audit_model.empty()) audit.model = audit_model;
      if (!audit_labels.empty()) audit.labels = audit_labels;
      audit.config.prevalence.ci_method = stats::parse_ci_method(ci_method);
      if (overlap_scope == "pasted") {
        audit.config.overlap_scope = report::OverlapScope::pasted;
      } else if (overlap_scope == "all") {
        audit.config.overlap_scope = report::OverlapScope::all;
      } else {
        throw ValidationError("unknown overlap scope '" + overlap_scope + "'");
      }
      std::sort(audit.config.thresholds.begin(), audit.config.thresholds.end());
      audit.config.sweep_thresholds = stats::threshold_range(audit_range.from, audit_range.to, audit_range.step);
      cli::cmd_audit(audit, std::cout);
    } else if (*sweep_cmd) {
      sweep.thresholds = sweep_list.empty()
                             ? stats::threshold_range(sweep_range.from, sweep_range.to, sweep_range.step)
                             : sweep_list;
      if (!sweep_out.empty()) sweep.out = sweep_out;
      cli::cmd_sweep(sweep, std::cout);
    } else if (*split_cmd) {
      split.policy = corpus::parse_policy(split_policy);
      const auto s = cli::cmd_split(split);
      std::cout << "train/validation/test = " << s.train.size() << "/" << s.validation.size() << "/" << s.test.size()
                << '\n';
    } else if (*toy_cmd) {
      const auto c = cli::cmd_toy_corpus(toy_out, toy_items, toy_seed);
      std::cout << "wrote " << c.texts.size() << " items over " << c.abstracts.size() << " abstracts\n";
    }
  } catch (...) {
    return cli::exit_code_for_current_exception(std::cerr);
  }
  return cli::kOk;
}
