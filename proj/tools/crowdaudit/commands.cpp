#include "crowdaudit/commands.hpp"

#include <fstream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "crowdaudit/csv.hpp"
#include "crowdaudit/error.hpp"
#include "crowdaudit/telemetry.hpp"
#include "crowdaudit/toy_corpus.hpp"

namespace crowdaudit::cli {

int exit_code_for_current_exception(std::ostream& err) {
  try {
    throw;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidationError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  }
}

namespace {

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

SynthResult cmd_synth(const SynthOptions& options, synthgen::ChatClient* client) {
  if (options.n < 1) throw ValidationError("synth: n must be >= 1");
  if (options.temperatures.empty()) throw ValidationError("synth: no temperatures configured");
  const corpus::Corpus source = corpus::load_corpus(options.corpus_dir);
  if (source.abstracts.empty()) throw ValidationError("synth: corpus has no abstracts");

  std::optional<synthgen::HttpChatClient> http;
  if (!client) client = &http.emplace(options.endpoint);

  synthgen::ResponseCache cache(options.cache_dir);
  synthgen::GenerationOptions gen;
  gen.retry.max_attempts = options.max_attempts;
  gen.retry.initial_backoff = std::chrono::milliseconds(options.backoff_ms);
  gen.rate_per_second = options.rate_per_second;
  gen.parallelism = options.parallelism;
  gen.cache_only = options.cache_only;

  SynthResult result;
  const auto jobs = synthgen::make_jobs(source.abstracts, options.temperatures, options.n, options.model_name);
  const auto synthetic = synthgen::generate_all(jobs, *client, cache, gen, &result.stats);

  // Abstract items and earlier synthetic output are rebuilt, so rerunning on
  // an output directory does not collide with itself.
  std::unordered_set<std::string> abstract_ids;
  for (const auto& a : source.abstracts) abstract_ids.insert(a.abstract_id);
  std::vector<corpus::LabeledText> human;
  for (const auto& t : source.texts) {
    if (t.label == corpus::Label::human && !abstract_ids.contains(t.item_id)) human.push_back(t);
  }
  const auto training = synthgen::build_training_corpus(source.abstracts, human, synthetic);

  ensure_dir(options.out_dir);
  corpus::write_abstracts(options.out_dir / corpus::kAbstractsFile, source.abstracts);
  corpus::write_texts(options.out_dir / corpus::kTextsFile, training);
  result.synthetic_items = synthetic.size();
  result.training_items = training.size();
  return result;
}

namespace {

std::vector<detector::ScoreRecord> score_items(const detector::BaselineModel& model,
                                               const std::vector<corpus::LabeledText>& items,
                                               const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const corpus::LabeledText*> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);
  std::vector<detector::ScoreRecord> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    out.push_back({id, detector::score(model, by_id.at(id)->text), std::string(detector::kBaselineScorerName)});
  }
  return out;
}

std::unordered_map<std::string, corpus::Label> label_map(const std::vector<corpus::LabeledText>& items) {
  std::unordered_map<std::string, corpus::Label> out;
  for (const auto& item : items) out.emplace(item.item_id, item.label);
  return out;
}

}  // namespace

TrainResult cmd_train(const TrainOptions& options) {
  const corpus::Corpus source = corpus::load_corpus(options.corpus_dir);
  const auto items = corpus::deduplicate(source.texts);
  if (items.empty()) throw ValidationError("train: corpus has no labeled texts");

  auto run = [&](std::uint64_t seed, TrainResult& into) {
    into.split = corpus::make_split(items, source.abstracts, options.policy, seed);
    auto hyper = options.hyperparameters;
    hyper.seed = seed;
    into.model = detector::train_baseline(into.split, items, hyper);
    const auto scores = score_items(into.model, items, into.split.test);
    into.test_metrics = stats::evaluate(scores, label_map(items), options.threshold);
    return scores;
  };

  TrainResult result;
  const auto test_scores = run(options.seed, result);
  if (options.repeats >= 2) {
    result.repeated = stats::repeated_evaluate(
        options.repeats,
        [&](std::uint64_t seed) {
          TrainResult r;
          run(seed, r);
          return r.test_metrics;
        },
        options.seed);
  }

  ensure_dir(options.out_dir);
  result.model_path = options.model_path.value_or(options.out_dir / "model.txt");
  detector::save_model(result.model_path, result.model);
  corpus::write_split(options.out_dir / corpus::kSplitFile, result.split);
  detector::write_scores(options.out_dir / "test_scores.csv", test_scores);
  report::write_text_file(options.out_dir / "metrics.json",
                          result.repeated ? report::to_json(*result.repeated) + "\n"
                                          : report::to_json(result.test_metrics) + "\n");
  report::write_text_file(options.out_dir / "metrics.csv",
                          report::metrics_csv(result.repeated ? *result.repeated : result.test_metrics));
  return result;
}

std::vector<detector::ScoreRecord> cmd_score(const ScoreOptions& options, std::ostream& out) {
  if (options.traces.has_value() == options.corpus_dir.has_value()) {
    throw ValidationError("score: give exactly one of --traces or --corpus");
  }
  const auto model = detector::load_model(options.model_path);
  std::vector<detector::ScoreRecord> records;
  const std::string name(detector::kBaselineScorerName);
  if (options.traces) {
    for (const auto& t : telemetry::load_trace_log(options.traces->string())) {
      records.push_back({t.response_id, detector::score(model, t.final_text), name});
    }
  } else {
    for (const auto& t : corpus::load_corpus(*options.corpus_dir).texts) {
      records.push_back({t.item_id, detector::score(model, t.text), name});
    }
  }
  if (options.out) {
    detector::write_scores(*options.out, records);
  } else {
    detector::write_scores(out, records);
  }
  return records;
}

std::unordered_map<std::string, corpus::Label> load_labels(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open labels file " + file.string());
  std::unordered_map<std::string, corpus::Label> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (line_no == 1 && fields.size() == 2 && fields[0] == "response_id") continue;
    if (fields.size() != 2) throw ParseError(file.string(), line_no, "", "expected response_id,label");
    try {
      labels[fields[0]] = corpus::parse_label(fields[1]);
    } catch (const ValidationError& e) {
      throw ParseError(file.string(), line_no, "label", e.what());
    }
  }
  return labels;
}

report::AuditReport cmd_audit(const AuditOptions& options, std::ostream& out) {
  if (options.scores.has_value() == options.model.has_value()) {
    throw ValidationError("audit: give exactly one score source (--scores or --model)");
  }
  report::AuditInputs inputs;
  inputs.traces = telemetry::load_trace_log(options.traces.string());
  inputs.abstracts = corpus::load_corpus(options.corpus_dir).abstracts;
  if (options.scores) {
    inputs.scores = detector::load_scores(*options.scores);
  } else {
    const auto model = detector::load_model(*options.model);
    for (const auto& t : inputs.traces) {
      inputs.scores.push_back(
          {t.response_id, detector::score(model, t.final_text), std::string(detector::kBaselineScorerName)});
    }
  }
  if (options.labels) inputs.labels = load_labels(*options.labels);

  auto audit = report::run_audit(inputs, options.config);
  report::write_audit_bundle(options.out_dir, audit);
  out << report::summary_text(audit);
  return audit;
}

std::vector<stats::SweepPoint> cmd_sweep(const SweepOptions& options, std::ostream& out) {
  const auto scores = detector::load_scores(options.scores);
  auto sweep = stats::threshold_sweep(scores, options.thresholds);
  const std::string csv = report::sweep_csv(sweep);
  if (options.out) {
    report::write_text_file(*options.out, csv);
  } else {
    out << csv;
  }
  return sweep;
}

corpus::DatasetSplit cmd_split(const SplitCommandOptions& options) {
  const corpus::Corpus source = corpus::load_corpus(options.corpus_dir);
  const auto split = corpus::make_split(corpus::deduplicate(source.texts), source.abstracts, options.policy,
                                        options.seed);
  if (options.out.has_parent_path()) ensure_dir(options.out.parent_path());
  corpus::write_split(options.out, split);
  return split;
}

corpus::Corpus cmd_toy_corpus(const std::filesystem::path& out_dir, std::size_t n_items, std::uint64_t seed) {
  auto toy = make_toy_corpus(n_items, seed);
  ensure_dir(out_dir);
  corpus::write_abstracts(out_dir / corpus::kAbstractsFile, toy.abstracts);
  corpus::write_texts(out_dir / corpus::kTextsFile, toy.texts);
  return toy;
}

}  // namespace crowdaudit::cli
