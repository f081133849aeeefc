#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdaudit::corpus {

enum class Topic { vaccination, breast_cancer, cardiovascular, nutrition, other };
enum class Label { human, synthetic };
enum class SplitPolicy { summary_level, abstract_level };

std::string_view to_string(Topic topic);
std::string_view to_string(Label label);
std::string_view to_string(SplitPolicy policy);
Topic parse_topic(std::string_view s);
Label parse_label(std::string_view s);
SplitPolicy parse_policy(std::string_view s);

// A source abstract shown to workers together with the summarization instruction.
struct Abstract {
  std::string abstract_id;
  Topic topic = Topic::other;
  std::string text;
  std::string instruction;

  bool operator==(const Abstract&) const = default;
};

// A text with a known origin. Synthetic items always carry the sampling temperature.
struct LabeledText {
  std::string item_id;
  std::string text;
  Label label = Label::human;
  std::optional<std::string> source_abstract_id;
  std::optional<double> temperature;

  bool operator==(const LabeledText&) const = default;
};

struct DatasetSplit {
  SplitPolicy policy = SplitPolicy::summary_level;
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit&) const = default;
};

struct Corpus {
  std::vector<Abstract> abstracts;
  std::vector<LabeledText> texts;
};

inline constexpr std::string_view kAbstractsFile = "abstracts.jsonl";
inline constexpr std::string_view kTextsFile = "texts.jsonl";
inline constexpr std::string_view kSplitFile = "split.json";

/// Loads `abstracts.jsonl` and `texts.jsonl` from a corpus directory. Missing
/// files are treated as empty. Texts are NFC-normalized.
///
/// Throws ParseError for a malformed record (file, line, field) and
/// ValidationError when a text references an abstract that was not loaded.
Corpus load_corpus(const std::filesystem::path& dir);

// Single-record parsers, exposed for the CLI and tests. `file`/`line` only feed error messages.
Abstract parse_abstract(std::string_view json_line, const std::string& file, std::size_t line);
LabeledText parse_labeled_text(std::string_view json_line, const std::string& file, std::size_t line);

std::string to_jsonl(const Abstract& abstract);
std::string to_jsonl(const LabeledText& item);
void write_abstracts(const std::filesystem::path& file, const std::vector<Abstract>& abstracts);
void write_texts(const std::filesystem::path& file, const std::vector<LabeledText>& texts);

// Removes exact duplicates after trimming surrounding whitespace; first occurrence wins.
std::vector<LabeledText> deduplicate(const std::vector<LabeledText>& items);

struct SplitOptions {
  // Summary-level fractions; counts are rounded by largest remainder.
  double train_fraction = 0.75;
  double validation_fraction = 0.10;
  double test_fraction = 0.15;
  // Abstract-level: share of train+validation items held out for validation.
  double abstract_level_validation_fraction = 0.10;
};

/// Partitions items into train/validation/test.
///
/// summary_level shuffles all items and cuts them at 75/10/15. abstract_level
/// sends floor(A/4) abstracts (at least one) to test and everything else to
/// train+validation, then carves a seeded validation share out of the latter.
/// Deterministic in (items, abstracts, policy, seed).
DatasetSplit make_split(const std::vector<LabeledText>& items, const std::vector<Abstract>& abstracts,
                        SplitPolicy policy, std::uint64_t seed, const SplitOptions& options = {});

// Largest-remainder apportionment of `total` by `fractions`; ties go to the earlier bucket.
std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& fractions);

std::string split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(std::string_view json);
void write_split(const std::filesystem::path& file, const DatasetSplit& split);
DatasetSplit read_split(const std::filesystem::path& file);

}  // namespace crowdaudit::corpus
