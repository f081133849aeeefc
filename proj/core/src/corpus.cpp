#include "crowdaudit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "crowdaudit/error.hpp"
#include "crowdaudit/random.hpp"
#include "crowdaudit/text.hpp"
#include "json.hpp"

namespace crowdaudit::corpus {

using nlohmann::json;

std::string_view to_string(Topic topic) {
  switch (topic) {
    case Topic::vaccination: return "vaccination";
    case Topic::breast_cancer: return "breast_cancer";
    case Topic::cardiovascular: return "cardiovascular";
    case Topic::nutrition: return "nutrition";
    case Topic::other: return "other";
  }
  return "other";
}

std::string_view to_string(Label label) { return label == Label::human ? "human" : "synthetic"; }

std::string_view to_string(SplitPolicy policy) {
  return policy == SplitPolicy::summary_level ? "summary_level" : "abstract_level";
}

Topic parse_topic(std::string_view s) {
  for (Topic t : {Topic::vaccination, Topic::breast_cancer, Topic::cardiovascular, Topic::nutrition, Topic::other}) {
    if (s == to_string(t)) return t;
  }
  throw ValidationError("unknown topic '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
  if (s == "human") return Label::human;
  if (s == "synthetic") return Label::synthetic;
  throw ValidationError("unknown label '" + std::string(s) + "'");
}

SplitPolicy parse_policy(std::string_view s) {
  if (s == "summary_level") return SplitPolicy::summary_level;
  if (s == "abstract_level") return SplitPolicy::abstract_level;
  throw ValidationError("unknown split policy '" + std::string(s) + "'");
}

namespace {

json parse_object(std::string_view line, const std::string& file, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(file, line_no, "", std::string("malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(file, line_no, "", "record is not a JSON object");
  return obj;
}

std::string required_string(const json& obj, const char* field, const std::string& file, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) throw ParseError(file, line, field, "missing required field");
  if (!it->is_string()) throw ParseError(file, line, field, "expected a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* field, const std::string& file,
                                           std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(file, line, field, "expected a string");
  return it->get<std::string>();
}

std::string normalized(const std::string& value, const char* field, const std::string& file, std::size_t line) {
  try {
    return text::nfc(value);
  } catch (const ValidationError& e) {
    throw ParseError(file, line, field, e.what());
  }
}

template <typename Parser>
auto read_jsonl(const std::filesystem::path& path, Parser parse) {
  using Record = decltype(parse(std::string_view{}, std::string{}, std::size_t{}));
  std::vector<Record> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string name = path.string();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse(line, name, line_no));
  }
  if (in.bad()) throw IoError("read error on " + name);
  return out;
}

void write_lines(const std::filesystem::path& file, const std::vector<std::string>& lines) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw IoError("write error on " + file.string());
}

}  // namespace

Abstract parse_abstract(std::string_view json_line, const std::string& file, std::size_t line) {
  const json obj = parse_object(json_line, file, line);
  Abstract a;
  a.abstract_id = required_string(obj, "abstract_id", file, line);
  if (a.abstract_id.empty()) throw ParseError(file, line, "abstract_id", "must be non-empty");
  try {
    a.topic = parse_topic(required_string(obj, "topic", file, line));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(file, line, "topic", e.what());
  }
  a.text = normalized(required_string(obj, "text", file, line), "text", file, line);
  if (text::trim(a.text).empty()) throw ParseError(file, line, "text", "must be non-empty");
  a.instruction = normalized(optional_string(obj, "instruction", file, line).value_or(""), "instruction", file, line);
  return a;
}

LabeledText parse_labeled_text(std::string_view json_line, const std::string& file, std::size_t line) {
  const json obj = parse_object(json_line, file, line);
  LabeledText t;
  t.item_id = required_string(obj, "item_id", file, line);
  if (t.item_id.empty()) throw ParseError(file, line, "item_id", "must be non-empty");
  t.text = normalized(required_string(obj, "text", file, line), "text", file, line);
  if (text::trim(t.text).empty()) throw ParseError(file, line, "text", "must be non-empty");
  try {
    t.label = parse_label(required_string(obj, "label", file, line));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(file, line, "label", e.what());
  }
  t.source_abstract_id = optional_string(obj, "source_abstract_id", file, line);
  if (auto it = obj.find("temperature"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError(file, line, "temperature", "expected a number");
    const double temp = it->get<double>();
    if (!(temp >= 0.0 && temp <= 2.0)) throw ParseError(file, line, "temperature", "must lie in [0, 2]");
    t.temperature = temp;
  }
  if (t.label == Label::synthetic && !t.temperature) {
    throw ParseError(file, line, "temperature", "required for synthetic items");
  }
  return t;
}

Corpus load_corpus(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("corpus directory not found: " + dir.string());
  Corpus c;
  c.abstracts = read_jsonl(dir / kAbstractsFile, parse_abstract);
  c.texts = read_jsonl(dir / kTextsFile, parse_labeled_text);

  std::unordered_set<std::string> abstract_ids;
  for (std::size_t i = 0; i < c.abstracts.size(); ++i) {
    if (!abstract_ids.insert(c.abstracts[i].abstract_id).second) {
      throw ParseError((dir / kAbstractsFile).string(), i + 1, "abstract_id",
                       "duplicate abstract_id '" + c.abstracts[i].abstract_id + "'");
    }
  }
  std::vector<std::string> dangling;
  for (const auto& t : c.texts) {
    if (t.source_abstract_id && !abstract_ids.contains(*t.source_abstract_id)) dangling.push_back(t.item_id);
  }
  if (!dangling.empty()) {
    std::string msg = "texts reference unknown abstracts; offending item_ids:";
    for (const auto& id : dangling) msg += " " + id;
    throw ValidationError(msg);
  }
  return c;
}

std::string to_jsonl(const Abstract& a) {
  json obj = {{"abstract_id", a.abstract_id},
              {"topic", std::string(to_string(a.topic))},
              {"text", a.text},
              {"instruction", a.instruction}};
  return obj.dump();
}

std::string to_jsonl(const LabeledText& t) {
  json obj = {{"item_id", t.item_id}, {"text", t.text}, {"label", std::string(to_string(t.label))}};
  if (t.source_abstract_id) obj["source_abstract_id"] = *t.source_abstract_id;
  if (t.temperature) obj["temperature"] = *t.temperature;
  return obj.dump();
}

void write_abstracts(const std::filesystem::path& file, const std::vector<Abstract>& abstracts) {
  std::vector<std::string> lines;
  for (const auto& a : abstracts) lines.push_back(to_jsonl(a));
  write_lines(file, lines);
}

void write_texts(const std::filesystem::path& file, const std::vector<LabeledText>& texts) {
  std::vector<std::string> lines;
  for (const auto& t : texts) lines.push_back(to_jsonl(t));
  write_lines(file, lines);
}

std::vector<LabeledText> deduplicate(const std::vector<LabeledText>& items) {
  std::unordered_set<std::string> seen;
  std::vector<LabeledText> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    if (seen.insert(text::trim(item.text)).second) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> apportion(std::size_t total, const std::vector<double>& fractions) {
  const double sum = std::accumulate(fractions.begin(), fractions.end(), 0.0);
  if (fractions.empty() || !(sum > 0.0)) throw ValidationError("apportion: fractions must have a positive sum");
  std::vector<std::size_t> counts(fractions.size());
  std::vector<double> remainders(fractions.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    if (fractions[i] < 0.0) throw ValidationError("apportion: negative fraction");
    const double quota = static_cast<double>(total) * fractions[i] / sum;
    // Guard against 0.75 * 448 landing at 335.99999.
    const double floored = std::floor(quota + 1e-9);
    counts[i] = static_cast<std::size_t>(floored);
    remainders[i] = std::max(0.0, quota - floored);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(fractions.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b] + 1e-12; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k % order.size()]];
  return counts;
}

namespace {

void check_unique_ids(const std::vector<LabeledText>& items) {
  std::unordered_set<std::string> ids;
  std::vector<std::string> dupes;
  for (const auto& item : items) {
    if (!ids.insert(item.item_id).second) dupes.push_back(item.item_id);
  }
  if (!dupes.empty()) {
    std::string msg = "duplicate item_ids:";
    for (const auto& id : dupes) msg += " " + id;
    throw ValidationError(msg);
  }
}

// Emits ids of `items` (input order) whose index is in `chosen`.
std::vector<std::string> select(const std::vector<LabeledText>& items, const std::vector<std::size_t>& indices) {
  std::vector<std::size_t> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> out;
  out.reserve(sorted.size());
  for (std::size_t i : sorted) out.push_back(items[i].item_id);
  return out;
}

}  // namespace

DatasetSplit make_split(const std::vector<LabeledText>& items, const std::vector<Abstract>& abstracts,
                        SplitPolicy policy, std::uint64_t seed, const SplitOptions& options) {
  if (items.empty()) throw ValidationError("make_split: empty item list");
  check_unique_ids(items);

  DatasetSplit split;
  split.policy = policy;
  split.seed = seed;
  Rng rng(seed);

  if (policy == SplitPolicy::summary_level) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(std::span(order), rng);
    const auto counts = apportion(items.size(), {options.train_fraction, options.validation_fraction,
                                                 options.test_fraction});
    auto first = order.begin();
    split.train = select(items, {first, first + counts[0]});
    split.validation = select(items, {first + counts[0], first + counts[0] + counts[1]});
    split.test = select(items, {first + counts[0] + counts[1], order.end()});
    return split;
  }

  // abstract_level
  std::unordered_map<std::string, std::size_t> abstract_rank;
  for (const auto& a : abstracts) abstract_rank.emplace(a.abstract_id, abstract_rank.size());
  std::vector<std::string> missing;
  std::set<std::size_t> used;
  for (const auto& item : items) {
    if (!item.source_abstract_id) {
      missing.push_back(item.item_id);
      continue;
    }
    auto it = abstract_rank.find(*item.source_abstract_id);
    if (it == abstract_rank.end()) {
      missing.push_back(item.item_id);
      continue;
    }
    used.insert(it->second);
  }
  if (!missing.empty()) {
    std::string msg = "abstract_level split needs a known source_abstract_id on every item; offending:";
    for (const auto& id : missing) msg += " " + id;
    throw ValidationError(msg);
  }
  if (used.size() < 2) {
    throw ValidationError("abstract_level split needs at least 2 abstracts, got " + std::to_string(used.size()));
  }

  std::vector<std::size_t> abstract_order(used.begin(), used.end());
  shuffle(std::span(abstract_order), rng);
  const std::size_t n_test = std::max<std::size_t>(1, abstract_order.size() / 4);
  const std::set<std::size_t> test_abstracts(abstract_order.begin(), abstract_order.begin() + n_test);

  std::vector<std::size_t> test_idx;
  std::vector<std::size_t> trainval_idx;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const std::size_t rank = abstract_rank.at(*items[i].source_abstract_id);
    (test_abstracts.contains(rank) ? test_idx : trainval_idx).push_back(i);
  }
  shuffle(std::span(trainval_idx), rng);
  std::size_t n_val = static_cast<std::size_t>(
      std::llround(options.abstract_level_validation_fraction * static_cast<double>(trainval_idx.size())));
  if (n_val == 0 && trainval_idx.size() >= 2) n_val = 1;
  split.validation = select(items, {trainval_idx.begin(), trainval_idx.begin() + n_val});
  split.train = select(items, {trainval_idx.begin() + n_val, trainval_idx.end()});
  split.test = select(items, test_idx);
  return split;
}

std::string split_to_json(const DatasetSplit& split) {
  json obj = {{"policy", std::string(to_string(split.policy))},
              {"seed", split.seed},
              {"train", split.train},
              {"validation", split.validation},
              {"test", split.test}};
  return obj.dump(2);
}

DatasetSplit split_from_json(std::string_view text) {
  json obj;
  try {
    obj = json::parse(text);
    DatasetSplit split;
    split.policy = parse_policy(obj.at("policy").get<std::string>());
    split.seed = obj.at("seed").get<std::uint64_t>();
    split.train = obj.at("train").get<std::vector<std::string>>();
    split.validation = obj.at("validation").get<std::vector<std::string>>();
    split.test = obj.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed split file: ") + e.what());
  }
}

void write_split(const std::filesystem::path& file, const DatasetSplit& split) {
  write_lines(file, {split_to_json(split)});
}

DatasetSplit read_split(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open " + file.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return split_from_json(buf.str());
}

}  // namespace crowdaudit::corpus
