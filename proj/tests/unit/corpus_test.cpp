#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "crowdaudit/corpus.hpp"
#include "crowdaudit/error.hpp"
#include "temp_dir.hpp"

using namespace crowdaudit::corpus;
using crowdaudit::ParseError;
using crowdaudit::ValidationError;
using crowdaudit::testing::spit;
using crowdaudit::testing::TempDir;

namespace {

LabeledText item(std::string id, std::string text, std::optional<std::string> source = std::nullopt) {
  LabeledText t;
  t.item_id = std::move(id);
  t.text = std::move(text);
  t.source_abstract_id = std::move(source);
  return t;
}

std::vector<LabeledText> numbered_items(std::size_t n, std::size_t n_abstracts = 0) {
  std::vector<LabeledText> items;
  for (std::size_t i = 0; i < n; ++i) {
    auto t = item("it" + std::to_string(i), "text " + std::to_string(i));
    if (n_abstracts) t.source_abstract_id = "abs" + std::to_string(i % n_abstracts);
    t.label = i % 2 ? Label::synthetic : Label::human;
    if (t.label == Label::synthetic) t.temperature = 1.0;
    items.push_back(std::move(t));
  }
  return items;
}

std::vector<Abstract> numbered_abstracts(std::size_t n) {
  std::vector<Abstract> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({"abs" + std::to_string(i), Topic::nutrition, "abstract", "sum"});
  return out;
}

}  // namespace

TEST(Corpus, LoadNormalizesAndParses) {
  TempDir dir;
  spit(dir / "abstracts.jsonl",
       R"({"abstract_id": "a1", "topic": "vaccination", "text": "café", "instruction": "Summarize."})" "\n");
  spit(dir / "texts.jsonl",
       R"({"item_id": "s1", "text": "x", "label": "synthetic", "source_abstract_id": "a1", "temperature": 0.7})" "\n\n"
       R"({"item_id": "h1", "text": "y", "label": "human"})" "\n");
  const auto c = load_corpus(dir.path());
  ASSERT_EQ(c.abstracts.size(), 1u);
  EXPECT_EQ(c.abstracts[0].text, "caf\xC3\xA9");
  EXPECT_EQ(c.abstracts[0].topic, Topic::vaccination);
  ASSERT_EQ(c.texts.size(), 2u);
  EXPECT_EQ(c.texts[0].temperature, 0.7);
  EXPECT_FALSE(c.texts[1].source_abstract_id);
}

TEST(Corpus, MissingFilesAreEmpty) {
  TempDir dir;
  const auto c = load_corpus(dir.path());
  EXPECT_TRUE(c.abstracts.empty());
  EXPECT_TRUE(c.texts.empty());
}

TEST(Corpus, MalformedRecordReportsFileLineAndField) {
  TempDir dir;
  spit(dir / "texts.jsonl", R"({"item_id": "h1", "text": "y", "label": "human"})" "\n"
                            R"({"item_id": "s1", "text": "x", "label": "synthetic"})" "\n");
  try {
    load_corpus(dir.path());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.field(), "temperature");
    EXPECT_NE(std::string(e.what()).find("texts.jsonl:2"), std::string::npos);
  }
}

TEST(Corpus, RejectsBadJsonAndOutOfRangeTemperature) {
  EXPECT_THROW(parse_labeled_text("{not json", "f", 1), ParseError);
  EXPECT_THROW(parse_labeled_text(R"({"item_id": "s", "text": "x", "label": "synthetic", "temperature": 2.5})", "f", 1),
               ParseError);
  EXPECT_THROW(parse_labeled_text(R"({"item_id": "s", "text": "x", "label": "robot"})", "f", 1), ParseError);
  EXPECT_THROW(parse_abstract(R"({"abstract_id": "a", "topic": "vaccination"})", "f", 1), ParseError);
}

TEST(Corpus, DanglingReferenceListsItems) {
  TempDir dir;
  spit(dir / "texts.jsonl", R"({"item_id": "h9", "text": "y", "label": "human", "source_abstract_id": "nope"})" "\n");
  try {
    load_corpus(dir.path());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("h9"), std::string::npos);
  }
}

TEST(Corpus, JsonlRoundTrip) {
  TempDir dir;
  auto items = numbered_items(5, 2);
  auto abstracts = numbered_abstracts(2);
  write_abstracts(dir / "abstracts.jsonl", abstracts);
  write_texts(dir / "texts.jsonl", items);
  const auto c = load_corpus(dir.path());
  EXPECT_EQ(c.abstracts, abstracts);
  EXPECT_EQ(c.texts, items);
}

TEST(Dedup, TrimmedDuplicatesCollapseToFirst) {
  const auto out = deduplicate({item("1", "a "), item("2", "a"), item("3", "b")});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].text, "a ");
  EXPECT_EQ(out[1].text, "b");
}

TEST(Dedup, ResultHasUniqueTrimmedTexts) {
  std::vector<LabeledText> items;
  for (int i = 0; i < 200; ++i) items.push_back(item(std::to_string(i), std::string(i % 7, ' ') + std::to_string(i % 13)));
  const auto out = deduplicate(items);
  EXPECT_EQ(out.size(), 13u);
  EXPECT_EQ(deduplicate(out).size(), out.size());
}

TEST(Apportion, LargestRemainder) {
  EXPECT_EQ(apportion(448, {0.75, 0.10, 0.15}), (std::vector<std::size_t>{336, 45, 67}));
  EXPECT_EQ(apportion(200, {0.75, 0.10, 0.15}), (std::vector<std::size_t>{150, 20, 30}));
  EXPECT_EQ(apportion(1, {0.75, 0.10, 0.15}), (std::vector<std::size_t>{1, 0, 0}));
  EXPECT_EQ(apportion(0, {0.75, 0.10, 0.15}), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(Split, SummaryLevelCounts) {
  const auto s = make_split(numbered_items(448), {}, SplitPolicy::summary_level, 1);
  EXPECT_EQ(s.train.size(), 336u);
  EXPECT_EQ(s.validation.size(), 45u);
  EXPECT_EQ(s.test.size(), 67u);
}

TEST(Split, IsDeterministicAndSeedSensitive) {
  const auto items = numbered_items(100);
  EXPECT_EQ(make_split(items, {}, SplitPolicy::summary_level, 4), make_split(items, {}, SplitPolicy::summary_level, 4));
  EXPECT_NE(make_split(items, {}, SplitPolicy::summary_level, 4).test,
            make_split(items, {}, SplitPolicy::summary_level, 5).test);
}

TEST(Split, AbstractLevelHoldsOutWholeAbstracts) {
  const auto items = numbered_items(120, 8);
  const auto abstracts = numbered_abstracts(8);
  const auto s = make_split(items, abstracts, SplitPolicy::abstract_level, 3);
  std::map<std::string, std::string> source;
  for (const auto& it : items) source[it.item_id] = *it.source_abstract_id;
  std::set<std::string> test_abs, other_abs;
  for (const auto& id : s.test) test_abs.insert(source[id]);
  for (const auto& id : s.train) other_abs.insert(source[id]);
  for (const auto& id : s.validation) other_abs.insert(source[id]);
  EXPECT_EQ(test_abs.size(), 2u);
  for (const auto& a : test_abs) EXPECT_FALSE(other_abs.contains(a));
  EXPECT_EQ(s.train.size() + s.validation.size() + s.test.size(), items.size());
}

TEST(Split, AbstractLevelNeedsTwoAbstracts) {
  EXPECT_THROW(make_split(numbered_items(10, 1), numbered_abstracts(1), SplitPolicy::abstract_level, 0),
               ValidationError);
  EXPECT_THROW(make_split(numbered_items(10), numbered_abstracts(3), SplitPolicy::abstract_level, 0), ValidationError);
}

TEST(Split, RejectsEmptyAndDuplicateIds) {
  EXPECT_THROW(make_split({}, {}, SplitPolicy::summary_level, 0), ValidationError);
  EXPECT_THROW(make_split({item("x", "a"), item("x", "b")}, {}, SplitPolicy::summary_level, 0), ValidationError);
}

TEST(Split, JsonRoundTrip) {
  TempDir dir;
  const auto s = make_split(numbered_items(40, 4), numbered_abstracts(4), SplitPolicy::abstract_level, 77);
  write_split(dir / "split.json", s);
  EXPECT_EQ(read_split(dir / "split.json"), s);
  EXPECT_EQ(split_from_json(split_to_json(s)), s);
  EXPECT_THROW(split_from_json(R"({"policy": "odd"})"), ValidationError);
}
