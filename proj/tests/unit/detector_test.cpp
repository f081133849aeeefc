#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "crowdaudit/detector.hpp"
#include "crowdaudit/error.hpp"
#include "crowdaudit/random.hpp"
#include "crowdaudit/toy_corpus.hpp"
#include "temp_dir.hpp"

using namespace crowdaudit::detector;
using crowdaudit::ParseError;
using crowdaudit::ValidationError;
namespace corpus = crowdaudit::corpus;

TEST(Murmur3, ReferenceVectors) {
  // Values from the reference implementation (x86_32).
  EXPECT_EQ(murmur3_32("", 0), 0u);
  EXPECT_EQ(murmur3_32("a", 0), 1009084850u);
  EXPECT_EQ(murmur3_32("abc", 0), 3017643002u);
  EXPECT_EQ(murmur3_32("hello world", 0), 1586663183u);
  EXPECT_EQ(murmur3_32("", kHashSeed), 3710503435u);
  EXPECT_EQ(murmur3_32("crowd", kHashSeed), 2355177743u);
  EXPECT_EQ(murmur3_32("\xC3\xBCn\xC3\xAF", kHashSeed), 2496594067u);
}

TEST(Featurize, RepeatedCharacterGivesTwoBuckets) {
  const auto f = featurize("aaaa");
  ASSERT_EQ(f.entries.size(), 2u);
  EXPECT_NEAR(f.norm(), 1.0, 1e-12);
  // "aaa" occurs twice, "aaaa" once.
  const double w_aaa = f.entries[0].first == ngram_bucket("aaa") ? f.entries[0].second : f.entries[1].second;
  EXPECT_NEAR(w_aaa, 2.0 / std::sqrt(5.0), 1e-12);
}

TEST(Featurize, ShortTextIsEmpty) {
  EXPECT_TRUE(featurize("").entries.empty());
  EXPECT_TRUE(featurize("ab").entries.empty());
}

TEST(Featurize, CaseAndNormalizationInsensitive) {
  EXPECT_EQ(featurize("Caf\xC3\xA9 Study"), featurize("cafe\xCC\x81 study"));
}

TEST(Featurize, EntriesSortedAndUnit) {
  const auto f = featurize("The randomized trial enrolled 4,000 adults across twelve sites.");
  EXPECT_TRUE(std::is_sorted(f.entries.begin(), f.entries.end()));
  EXPECT_NEAR(f.norm(), 1.0, 1e-12);
  for (const auto& [idx, w] : f.entries) EXPECT_LT(idx, kFeatureDim);
}

TEST(Gradient, AnalyticMatchesCentralDifferences) {
  const auto toy = crowdaudit::make_toy_corpus(24, 3);
  std::vector<Example> batch;
  for (const auto& t : toy.texts) batch.push_back({featurize(t.text), t.label == corpus::Label::synthetic ? 1.0 : 0.0});
  crowdaudit::Rng rng(17);
  std::vector<double> w(kFeatureDim, 0.0);
  for (const auto& ex : batch)
    for (const auto& [idx, v] : ex.features.entries) w[idx] = (static_cast<double>(rng() % 2001) - 1000.0) / 1000.0;
  const double bias = 0.3;
  const double l2 = 0.05;
  const auto analytic = regularized_loss(w, bias, batch, l2);

  std::vector<std::uint32_t> coords;
  for (std::size_t k = 0; k < 40; ++k) {
    const auto& entries = batch[k % batch.size()].features.entries;
    coords.push_back(entries[(7 * k) % entries.size()].first);
  }
  coords.push_back(7);  // untouched coordinate: gradient is l2 * w = 0
  const double h = 1e-5;
  auto rel_error = [](double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); };
  for (auto c : coords) {
    auto wp = w, wm = w;
    wp[c] += h;
    wm[c] -= h;
    const double numeric =
        (regularized_loss(wp, bias, batch, l2).loss - regularized_loss(wm, bias, batch, l2).loss) / (2 * h);
    EXPECT_LE(rel_error(analytic.weight_gradient[c], numeric), 1e-5) << "coordinate " << c;
  }
  const double numeric_bias =
      (regularized_loss(w, bias + h, batch, l2).loss - regularized_loss(w, bias - h, batch, l2).loss) / (2 * h);
  EXPECT_LE(rel_error(analytic.bias_gradient, numeric_bias), 1e-5);
}

namespace {

struct Trained {
  corpus::Corpus toy;
  corpus::DatasetSplit split;
  BaselineModel model;
};

const Trained& toy_model() {
  static const Trained t = [] {
    Trained out;
    out.toy = crowdaudit::make_toy_corpus();
    out.split = corpus::make_split(out.toy.texts, out.toy.abstracts, corpus::SplitPolicy::summary_level, 2);
    out.model = train_baseline(out.split, out.toy.texts);
    return out;
  }();
  return t;
}

}  // namespace

TEST(Train, SeparatesToyFamilies) {
  const auto& t = toy_model();
  std::map<std::string, const corpus::LabeledText*> by_id;
  for (const auto& it : t.toy.texts) by_id[it.item_id] = &it;
  std::size_t correct = 0;
  for (const auto& id : t.split.test) {
    const auto* it = by_id.at(id);
    correct += classify(score(t.model, it->text), 0.0) == it->label;
  }
  EXPECT_GE(static_cast<double>(correct) / t.split.test.size(), 0.95);
  EXPECT_EQ(t.model.training_report.size(), 20u);
  EXPECT_GE(t.model.best_epoch, 1);
}

TEST(Train, TrainingLossDecreases) {
  const auto& report = toy_model().model.training_report;
  EXPECT_LT(report.back().train_loss, report.front().train_loss);
}

TEST(Train, DeterministicForSeed) {
  const auto& t = toy_model();
  EXPECT_EQ(train_baseline(t.split, t.toy.texts), t.model);
}

TEST(Train, Preconditions) {
  const auto& t = toy_model();
  auto no_val = t.split;
  no_val.validation.clear();
  EXPECT_THROW(train_baseline(no_val, t.toy.texts), ValidationError);
  auto unknown = t.split;
  unknown.train.push_back("ghost");
  EXPECT_THROW(train_baseline(unknown, t.toy.texts), ValidationError);
  std::vector<corpus::LabeledText> humans;
  for (auto it : t.toy.texts) {
    it.label = corpus::Label::human;
    it.temperature.reset();
    humans.push_back(it);
  }
  EXPECT_THROW(train_baseline(t.split, humans), ValidationError);
}

TEST(ModelIo, RoundTripIsExactAndBytesStable) {
  const auto& m = toy_model().model;
  std::ostringstream a;
  write_model(a, m);
  std::istringstream in(a.str());
  const auto back = read_model(in);
  EXPECT_EQ(back, m);
  std::ostringstream b;
  write_model(b, back);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(score(back, "some text to score"), score(m, "some text to score"));
}

TEST(ModelIo, RejectsForeignFiles) {
  std::istringstream bad("not a model\n");
  EXPECT_THROW(read_model(bad), ParseError);
  EXPECT_THROW(load_model("/nonexistent/model.txt"), crowdaudit::IoError);
}

TEST(Scores, CsvRoundTrip) {
  const std::vector<ScoreRecord> records = {{"r1", 4.0, "x"}, {"r2", -0.1234567890123, "x"}, {"r,3", 1e-300, "y"}};
  std::ostringstream out;
  write_scores(out, records);
  EXPECT_EQ(out.str().substr(0, kScoreHeader.size()), kScoreHeader);
  std::istringstream in(out.str());
  EXPECT_EQ(read_scores(in), records);
}

TEST(Scores, CsvErrors) {
  auto read = [](const std::string& s) {
    std::istringstream in(s);
    return read_scores(in, "s.csv");
  };
  EXPECT_THROW(read("id,logit,scorer\n"), ParseError);
  EXPECT_THROW(read("response_id,logit,scorer_name\nr1,abc,x\n"), ParseError);
  EXPECT_THROW(read("response_id,logit,scorer_name\nr1,nan,x\n"), ParseError);
  EXPECT_THROW(read("response_id,logit,scorer_name\nr1,1\n"), ParseError);
  EXPECT_THROW(read("response_id,logit,scorer_name\nr1,1,x\nr1,2,x\n"), ParseError);
  try {
    read("response_id,logit,scorer_name\nr1,1,x\nr2,inf,x\n");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::ostringstream out;
  EXPECT_THROW(write_scores(out, {{"r", std::nan(""), "x"}}), ValidationError);
}
