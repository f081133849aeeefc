#include <gtest/gtest.h>

#include <sstream>

#include "crowdaudit/error.hpp"
#include "crowdaudit/overlap.hpp"
#include "crowdaudit/random.hpp"
#include "crowdaudit/text.hpp"
#include "lcs_oracle.hpp"

namespace ov = crowdaudit::overlap;
using crowdaudit::testing::lcs_dp;

TEST(Lcs, BananaAnanas) {
  const auto m = ov::longest_common_substring(std::string_view("banana"), std::string_view("ananas"));
  EXPECT_EQ(m.length, 5u);
  EXPECT_EQ(m.text, "anana");
}

TEST(Lcs, EmptyInputs) {
  EXPECT_EQ(ov::longest_common_substring(std::string_view(""), std::string_view("abc")).length, 0u);
  EXPECT_EQ(ov::longest_common_substring(std::string_view("abc"), std::string_view("")).length, 0u);
  EXPECT_EQ(ov::longest_common_substring(std::string_view("abc"), std::string_view("xyz")).text, "");
}

TEST(Lcs, TieGoesToEarliestStartInFirstArgument) {
  // "ab" and "cd" both length 2; "cd" comes first in a.
  const auto m = ov::longest_common_substring(std::string_view("xcdyab"), std::string_view("ab-cd"));
  EXPECT_EQ(m.length, 2u);
  EXPECT_EQ(m.text, "cd");
}

TEST(Lcs, CountsCodePointsNotBytes) {
  const auto m = ov::longest_common_substring(std::string_view("caf\xC3\xA9 noir"), std::string_view("un caf\xC3\xA9"));
  EXPECT_EQ(m.length, 4u);
  EXPECT_EQ(m.text, "caf\xC3\xA9");
}

TEST(Lcs, MatchesDynamicProgrammingOracle) {
  crowdaudit::Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t alphabet = trial % 2 ? 26 : 4;
    auto random_text = [&] {
      std::u32string s(crowdaudit::uniform_below(rng, 120), U'a');
      for (auto& c : s) c = U'a' + static_cast<char32_t>(crowdaudit::uniform_below(rng, alphabet));
      return s;
    };
    const auto a = random_text();
    const auto b = random_text();
    const auto got = ov::longest_common_substring(a, b);
    const auto want = lcs_dp(a, b);
    ASSERT_EQ(got.length, want.length);
    EXPECT_EQ(got.text, crowdaudit::text::to_utf8(a.substr(want.start_in_a, want.length)));
  }
}

TEST(Lcs, IsSymmetricInLength) {
  crowdaudit::Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::u32string a(crowdaudit::uniform_below(rng, 60), U'a'), b(crowdaudit::uniform_below(rng, 60), U'a');
    for (auto& c : a) c = U'a' + static_cast<char32_t>(crowdaudit::uniform_below(rng, 3));
    for (auto& c : b) c = U'a' + static_cast<char32_t>(crowdaudit::uniform_below(rng, 3));
    EXPECT_EQ(ov::longest_common_substring(a, b).length, ov::longest_common_substring(b, a).length);
  }
}

TEST(Overlap, RatioExample) {
  EXPECT_DOUBLE_EQ(ov::overlap_ratio("xxcdefxx", "abcdefghij"), 0.4);
}

TEST(Overlap, IdenticalTextsHaveRatioOne) {
  const std::string abstract = "Whether the vaccine reduces infection remains uncertain.";
  EXPECT_DOUBLE_EQ(ov::overlap_ratio(abstract, abstract), 1.0);
}

TEST(Overlap, EmptyAbstractIsAnError) {
  EXPECT_THROW(ov::overlap_ratio("anything", ""), crowdaudit::ValidationError);
  EXPECT_THROW(ov::overlap_ratio("anything", " \n "), crowdaudit::ValidationError);
}

TEST(Overlap, NormalizationCollapsesWhitespaceAndComposes) {
  const std::string summary = "the  trial\nwas cafe\xCC\x81 based";
  const std::string abstract = "the trial was caf\xC3\xA9 based";
  EXPECT_DOUBLE_EQ(ov::overlap_ratio(summary, abstract), 1.0);
  ov::OverlapOptions raw;
  raw.normalize = false;
  EXPECT_LT(ov::overlap_ratio(summary, abstract, raw), 1.0);
}

TEST(Overlap, RatioBoundedByShorterText) {
  crowdaudit::Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    std::string s(1 + crowdaudit::uniform_below(rng, 40), 'a'), a(1 + crowdaudit::uniform_below(rng, 40), 'a');
    for (auto& c : s) c = static_cast<char>('a' + crowdaudit::uniform_below(rng, 3));
    for (auto& c : a) c = static_cast<char>('a' + crowdaudit::uniform_below(rng, 3));
    const auto r = ov::compute_overlap("s", s, "a", a);
    EXPECT_GE(r.ratio, 0.0);
    EXPECT_LE(r.ratio, 1.0);
    EXPECT_LE(r.lcs_length, std::min(s.size(), a.size()));
    EXPECT_EQ(r.abstract_length, a.size());
  }
}

TEST(Overlap, LowOverlapIsStrict) {
  ov::OverlapResult r;
  r.ratio = 0.10;
  EXPECT_FALSE(ov::low_overlap(r));
  r.ratio = 0.0999;
  EXPECT_TRUE(ov::low_overlap(r));
}

TEST(Overlap, CsvHasOneRowPerResult) {
  std::ostringstream out;
  ov::write_overlap_csv(out, {ov::compute_overlap("s1", "xxcdefxx", "a1", "abcdefghij")});
  EXPECT_EQ(out.str(), "summary_id,abstract_id,lcs_length,abstract_length,ratio\ns1,a1,4,10,0.4\n");
}
