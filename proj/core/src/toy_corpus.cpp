#include "crowdaudit/toy_corpus.hpp"

#include <array>
#include <string_view>

#include "crowdaudit/random.hpp"

namespace crowdaudit {
namespace {

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& options, Rng& rng) {
  return options[uniform_below(rng, N)];
}

constexpr std::array<std::string_view, 8> kExposure = {
    "the new vaccine", "daily aspirin", "a low salt diet", "hormone therapy",
    "statin use",      "screening mammograms", "a mediterranean diet", "regular exercise"};
constexpr std::array<std::string_view, 8> kOutcome = {
    "heart attacks", "breast cancer deaths", "stroke", "hospital stays",
    "blood pressure", "infection rates", "weight gain", "kidney problems"};
constexpr std::array<std::string_view, 6> kPopulation = {
    "older adults", "children under five", "pregnant women", "nurses", "veterans", "people with diabetes"};

constexpr std::array<std::string_view, 6> kHumanOpen = {
    "so basically they tested", "ok this paper looked at", "they checked if", "researchers wanted to see if",
    "main point is", "study was about whether"};
constexpr std::array<std::string_view, 6> kHumanClose = {
    "not sure how big the effect really is tho", "pretty small study imo", "they said more research needed",
    "kinda what you'd expect", "numbers were a bit confusing to me", "seems legit but idk"};

constexpr std::array<std::string_view, 6> kSynthOpen = {
    "This study investigates the impact of", "The research examines the effect of",
    "This randomized trial evaluates whether", "The authors assess the association between",
    "This comprehensive analysis explores how", "The present study explores the role of"};
constexpr std::array<std::string_view, 6> kSynthClose = {
    "Overall, these findings highlight the importance of evidence-based prevention strategies.",
    "Furthermore, the results underscore the need for further research in diverse populations.",
    "In conclusion, the study provides valuable insights for clinical practice and public health.",
    "These results suggest that targeted interventions may significantly improve patient outcomes.",
    "Ultimately, the findings emphasize the crucial role of early intervention.",
    "Collectively, the evidence supports a comprehensive approach to disease prevention."};

}  // namespace

corpus::Corpus make_toy_corpus(std::size_t n_items, std::uint64_t seed, std::size_t n_abstracts) {
  Rng rng(seed);
  corpus::Corpus c;
  for (std::size_t a = 0; a < n_abstracts; ++a) {
    const std::string id = "toy-abs-" + std::to_string(a + 1);
    c.abstracts.push_back({id, corpus::Topic::other,
                           "Placeholder abstract " + std::to_string(a + 1) + " for the toy detection corpus.",
                           "Summarize the abstract in about 100 words."});
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    const bool synthetic = i % 2 == 1;
    const std::string exposure(pick(kExposure, rng));
    const std::string outcome(pick(kOutcome, rng));
    const std::string population(pick(kPopulation, rng));
    std::string text;
    if (synthetic) {
      text = std::string(pick(kSynthOpen, rng)) + " " + exposure + " on " + outcome + " among " + population +
             ". The findings demonstrate a significant reduction in " + outcome + " compared with standard care. " +
             std::string(pick(kSynthClose, rng));
    } else {
      const auto n = 40 + uniform_below(rng, 900);
      text = std::string(pick(kHumanOpen, rng)) + " " + exposure + " helps with " + outcome + " in " + population +
             ", they had like " + std::to_string(n) + " people. " + std::string(pick(kHumanClose, rng));
    }
    corpus::LabeledText item;
    item.item_id = "toy-" + std::to_string(i + 1);
    item.text = std::move(text);
    item.label = synthetic ? corpus::Label::synthetic : corpus::Label::human;
    item.source_abstract_id = c.abstracts[i % n_abstracts].abstract_id;
    if (synthetic) item.temperature = (i / 2) % 2 == 0 ? 0.7 : 1.0;
    c.texts.push_back(std::move(item));
  }
  return c;
}

}  // namespace crowdaudit
