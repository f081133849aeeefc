#include <benchmark/benchmark.h>

#include "crowdaudit/detector.hpp"
#include "crowdaudit/overlap.hpp"
#include "crowdaudit/random.hpp"
#include "crowdaudit/stats.hpp"
#include "crowdaudit/toy_corpus.hpp"
#include "lcs_oracle.hpp"

namespace {

std::u32string random_text(crowdaudit::Rng& rng, std::size_t n, std::uint64_t alphabet) {
  std::u32string s(n, U'a');
  for (auto& c : s) c = U'a' + static_cast<char32_t>(crowdaudit::uniform_below(rng, alphabet));
  return s;
}

void BM_LcsSuffixAutomaton(benchmark::State& state) {
  crowdaudit::Rng rng(1);
  const auto a = random_text(rng, static_cast<std::size_t>(state.range(0)) / 2, 26);
  const auto b = random_text(rng, static_cast<std::size_t>(state.range(0)), 26);
  for (auto _ : state) benchmark::DoNotOptimize(crowdaudit::overlap::longest_common_substring(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsSuffixAutomaton)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_LcsDynamicProgramming(benchmark::State& state) {
  crowdaudit::Rng rng(1);
  const auto a = random_text(rng, static_cast<std::size_t>(state.range(0)) / 2, 26);
  const auto b = random_text(rng, static_cast<std::size_t>(state.range(0)), 26);
  for (auto _ : state) benchmark::DoNotOptimize(crowdaudit::testing::lcs_dp(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_LcsDynamicProgramming)->RangeMultiplier(4)->Range(256, 4096)->Complexity();

void BM_Featurize(benchmark::State& state) {
  const auto toy = crowdaudit::make_toy_corpus(64, 3);
  std::size_t i = 0;
  std::size_t bytes = 0;
  for (auto _ : state) {
    const auto& text = toy.texts[i++ % toy.texts.size()].text;
    bytes += text.size();
    benchmark::DoNotOptimize(crowdaudit::detector::featurize(text));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Featurize);

void BM_BootstrapPrevalence(benchmark::State& state) {
  crowdaudit::Rng rng(2);
  std::vector<crowdaudit::detector::ScoreRecord> scores(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < scores.size(); ++i)
    scores[i] = {"r" + std::to_string(i), static_cast<double>(crowdaudit::uniform_below(rng, 160)) / 10.0 - 8.0, "b"};
  crowdaudit::stats::PrevalenceOptions options;
  options.ci_method = crowdaudit::stats::CiMethod::bootstrap_percentile;
  for (auto _ : state) benchmark::DoNotOptimize(crowdaudit::stats::prevalence(scores, 0.0, options));
}
BENCHMARK(BM_BootstrapPrevalence)->Arg(46)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
