#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "debunk/debunker.hpp"
#include "debunk/log.hpp"
#include "debunk/ngram.hpp"
#include "debunk/retrieval.hpp"

using namespace debunk;

namespace {

const std::vector<std::string>& words() {
  static const std::vector<std::string> w = [] {
    std::vector<std::string> out;
    for (int i = 0; i < 400; ++i) out.push_back("word" + std::to_string(i));
    return out;
  }();
  return w;
}

std::vector<std::string> sentences(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, words().size() - 1), len(6, 20);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    std::string s;
    for (std::size_t n = len(rng); n > 0; --n) s += (s.empty() ? "" : " ") + words()[pick(rng)];
    out.push_back(s + ".");
  }
  return out;
}

std::vector<SentenceUnit> units(std::size_t count) {
  std::vector<SentenceUnit> out;
  const std::vector<std::string> text = sentences(count, 1);
  for (std::size_t i = 0; i < count; ++i) out.push_back(SentenceUnit{"d" + std::to_string(i / 10), i % 10, text[i], {}});
  return out;
}

void BM_IndexBuild(benchmark::State& state) {
  const std::vector<SentenceUnit> corpus = units(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(TfIdfIndex::build(corpus));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->Arg(1000)->Arg(10000);

void BM_IndexQuery(benchmark::State& state) {
  const TfIdfIndex index = TfIdfIndex::build(units(static_cast<std::size_t>(state.range(0))));
  const std::vector<std::string> queries = sentences(64, 2);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(index.top_candidates(queries[i++ % queries.size()], 10));
}
BENCHMARK(BM_IndexQuery)->Arg(1000)->Arg(10000);

void BM_Grounding(benchmark::State& state) {
  const std::vector<std::string> evidence = sentences(static_cast<std::size_t>(state.range(0)), 3);
  for (auto _ : state) {
    NgramScorer lm;
    lm.ground(evidence, GroundingConfig{});
    benchmark::DoNotOptimize(lm.vocabulary_size());
  }
}
BENCHMARK(BM_Grounding)->Arg(300)->Arg(3000);

void BM_Perplexity(benchmark::State& state) {
  NgramScorer lm;
  lm.ground(sentences(3000, 4), GroundingConfig{});
  const std::vector<std::string> claims = sentences(64, 5);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lm.perplexity(claims[i++ % claims.size()]));
}
BENCHMARK(BM_Perplexity);

void BM_ThresholdSearch(benchmark::State& state) {
  std::mt19937_64 rng(6);
  std::lognormal_distribution<double> ppl(4.0, 1.0);
  std::vector<ScoredItem> items;
  for (int i = 0; i < state.range(0); ++i) items.push_back({ppl(rng), (rng() & 1) ? Label::False : Label::True});
  for (auto _ : state) benchmark::DoNotOptimize(search_threshold(items, Objective::Accuracy));
}
BENCHMARK(BM_ThresholdSearch)->Arg(142)->Arg(340)->Arg(5000);

const bool kQuiet = [] {
  set_log_sink({});
  return true;
}();

}  // namespace

BENCHMARK_MAIN();
