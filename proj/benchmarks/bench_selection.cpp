#include <benchmark/benchmark.h>

#include "synth.hpp"
#include "vplay/reviews.hpp"

namespace {

void BM_SelectReviews(benchmark::State& state) {
  const auto corpus = testing_support::synthetic_corpus(static_cast<std::size_t>(state.range(0)),
                                                        static_cast<std::size_t>(state.range(0)) * 150, 21);
  const vplay::reviews::SelectionConfig config;
  for (auto _ : state) {
    auto result = vplay::reviews::select_reviews(corpus, config);
    benchmark::DoNotOptimize(result.corpus.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_SelectReviews)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
