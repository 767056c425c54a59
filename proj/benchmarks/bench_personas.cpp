#include <benchmark/benchmark.h>

#include "synth.hpp"
#include "vplay/personas.hpp"

namespace {

// 15 clusters in 256 dimensions, the scale of the persona stage.
void BM_SphericalKMeans(benchmark::State& state) {
  const auto blobs = testing_support::unit_blobs(15, static_cast<int>(state.range(0)), 256, 0.05, 11);
  for (auto _ : state) {
    auto model = vplay::personas::cluster(blobs.ids, blobs.vectors, 15, 2024);
    benchmark::DoNotOptimize(model.inertia);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(blobs.ids.size()));
}
BENCHMARK(BM_SphericalKMeans)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_AdjustedRandIndex(benchmark::State& state) {
  vplay::Rng rng(12);
  std::vector<int> a(static_cast<std::size_t>(state.range(0))), b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = static_cast<int>(rng.below(15));
    b[i] = rng.uniform01() < 0.9 ? a[i] : static_cast<int>(rng.below(15));
  }
  for (auto _ : state) benchmark::DoNotOptimize(vplay::personas::adjusted_rand_index(a, b));
}
BENCHMARK(BM_AdjustedRandIndex)->Arg(1000)->Arg(100000);

}  // namespace
