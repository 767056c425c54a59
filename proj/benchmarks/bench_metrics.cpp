#include <benchmark/benchmark.h>

#include <vector>

#include "vplay/apportion.hpp"
#include "vplay/metrics.hpp"
#include "vplay/random.hpp"

namespace {

std::vector<double> half_steps(std::size_t n, std::uint64_t seed) {
  vplay::Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = 1.0 + 0.5 * static_cast<double>(rng.below(19));
  return v;
}

void BM_KendallTauB(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = half_steps(n, 1), y = half_steps(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(vplay::metrics::kendall_tau_b(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTauB)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_Wasserstein1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = half_steps(n, 3), b = half_steps(n + n / 3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(vplay::metrics::wasserstein1(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1)->RangeMultiplier(8)->Range(64, 1 << 15)->Complexity();

void BM_Distinct2(benchmark::State& state) {
  vplay::Rng rng(5);
  const char* words[] = {"deck", "card", "engine", "turn", "luck", "tile", "worker", "market"};
  std::vector<std::string> texts(static_cast<std::size_t>(state.range(0)));
  for (auto& t : texts)
    for (int w = 0; w < 80; ++w) t += std::string(words[rng.below(8)]) + " ";
  for (auto _ : state) benchmark::DoNotOptimize(vplay::metrics::distinct2(texts));
}
BENCHMARK(BM_Distinct2)->Arg(100)->Arg(1000);

void BM_LargestRemainder(benchmark::State& state) {
  vplay::Rng rng(6);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(state.range(0)));
  for (auto& c : counts) c = static_cast<std::int64_t>(rng.below(500));
  for (auto _ : state) benchmark::DoNotOptimize(vplay::largest_remainder(counts, 100));
}
BENCHMARK(BM_LargestRemainder)->Arg(5)->Arg(10)->Arg(1000);

}  // namespace
