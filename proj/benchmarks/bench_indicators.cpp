#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "stockcast/indicators.hpp"

using namespace stockcast;
namespace ind = stockcast::indicators;

namespace {

OhlcvSeries walk(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> step(0.0, 0.01);
  std::vector<Bar> bars;
  double close = 100.0;
  Date d = Date::from_ymd(2000, 1, 3);
  for (std::size_t i = 0; i < n; ++i, d = d.next_day()) {
    const double open = close;
    close *= std::exp(step(rng));
    Bar b;
    b.date = d;
    b.open = open;
    b.close = close;
    b.adj_close = close;
    b.high = std::max(open, close) * 1.004;
    b.low = std::min(open, close) * 0.996;
    b.volume = 1e6;
    bars.push_back(b);
  }
  return OhlcvSeries::from_bars("BENCH", bars);
}

void BM_Sma200(benchmark::State& state) {
  const auto x = walk(static_cast<std::size_t>(state.range(0))).closes();
  for (auto _ : state) benchmark::DoNotOptimize(ind::sma(x, 200));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Sma200)->Arg(2464)->Arg(20000);

void BM_Rsi14(benchmark::State& state) {
  const auto x = walk(static_cast<std::size_t>(state.range(0))).closes();
  for (auto _ : state) benchmark::DoNotOptimize(ind::rsi(x, 14));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rsi14)->Arg(2464)->Arg(20000);

void BM_Cci20(benchmark::State& state) {
  const auto s = walk(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(ind::cci(s, 20));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Cci20)->Arg(2464)->Arg(20000);

void BM_Macd(benchmark::State& state) {
  const auto x = walk(static_cast<std::size_t>(state.range(0))).closes();
  for (auto _ : state) benchmark::DoNotOptimize(ind::macd(x, 12, 26, 9));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Macd)->Arg(2464)->Arg(20000);

void BM_BuildFeatures(benchmark::State& state) {
  const auto s = walk(static_cast<std::size_t>(state.range(0)));
  const IndicatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(build_features(s, cfg, ColumnSet::PaperMultivariate));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildFeatures)->Arg(2464)->Arg(20000);

}  // namespace
