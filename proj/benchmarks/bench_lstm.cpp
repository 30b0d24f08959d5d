#include <benchmark/benchmark.h>

#include <random>

#include "stockcast/lstm.hpp"

using namespace stockcast;

namespace {

// Paper-sized network by default: two layers of 50, lookback 60, 13 features.
LstmModel model(std::size_t features, std::size_t lookback, int hidden) {
  TrainConfig cfg;
  cfg.hidden_sizes = {hidden, hidden};
  LstmModel m = init_model(features, lookback, cfg);
  for (std::size_t f = 0; f < features; ++f) m.feature_names[f] = "F" + std::to_string(f);
  return m;
}

std::vector<double> inputs(std::size_t n) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto m = model(13, 60, static_cast<int>(state.range(1)));
  const auto x = inputs(batch * 60 * 13);
  for (auto _ : state) benchmark::DoNotOptimize(forward_batch(m, x, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBatch)->Args({1, 50})->Args({32, 50})->Args({32, 128});

void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  const auto m = model(13, 60, static_cast<int>(state.range(1)));
  const auto x = inputs(batch * 60 * 13);
  for (auto _ : state) {
    auto [pred, cache] = forward_batch(m, x, batch);
    benchmark::DoNotOptimize(backward(m, cache, pred));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardBackward)->Args({1, 50})->Args({32, 50})->Args({32, 128});

void BM_TrainEpoch(benchmark::State& state) {
  const std::size_t samples = 512;
  WindowedDataset ds;
  ds.lookback = 60;
  for (int f = 0; f < 13; ++f) ds.feature_names.push_back("F" + std::to_string(f));
  ds.inputs = inputs(samples * 60 * 13);
  Date d = Date::from_ymd(2000, 1, 1);
  for (std::size_t s = 0; s < samples; ++s, d = d.next_day()) {
    ds.targets.push_back(ds.inputs[(s * 60 + 59) * 13]);
    ds.dates.push_back(d);
    ds.target_rows.push_back(s + 60);
  }
  TrainConfig cfg;
  cfg.epochs = 1;
  const auto m = model(13, 60, 50);
  for (auto _ : state) benchmark::DoNotOptimize(train(m, ds, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(samples));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace
