// One PASS/FAIL/SKIP line per acceptance criterion. Exit status is nonzero
// iff any criterion fails.
//
// Optional real data: set STOCKCAST_YAHOO_DIR to a directory holding
// RELIANCE.NS.csv and INFY.NS.csv (daily, 2012-01-01..2021-12-31).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stockcast/forecast_eval.hpp"
#include "synthetic.hpp"

using namespace stockcast;
namespace ind = stockcast::indicators;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

// Collects failed checks; the first few are kept for the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) {
      if (!first_.empty()) first_ += "; ";
      first_ += what;
    }
  }
  Outcome outcome(const std::string& pass_detail) const {
    if (failures_ == 0) return {Status::Pass, pass_detail};
    return {Status::Fail, std::to_string(failures_) + " check(s) failed: " + first_};
  }

 private:
  std::size_t failures_ = 0;
  std::string first_;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::vector<double> uniform(std::size_t n, std::uint64_t seed, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (auto& v : out) v = dist(rng);
  return out;
}

Outcome rmse_identity() {
  const double a = rmse_from_mse(234682.24);
  const double b = rmse_from_mse(18847.97);
  Checks c;
  c.expect(std::fabs(a - 484.44) <= 0.01, fmt("rmse(234682.24) = %.4f", a));
  c.expect(std::fabs(b - 137.28) <= 0.01, fmt("rmse(18847.97) = %.4f", b));
  return c.outcome(fmt("%.4f and %.4f", a, b));
}

Outcome gradient_oracle() {
  Checks c;
  std::size_t checked = 0;
  double worst = 0.0;
  for (CellVariant v : {CellVariant::Standard, CellVariant::AsPrinted}) {
    TrainConfig cfg;
    cfg.hidden_sizes = {4};
    cfg.seed = 11;
    cfg.cell_variant = v;
    LstmModel m = init_model(3, 5, cfg);
    m.feature_names = {"Close", "F1", "F2"};
    m.head_bias = 0.05;
    const auto r = oracle::gradient_check(m, uniform(2 * 5 * 3, 12, -1.0, 1.0), 2);
    checked += r.checked;
    worst = std::max(worst, r.worst_rel);
    c.expect(r.failures == 0, to_string(v) + ": " + std::to_string(r.failures) + " of " +
                                  std::to_string(r.checked) + fmt(" parameters, worst %.3g", r.worst_rel));
  }
  return c.outcome(std::to_string(checked) + fmt(" parameters, worst relative error %.3g", worst));
}

Outcome indicator_oracles() {
  Checks c;
  const auto series = testing::random_walk_series(1000, 20240601);
  const auto x = series.closes();
  auto near = [&c](double diff, double tol, const std::string& name) {
    c.expect(diff <= tol, name + fmt(" diff %.3g", diff));
  };
  near(oracle::max_abs_diff(ind::sma(x, 10), oracle::sma(x, 10)), 1e-9, "SMA10");
  near(oracle::max_abs_diff(ind::sma(x, 50), oracle::sma(x, 50)), 1e-9, "SMA50");
  near(oracle::max_abs_diff(ind::sma(x, 200), oracle::sma(x, 200)), 1e-9, "SMA200");
  near(oracle::max_abs_diff(ind::cma(x), oracle::cma(x)), 1e-9, "CMA");
  near(oracle::max_abs_diff(ind::wma(x, 10), oracle::wma(x, 10)), 1e-9, "WMA");
  near(oracle::max_abs_diff(ind::ema(x, 0.1), oracle::ema(x, 0.1)), 1e-9, "EMA");
  near(oracle::max_abs_diff(ind::rsi(x, 14), oracle::rsi(x, 14)), 1e-9, "RSI");
  near(oracle::max_rel_diff(ind::cci(series, 20), oracle::cci(series, 20)), 1e-6, "CCI");
  near(oracle::max_abs_diff(ind::ad(series), oracle::ad(series)), 1e-9, "AD");
  const auto k = ind::stochastic_k(series, 14);
  const auto d = ind::stochastic_d(k, 10);
  near(oracle::max_abs_diff(k, oracle::stochastic_k(series, 14)), 1e-9, "K%");
  near(oracle::max_abs_diff(d, oracle::stochastic_d(oracle::stochastic_k(series, 14), 10)), 1e-9, "D%");
  const auto m = ind::macd(x, 12, 26, 9);
  const auto om = oracle::macd(x, 12, 26, 9);
  near(oracle::max_abs_diff(m.diff, om.diff), 1e-9, "MACD");
  near(oracle::max_abs_diff(m.signal, om.signal), 1e-9, "MACD signal");

  std::size_t bounded = 0;
  for (const auto* s : {&k, &d}) {
    for (const auto& v : *s) {
      if (!v) continue;
      ++bounded;
      c.expect(*v >= 0.0 && *v <= 100.0, fmt("oscillator value %.6g out of [0,100]", *v));
    }
  }
  for (const auto& v : ind::rsi(x, 14)) {
    if (!v) continue;
    ++bounded;
    c.expect(*v >= 0.0 && *v <= 100.0, fmt("RSI value %.6g out of [0,100]", *v));
  }

  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> shift(-50.0, 50.0);
  std::uniform_int_distribution<int> exponent(-4, 4);
  std::uniform_real_distribution<double> factor(0.01, 100.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = testing::random_walk_series(120, 1000 + trial);
    const auto xs = s.closes();
    const double a = shift(rng);
    std::vector<double> xa(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xa[i] = xs[i] + a;
    auto shifted = [a](IndicatorSeries v) {
      for (auto& e : v) {
        if (e) *e += a;
      }
      return v;
    };
    const std::string tag = " trial " + std::to_string(trial);
    near(oracle::max_abs_diff(ind::sma(xa, 10), shifted(ind::sma(xs, 10))), 1e-9, "SMA shift" + tag);
    near(oracle::max_abs_diff(ind::ema(xa, 0.1), shifted(ind::ema(xs, 0.1))), 1e-9, "EMA shift" + tag);

    const double p2 = std::ldexp(1.0, exponent(rng));
    std::vector<double> x2(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) x2[i] = xs[i] * p2;
    const auto r = ind::rsi(xs, 14);
    const auto r2 = ind::rsi(x2, 14);
    bool exact = r.size() == r2.size();
    for (std::size_t i = 0; exact && i < r.size(); ++i) {
      exact = r[i].has_value() == r2[i].has_value() && (!r[i] || *r[i] == *r2[i]);
    }
    c.expect(exact, "RSI power-of-two scale" + tag);
    const double f = factor(rng);
    std::vector<double> xf(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xf[i] = xs[i] * f;
    near(oracle::max_abs_diff(ind::rsi(xf, 14), r), 1e-9, "RSI scale" + tag);
  }
  return c.outcome("13 oracle comparisons, " + std::to_string(bounded) + " bounded values, 100 invariance cases");
}

Outcome scaler_round_trip() {
  Checks c;
  FeatureMatrix m;
  m.column_names = {"Close"};
  m.values = uniform(10000, 5, -500.0, 2500.0);
  Date d = Date::from_ymd(2000, 1, 1);
  for (std::size_t i = 0; i < m.values.size(); ++i, d = d.next_day()) m.dates.push_back(d);
  const ScalerParams p = fit(m, RowRange{0, m.rows()});
  const FeatureMatrix t = transform(p, m);
  double worst = 0.0;
  double lo = 2.0, hi = -2.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double back = inverse_close(p, t.at(i, 0));
    worst = std::max(worst, std::fabs(back - m.at(i, 0)) / std::max(1.0, std::fabs(m.at(i, 0))));
    lo = std::min(lo, t.at(i, 0));
    hi = std::max(hi, t.at(i, 0));
  }
  c.expect(worst <= 1e-9, fmt("round trip relative error %.3g", worst));
  c.expect(lo == -1.0 && hi == 1.0, fmt("range [%.17g, %.17g]", lo, hi));

  PipelineConfig cfg;
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  cfg.lookback = 30;
  const auto data = prepare_data(testing::random_walk_series(1200, 8), cfg);
  const std::size_t rows = rows_covered(data.train.num_samples(), cfg.lookback);
  for (std::size_t col = 0; col < data.scaled.cols(); ++col) {
    double clo = 2.0, chi = -2.0;
    for (std::size_t r = 0; r < rows; ++r) {
      clo = std::min(clo, data.scaled.at(r, col));
      chi = std::max(chi, data.scaled.at(r, col));
    }
    c.expect(clo == -1.0 && chi == 1.0, data.scaled.column_names[col] + fmt(" training range [%.17g, %.17g]", clo, chi));
  }
  return c.outcome(fmt("worst relative error %.3g on 10000 values; %g training columns span [-1, 1]", worst,
                       static_cast<double>(data.scaled.cols())));
}

Outcome learning_sanity() {
  Checks c;
  const auto series = testing::series_from_closes(testing::sine_closes(1000, 50.0), "SINE");
  PipelineConfig cfg;
  cfg.lookback = 30;
  cfg.train.hidden_sizes = {32};
  cfg.train.epochs = 150;
  const auto trained = train_pipeline(series, cfg);
  const auto result = evaluate_one_step(trained.model, trained.data.test);
  const auto& h = trained.history.train_mse;
  c.expect(result.metrics.mape < 5.0, fmt("test MAPE %.4f%%", result.metrics.mape));
  c.expect(!h.empty() && h.back() < 0.1 * h.front(), fmt("train MSE %.4g -> %.4g", h.front(), h.back()));
  return c.outcome(fmt("test MAPE %.4f%%, train MSE %.4g -> %.4g", result.metrics.mape, h.front(), h.back()));
}

struct PipelineRun {
  std::string model_json;
  std::string forecast_csv;
  ForecastResult forecast;
  std::size_t columns = 0;
};

PipelineRun run_multivariate(const OhlcvSeries& series) {
  PipelineConfig cfg;
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  cfg.train.epochs = 40;
  const auto trained = train_pipeline(series, cfg);
  PipelineRun run;
  run.model_json = save_model_string(trained.model);
  run.forecast = forecast_recursive(trained.model, series, 30);
  run.forecast_csv = forecast_to_csv(run.forecast);
  run.columns = trained.model.feature_names.size();
  return run;
}

Outcome pipeline_parity() {
  Checks c;
  const auto series = testing::random_walk_series(2464, 2012, "SYNTH");
  const PipelineRun a = run_multivariate(series);
  const PipelineRun b = run_multivariate(series);
  double lo = 1e300, hi = -1e300;
  for (double v : series.closes()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  c.expect(a.columns == 13, "feature columns " + std::to_string(a.columns));
  c.expect(a.forecast.values.size() == 30, "forecast length " + std::to_string(a.forecast.values.size()));
  for (double v : a.forecast.values) {
    c.expect(std::isfinite(v) && v >= lo / 3.0 && v <= 3.0 * hi, fmt("forecast %.6g outside [%.6g, %.6g]", v, lo / 3.0, 3.0 * hi));
  }
  c.expect(a.model_json == b.model_json, "rerun model differs");
  c.expect(a.forecast_csv == b.forecast_csv, "rerun forecast differs");
  const double first = a.forecast.values.empty() ? 0.0 : a.forecast.values.front();
  const double last = a.forecast.values.empty() ? 0.0 : a.forecast.values.back();
  return c.outcome(fmt("2464 rows, 13 columns, forecast %.4f .. %.4f, close range [%.4f, ", first, last, lo) +
                   fmt("%.4f], rerun identical", hi));
}

Outcome dataset_hygiene() {
  Checks c;
  std::size_t datasets = 0, samples = 0;
  const auto series = testing::random_walk_series(900, 77);
  const std::vector<std::pair<ModelMode, ColumnSet>> sets{{ModelMode::Univariate, ColumnSet::Univariate},
                                                          {ModelMode::Multivariate, ColumnSet::PaperMultivariate},
                                                          {ModelMode::Multivariate, ColumnSet::Table4All}};
  for (const auto& [mode, set] : sets) {
    for (std::size_t lookback : {1u, 10u, 60u}) {
      for (double fraction : {0.5, 0.8, 0.95}) {
        PipelineConfig cfg;
        cfg.mode = mode;
        cfg.column_set = set;
        cfg.lookback = lookback;
        cfg.split.train_fraction = fraction;
        const auto data = prepare_data(series, cfg);
        const std::string tag = to_string(set) + " L=" + std::to_string(lookback) + fmt(" f=%.2f", fraction);
        for (const auto* ds : {&data.all, &data.train, &data.test}) {
          c.expect(check_no_lookahead(*ds, data.scaled), "look-ahead in " + tag);
          ++datasets;
          samples += ds->num_samples();
        }
        c.expect(!data.train.dates.empty() && !data.test.dates.empty() &&
                     data.train.dates.back() < data.test.dates.front() &&
                     data.train.target_rows.back() < data.test.target_rows.front(),
                 "split boundary not strictly ordered in " + tag);
      }
    }
  }
  return c.outcome(std::to_string(datasets) + " datasets, " + std::to_string(samples) + " samples checked");
}

Outcome serialization() {
  Checks c;
  TrainConfig cfg;
  cfg.hidden_sizes = {8, 6};
  cfg.seed = 3;
  LstmModel m = init_model(4, 12, cfg);
  m.feature_names = {"Close", "A", "B", "C"};
  m.scaler.column_names = m.feature_names;
  m.scaler.mins = {10.0, -1.0, 0.0, 5.0};
  m.scaler.maxs = {110.0, 1.0, 100.0, 5.5};
  m.head_bias = 0.125;
  const LstmModel loaded = load_model_string(save_model_string(m));
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto w = uniform(12 * 4, 500 + k, -1.5, 1.5);
    worst = std::max(worst, std::fabs(predict(loaded, w) - predict(m, w)));
  }
  c.expect(worst <= 1e-12, fmt("max deviation %.3g", worst));
  return c.outcome(fmt("max deviation %.3g over 100 windows", worst));
}

Outcome yahoo_tables() {
  const char* dir = std::getenv("STOCKCAST_YAHOO_DIR");
  if (dir == nullptr) return {Status::Skip, "STOCKCAST_YAHOO_DIR not set"};
  struct Expect {
    const char* symbol;
    double min, max;
  };
  Checks c;
  std::string detail;
  for (const Expect& e : {Expect{"RELIANCE.NS", 334.875702, 2731.850098}, Expect{"INFY.NS", 265.475006, 1892.849976}}) {
    const auto path = std::filesystem::path(dir) / (std::string(e.symbol) + ".csv");
    if (!std::filesystem::exists(path)) return {Status::Skip, path.string() + " missing"};
    const auto s = slice_by_date(load_csv_file(path.string(), e.symbol), Date::from_ymd(2012, 1, 1),
                                 Date::from_ymd(2021, 12, 31));
    double lo = 1e300, hi = -1e300;
    for (double v : s.closes()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    c.expect(std::fabs(lo - e.min) <= 0.01 && std::fabs(hi - e.max) <= 0.01,
             std::string(e.symbol) + fmt(" close range [%.6f, %.6f]", lo, hi));
    detail += std::string(e.symbol) + fmt(" [%.6f, %.6f] ", lo, hi);
  }
  return c.outcome(detail);
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"rmse-identity", rmse_identity},
      {"gradient-oracle", gradient_oracle},
      {"indicator-oracles", indicator_oracles},
      {"scaler-round-trip", scaler_round_trip},
      {"learning-sanity-sine", learning_sanity},
      {"multivariate-pipeline-parity", pipeline_parity},
      {"dataset-hygiene", dataset_hygiene},
      {"serialization", serialization},
      {"yahoo-close-ranges", yahoo_tables},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* label = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    if (o.status == Status::Fail) ++failed;
    std::printf("%s %s (%.2fs): %s\n", label, name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
