#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <functional>

#include <nlohmann/json.hpp>

#include "models.hpp"
#include "stockcast/forecast_eval.hpp"
#include "synthetic.hpp"

using namespace stockcast;
using stockcast::testing::persistence_model;
using stockcast::testing::random_walk_series;
using stockcast::testing::series_from_closes;

namespace {

EvalError eval_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const EvalError& e) {
    return e;
  }
  ADD_FAILURE() << "expected EvalError";
  return EvalError(EvalError::Kind::LengthMismatch, "none");
}

PipelineConfig small_univariate() {
  PipelineConfig cfg;
  cfg.lookback = 10;
  cfg.train.hidden_sizes = {4};
  cfg.train.epochs = 2;
  cfg.train.batch_size = 32;
  cfg.train.learning_rate = 1e-2;
  return cfg;
}

}  // namespace

TEST(Metrics, HandExample) {
  const std::vector<double> real{100.0, 200.0};
  const std::vector<double> pred{90.0, 220.0};
  const auto m = compute_metrics(real, pred);
  EXPECT_EQ(m.n, 2u);
  EXPECT_NEAR(m.mape, 10.0, 1e-12);
  EXPECT_NEAR(m.mae, 15.0, 1e-12);
  EXPECT_NEAR(m.mse, 250.0, 1e-12);
  EXPECT_NEAR(m.rmse, 15.811388300841896, 1e-12);
}

TEST(Metrics, IdentityAndSymmetry) {
  const auto s = random_walk_series(300, 11);
  std::vector<double> real, up, down;
  for (const auto& bar : s.bars()) {
    real.push_back(bar.close);
    up.push_back(bar.close + 0.25 * bar.close);
    down.push_back(bar.close - 0.25 * bar.close);
  }
  const auto zero = compute_metrics(real, real);
  EXPECT_EQ(zero.mape, 0.0);
  EXPECT_EQ(zero.mae, 0.0);
  EXPECT_EQ(zero.mse, 0.0);
  EXPECT_EQ(zero.rmse, 0.0);

  const auto a = compute_metrics(real, up);
  const auto b = compute_metrics(real, down);
  EXPECT_NEAR(a.mape, 25.0, 1e-9);
  EXPECT_NEAR(a.mape, b.mape, 1e-9);
  EXPECT_NEAR(a.mae, b.mae, 1e-9 * a.mae);
  EXPECT_NEAR(a.mse, b.mse, 1e-9 * a.mse);
  EXPECT_NEAR(a.rmse * a.rmse, a.mse, 1e-12 * a.mse);
  EXPECT_LE(a.mae, a.rmse);
}

TEST(Metrics, Errors) {
  const std::vector<double> two{1.0, 2.0};
  const std::vector<double> three{1.0, 2.0, 3.0};
  EXPECT_EQ(eval_error([&] { compute_metrics(two, three); }).kind(), EvalError::Kind::LengthMismatch);
  EXPECT_EQ(eval_error([&] { compute_metrics({}, {}); }).kind(), EvalError::Kind::LengthMismatch);
  const std::vector<double> with_zero{1.0, 0.0, 3.0};
  const auto e = eval_error([&] { compute_metrics(with_zero, three); });
  EXPECT_EQ(e.kind(), EvalError::Kind::ZeroActual);
  EXPECT_EQ(e.index, 1u);
}

TEST(Metrics, RmseFromReportedMse) {
  EXPECT_NEAR(rmse_from_mse(234682.24), 484.44, 0.01);
  EXPECT_NEAR(rmse_from_mse(18847.97), 137.28, 0.01);
}

TEST(Metrics, JsonKeyOrder) {
  MetricsReport m{1.5, 2.0, 4.0, 2.0, 7};
  const std::string text = metrics_to_json(m, "univariate", "ABC", 20);
  ASSERT_FALSE(text.empty());
  EXPECT_EQ(text.back(), '\n');
  const auto doc = nlohmann::ordered_json::parse(text);
  std::vector<std::string> keys;
  for (const auto& item : doc.items()) keys.push_back(item.key());
  EXPECT_EQ(keys, (std::vector<std::string>{"mape", "mae", "mse", "rmse", "n", "mode", "symbol", "epochs"}));
  EXPECT_EQ(doc["n"], 7);
  EXPECT_EQ(doc["symbol"], "ABC");
  EXPECT_DOUBLE_EQ(doc["mape"].get<double>(), 1.5);
}

TEST(Trend, Classification) {
  EXPECT_EQ(classify_trend(std::vector<double>{100.0, 105.0}), Trend::Up);
  EXPECT_EQ(classify_trend(std::vector<double>{100.0, 95.0}), Trend::Down);
  EXPECT_EQ(classify_trend(std::vector<double>{100.0, 120.0, 100.05}), Trend::Flat);
  EXPECT_EQ(classify_trend(std::vector<double>{100.0}), Trend::Flat);
}

TEST(Persistence, OneStepIsLastClose) {
  const auto series = random_walk_series(400, 21);
  const auto model = persistence_model(series, 5);
  const auto f = forecast_recursive(model, series, 1);
  ASSERT_EQ(f.values.size(), 1u);
  EXPECT_NEAR(f.values[0], series.back().close, 1e-6 * series.back().close);
}

TEST(Persistence, ThirtyStepsStayFlat) {
  const auto series = random_walk_series(400, 22);
  const auto model = persistence_model(series, 5);
  const auto f = forecast_recursive(model, series, 30);
  ASSERT_EQ(f.values.size(), 30u);
  EXPECT_EQ(f.horizon, 30u);
  for (double v : f.values) EXPECT_NEAR(v, series.back().close, 1e-5 * series.back().close);
  EXPECT_EQ(f.trend, Trend::Flat);
  const std::string csv = forecast_to_csv(f);
  EXPECT_EQ(csv.rfind("day_index,predicted_close\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 31);
}

TEST(Persistence, ShorterHorizonIsPrefix) {
  const auto series = random_walk_series(400, 23);
  const auto model = persistence_model(series, 5);
  const auto short_f = forecast_recursive(model, series, 7);
  const auto long_f = forecast_recursive(model, series, 19);
  for (std::size_t i = 0; i < short_f.values.size(); ++i) EXPECT_EQ(short_f.values[i], long_f.values[i]);
}

TEST(Persistence, TestMapeMatchesNaiveOracle) {
  const auto series = random_walk_series(600, 24);
  const auto model = persistence_model(series, 5);
  const auto test = model_test_dataset(model, series);
  const auto result = evaluate_one_step(model, test);
  ASSERT_GT(result.metrics.n, 0u);

  // Yesterday's close as today's forecast, over the same dates.
  double pct = 0.0;
  std::size_t matched = 0;
  for (std::size_t s = 0; s < result.dates.size(); ++s) {
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].date == result.dates[s]) {
        EXPECT_NEAR(result.actual[s], series[i].close, 1e-9 * series[i].close);
        pct += std::abs(series[i].close - series[i - 1].close) / series[i].close;
        ++matched;
        break;
      }
    }
  }
  ASSERT_EQ(matched, result.dates.size());
  const double oracle_mape = pct / static_cast<double>(matched) * 100.0;
  EXPECT_NEAR(result.metrics.mape, oracle_mape, 1e-6 * oracle_mape + 1e-9);
}

TEST(Forecast, ErrorsOnShortSeriesAndBadHorizon) {
  const auto series = random_walk_series(400, 25);
  const auto model = persistence_model(series, 5);
  const auto tiny = random_walk_series(3, 25);
  EXPECT_EQ(eval_error([&] { forecast_recursive(model, tiny, 5); }).kind(), EvalError::Kind::SeriesTooShort);
  EXPECT_THROW(forecast_recursive(model, series, 0), std::invalid_argument);
}

TEST(Forecast, NonPositivePredictionRaises) {
  const auto series = random_walk_series(400, 26);
  auto model = persistence_model(series, 5);
  model.head_bias = -1e6;
  EXPECT_EQ(eval_error([&] { forecast_recursive(model, series, 3); }).kind(),
            EvalError::Kind::NonPositiveForecast);
}

TEST(Forecast, MultivariateTrainedModelIsFinite) {
  const auto series = random_walk_series(700, 27);
  PipelineConfig cfg;
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  cfg.lookback = 10;
  cfg.train.hidden_sizes = {6};
  cfg.train.epochs = 2;
  const auto trained = train_pipeline(series, cfg);
  EXPECT_EQ(trained.model.feature_names.size(), 13u);
  const auto f = forecast_recursive(trained.model, series, 30);
  ASSERT_EQ(f.values.size(), 30u);
  for (double v : f.values) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 0.0);
  }
}

TEST(Schema, MismatchNamesColumn) {
  const auto series = random_walk_series(700, 28);
  PipelineConfig cfg;
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  cfg.lookback = 10;
  cfg.train.hidden_sizes = {3};
  cfg.train.epochs = 1;
  const auto trained = train_pipeline(series, cfg);
  try {
    model_test_dataset(trained.model, series, ColumnSet::Table4All);
    FAIL() << "expected SchemaMismatch";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.kind(), EvalError::Kind::SchemaMismatch);
    EXPECT_NE(std::string(e.what()).find('"'), std::string::npos) << e.what();
  }
  IndicatorConfig other = trained.model.indicator_config;
  other.sma_periods = {5, 50, 200};
  try {
    model_test_dataset(trained.model, series, std::nullopt, &other);
    FAIL() << "expected SchemaMismatch";
  } catch (const EvalError& e) {
    EXPECT_EQ(e.kind(), EvalError::Kind::SchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("SMA"), std::string::npos) << e.what();
  }
}

TEST(Pipeline, ValidateRejectsMismatch) {
  PipelineConfig cfg;
  cfg.mode = ModelMode::Univariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::Univariate;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.column_set = ColumnSet::Table4All;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lookback = 0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Pipeline, TrainRowsScaledIntoUnitBand) {
  const auto series = random_walk_series(900, 29);
  PipelineConfig cfg;
  cfg.mode = ModelMode::Multivariate;
  cfg.column_set = ColumnSet::PaperMultivariate;
  cfg.lookback = 20;
  const auto data = prepare_data(series, cfg);
  const std::size_t rows = rows_covered(data.train.num_samples(), cfg.lookback);
  for (std::size_t c = 0; c < data.scaled.cols(); ++c) {
    double lo = 2.0, hi = -2.0;
    for (std::size_t r = 0; r < rows; ++r) {
      lo = std::min(lo, data.scaled.at(r, c));
      hi = std::max(hi, data.scaled.at(r, c));
    }
    EXPECT_EQ(lo, -1.0) << data.scaled.column_names[c];
    EXPECT_EQ(hi, 1.0) << data.scaled.column_names[c];
  }
  EXPECT_EQ(data.train.num_samples() + data.test.num_samples(), data.all.num_samples());
  EXPECT_LT(data.train.dates.back(), data.test.dates.front());
}

TEST(Pipeline, SingleSampleEvaluation) {
  const auto series = random_walk_series(400, 30);
  const auto model = persistence_model(series, 5);
  const auto test = model_test_dataset(model, series).slice(0, 1);
  const auto result = evaluate_one_step(model, test);
  EXPECT_EQ(result.metrics.n, 1u);
  EXPECT_EQ(result.dates.size(), 1u);
}

TEST(WalkForward, TwoFoldsDisjointAscending) {
  const auto series = random_walk_series(1000, 31);
  const auto folds = walk_forward(series, small_univariate(), 2);
  ASSERT_EQ(folds.size(), 2u);
  for (std::size_t j = 0; j < folds.size(); ++j) {
    EXPECT_EQ(folds[j].fold, j + 1);
    EXPECT_GT(folds[j].metrics.n, 0u);
    EXPECT_LE(folds[j].test_start, folds[j].test_end);
    EXPECT_TRUE(std::isfinite(folds[j].metrics.mape));
  }
  EXPECT_LT(folds[0].test_end, folds[1].test_start);
}

TEST(WalkForward, ConstantSeriesIsNearPerfect) {
  const auto series = series_from_closes(std::vector<double>(1000, 50.0));
  const auto folds = walk_forward(series, small_univariate(), 3);
  ASSERT_EQ(folds.size(), 3u);
  for (const auto& f : folds) EXPECT_LT(f.metrics.mape, 1.0);
}

TEST(WalkForward, RejectsOneFold) {
  const auto series = random_walk_series(500, 32);
  EXPECT_THROW(walk_forward(series, small_univariate(), 1), std::invalid_argument);
}
