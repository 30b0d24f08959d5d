#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stockcast/dataset.hpp"
#include "stockcast/indicators.hpp"
#include "stockcast/lstm.hpp"
#include "stockcast/market_data.hpp"
#include "stockcast/scaling.hpp"

namespace stockcast {

class EvalError : public std::runtime_error {
 public:
  enum class Kind { LengthMismatch, ZeroActual, SchemaMismatch, SeriesTooShort, TooFewRows, NonPositiveForecast };
  EvalError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }
  std::size_t index = 0;

 private:
  Kind kind_;
};

struct MetricsReport {
  double mape = 0.0;  // percent
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  std::size_t n = 0;
};

MetricsReport compute_metrics(std::span<const double> real, std::span<const double> predict);

double rmse_from_mse(double mse);

// JSON object {mape, mae, mse, rmse, n, mode, symbol, epochs}.
std::string metrics_to_json(const MetricsReport& report, const std::string& mode,
                            const std::string& symbol, int epochs);

struct OneStepResult {
  MetricsReport metrics;
  std::vector<Date> dates;
  std::vector<double> actual;     // price units
  std::vector<double> predicted;  // price units
};

// Metrics in price units for scaled predictions against a dataset's targets.
OneStepResult score_scaled_predictions(const ScalerParams& scaler, const WindowedDataset& ds,
                                       std::span<const double> predicted_scaled);

OneStepResult evaluate_one_step(const LstmModel& model, const WindowedDataset& test_ds);

enum class Trend { Up, Down, Flat };
std::string to_string(Trend trend);

// |last - first| within 0.1% of |first| counts as flat.
Trend classify_trend(std::span<const double> values);

struct ForecastResult {
  std::size_t horizon = 0;
  std::vector<double> values;
  Trend trend = Trend::Flat;
};

// Predicts, inverse-scales, appends a synthetic bar (open = high = low =
// close = prediction, volume carried forward), rebuilds features with the
// model's pipeline, and repeats.
ForecastResult forecast_recursive(const LstmModel& model, const OhlcvSeries& series, std::size_t horizon);

// "day_index,predicted_close" CSV.
std::string forecast_to_csv(const ForecastResult& forecast);

struct PipelineConfig {
  ModelMode mode = ModelMode::Univariate;
  ColumnSet column_set = ColumnSet::Univariate;
  IndicatorConfig indicators;
  std::size_t lookback = 60;
  SplitSpec split;
  TrainConfig train;
  bool clip_scaled = false;

  void validate() const;
};

struct PreparedData {
  FeatureMatrix features;
  ScalerParams scaler;
  FeatureMatrix scaled;
  WindowedDataset all;
  WindowedDataset train;
  WindowedDataset test;
};

// Features, train-only scaler fit, windows, and chronological split.
PreparedData prepare_data(const OhlcvSeries& series, const PipelineConfig& cfg);

struct TrainedPipeline {
  PreparedData data;
  LstmModel model;
  TrainHistory history;
};

TrainedPipeline train_pipeline(const OhlcvSeries& series, const PipelineConfig& cfg,
                               const std::function<void(const EpochReport&)>& on_epoch = {});

// Rebuilds test windows for `series` using the model's scaler, lookback and
// split fraction. Features come from the given column set and indicator
// config (the model's own when omitted); a column list that differs from the
// model's raises SchemaMismatch naming the first differing column.
WindowedDataset model_test_dataset(const LstmModel& model, const OhlcvSeries& series,
                                   std::optional<ColumnSet> column_set = std::nullopt,
                                   const IndicatorConfig* indicators = nullptr);

struct FoldReport {
  std::size_t fold = 0;
  MetricsReport metrics;
  Date test_start;
  Date test_end;
};

// Expanding window: fold j (1..k) trains on the first j/(k+1) of the samples
// and tests on the next 1/(k+1), with seed = cfg.train.seed + j.
std::vector<FoldReport> walk_forward(const OhlcvSeries& series, const PipelineConfig& cfg, std::size_t folds);

}  // namespace stockcast
