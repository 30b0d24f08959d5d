#include "stockcast/forecast_eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <nlohmann/json.hpp>

#include "stockcast/number_format.hpp"

namespace stockcast {

MetricsReport compute_metrics(std::span<const double> real, std::span<const double> predict) {
  if (real.size() != predict.size() || real.empty()) {
    throw EvalError(EvalError::Kind::LengthMismatch,
                    "metric inputs need equal nonzero lengths, got " + std::to_string(real.size()) +
                        " and " + std::to_string(predict.size()));
  }
  MetricsReport report;
  report.n = real.size();
  double pct = 0.0;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t t = 0; t < real.size(); ++t) {
    if (real[t] == 0.0) {
      EvalError err(EvalError::Kind::ZeroActual, "actual value is zero at index " + std::to_string(t));
      err.index = t;
      throw err;
    }
    const double err = std::abs(real[t] - predict[t]);
    pct += err / std::abs(real[t]);
    abs_sum += err;
    sq_sum += err * err;
  }
  const double n = static_cast<double>(report.n);
  report.mape = pct / n * 100.0;
  report.mae = abs_sum / n;
  report.mse = sq_sum / n;
  report.rmse = rmse_from_mse(report.mse);
  return report;
}

double rmse_from_mse(double mse) { return std::sqrt(mse); }

std::string metrics_to_json(const MetricsReport& report, const std::string& mode,
                            const std::string& symbol, int epochs) {
  nlohmann::ordered_json doc;
  doc["mape"] = report.mape;
  doc["mae"] = report.mae;
  doc["mse"] = report.mse;
  doc["rmse"] = report.rmse;
  doc["n"] = report.n;
  doc["mode"] = mode;
  doc["symbol"] = symbol;
  doc["epochs"] = epochs;
  return doc.dump(2) + "\n";
}

namespace {

void check_schema(const std::vector<std::string>& expected, const std::vector<std::string>& got) {
  if (expected == got) return;
  for (std::size_t c = 0; c < std::max(expected.size(), got.size()); ++c) {
    const std::string want = c < expected.size() ? expected[c] : "<none>";
    const std::string have = c < got.size() ? got[c] : "<none>";
    if (want != have) {
      throw EvalError(EvalError::Kind::SchemaMismatch,
                      "feature column " + std::to_string(c) + " is \"" + have + "\", model expects \"" +
                          want + "\"");
    }
  }
}

FeatureMatrix features_for(const OhlcvSeries& series, const IndicatorConfig& indicators, ColumnSet set) {
  try {
    return build_features(series, indicators, set);
  } catch (const SeriesTooShort& e) {
    throw EvalError(EvalError::Kind::SeriesTooShort, e.what());
  }
}

}  // namespace

OneStepResult score_scaled_predictions(const ScalerParams& scaler, const WindowedDataset& ds,
                                       std::span<const double> predicted_scaled) {
  if (predicted_scaled.size() != ds.num_samples()) {
    throw EvalError(EvalError::Kind::LengthMismatch, "one prediction per sample required");
  }
  OneStepResult result;
  result.dates = ds.dates;
  for (std::size_t s = 0; s < ds.num_samples(); ++s) {
    result.actual.push_back(inverse_close(scaler, ds.targets[s]));
    result.predicted.push_back(inverse_close(scaler, predicted_scaled[s]));
  }
  result.metrics = compute_metrics(result.actual, result.predicted);
  return result;
}

OneStepResult evaluate_one_step(const LstmModel& model, const WindowedDataset& test_ds) {
  check_schema(model.feature_names, test_ds.feature_names);
  if (test_ds.lookback != model.lookback) {
    throw EvalError(EvalError::Kind::SchemaMismatch,
                    "dataset lookback " + std::to_string(test_ds.lookback) + " differs from model lookback " +
                        std::to_string(model.lookback));
  }
  constexpr std::size_t kChunk = 256;
  const std::size_t stride = test_ds.lookback * test_ds.num_features();
  std::vector<double> predicted;
  predicted.reserve(test_ds.num_samples());
  for (std::size_t begin = 0; begin < test_ds.num_samples(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, test_ds.num_samples() - begin);
    const Vector pred = predict_batch(model, std::span(test_ds.inputs).subspan(begin * stride, n * stride), n);
    predicted.insert(predicted.end(), pred.data(), pred.data() + pred.size());
  }
  return score_scaled_predictions(model.scaler, test_ds, predicted);
}

std::string to_string(Trend trend) {
  switch (trend) {
    case Trend::Up:
      return "up";
    case Trend::Down:
      return "down";
    case Trend::Flat:
      return "flat";
  }
  return "flat";
}

Trend classify_trend(std::span<const double> values) {
  if (values.size() < 2) return Trend::Flat;
  const double first = values.front();
  const double change = values.back() - first;
  if (std::abs(change) <= 0.001 * std::abs(first)) return Trend::Flat;
  return change > 0.0 ? Trend::Up : Trend::Down;
}

ForecastResult forecast_recursive(const LstmModel& model, const OhlcvSeries& series, std::size_t horizon) {
  if (horizon == 0) throw std::invalid_argument("horizon must be >= 1");
  if (series.empty()) throw EvalError(EvalError::Kind::SeriesTooShort, "empty series");
  ForecastResult result;
  result.horizon = horizon;
  std::vector<Bar> bars = series.bars();
  const std::size_t cols = model.num_features();
  for (std::size_t step = 0; step < horizon; ++step) {
    const OhlcvSeries extended = OhlcvSeries::from_bars(series.symbol(), bars);
    const FeatureMatrix features = features_for(extended, model.indicator_config, model.column_set);
    check_schema(model.feature_names, features.column_names);
    if (features.rows() < model.lookback) {
      throw EvalError(EvalError::Kind::SeriesTooShort,
                      "need " + std::to_string(model.lookback) + " feature rows, have " +
                          std::to_string(features.rows()));
    }
    std::vector<double> window;
    window.reserve(model.lookback * cols);
    for (std::size_t r = features.rows() - model.lookback; r < features.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        double v = model.scaler.scale(c, features.at(r, c));
        if (model.clip_scaled) v = std::clamp(v, -1.0, 1.0);
        window.push_back(v);
      }
    }
    const double price = inverse_close(model.scaler, predict(model, window));
    if (!std::isfinite(price) || price <= 0.0) {
      throw EvalError(EvalError::Kind::NonPositiveForecast,
                      "forecast step " + std::to_string(step + 1) + " produced a non-positive price " +
                          format_g17(price));
    }
    result.values.push_back(price);
    const Bar& last = bars.back();
    bars.push_back(Bar{last.date.next_day(), price, price, price, price, price, last.volume});
  }
  result.trend = classify_trend(result.values);
  return result;
}

std::string forecast_to_csv(const ForecastResult& forecast) {
  std::string out = "day_index,predicted_close\n";
  for (std::size_t i = 0; i < forecast.values.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_g17(forecast.values[i]) + "\n";
  }
  return out;
}

void PipelineConfig::validate() const {
  indicators.validate();
  train.validate();
  if (lookback == 0) throw std::invalid_argument("lookback must be >= 1");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0,1)");
  }
  const bool univariate_set = column_set == ColumnSet::Univariate;
  if ((mode == ModelMode::Univariate) != univariate_set) {
    throw std::invalid_argument("mode " + to_string(mode) + " is incompatible with column_set " +
                                to_string(column_set));
  }
}

PreparedData prepare_data(const OhlcvSeries& series, const PipelineConfig& cfg) {
  cfg.validate();
  PreparedData data;
  data.features = build_features(series, cfg.indicators, cfg.column_set);
  if (data.features.rows() <= cfg.lookback) {
    throw DatasetError(DatasetError::Kind::TooFewRows,
                       "need more than " + std::to_string(cfg.lookback) + " feature rows, have " +
                           std::to_string(data.features.rows()));
  }
  const std::size_t samples = data.features.rows() - cfg.lookback;
  const std::size_t train_samples = train_sample_count(samples, cfg.split);
  if (train_samples == 0 || train_samples >= samples) {
    throw DatasetError(DatasetError::Kind::DegenerateSplit,
                       "split of " + std::to_string(samples) + " samples leaves an empty side");
  }
  data.scaler = fit(data.features, RowRange{0, rows_covered(train_samples, cfg.lookback)});
  data.scaled = transform(data.scaler, data.features, cfg.clip_scaled);
  data.all = make_windows(data.scaled, cfg.lookback);
  auto [train_ds, test_ds] = chronological_split(data.all, cfg.split);
  data.train = std::move(train_ds);
  data.test = std::move(test_ds);
  return data;
}

namespace {

LstmModel fresh_model(const FeatureMatrix& features, const ScalerParams& scaler, const PipelineConfig& cfg,
                      const TrainConfig& train_cfg, const std::string& symbol) {
  LstmModel model = init_model(features.cols(), cfg.lookback, train_cfg);
  model.mode = cfg.mode;
  model.feature_names = features.column_names;
  model.scaler = scaler;
  model.column_set = cfg.column_set;
  model.indicator_config = cfg.indicators;
  model.train_fraction = cfg.split.train_fraction;
  model.clip_scaled = cfg.clip_scaled;
  model.symbol = symbol;
  return model;
}

}  // namespace

TrainedPipeline train_pipeline(const OhlcvSeries& series, const PipelineConfig& cfg,
                               const std::function<void(const EpochReport&)>& on_epoch) {
  TrainedPipeline out;
  out.data = prepare_data(series, cfg);
  LstmModel init = fresh_model(out.data.features, out.data.scaler, cfg, cfg.train, series.symbol());
  auto [model, history] = train(std::move(init), out.data.train, cfg.train, on_epoch);
  out.model = std::move(model);
  out.history = std::move(history);
  return out;
}

WindowedDataset model_test_dataset(const LstmModel& model, const OhlcvSeries& series,
                                   std::optional<ColumnSet> column_set, const IndicatorConfig* indicators) {
  const FeatureMatrix features =
      features_for(series, indicators != nullptr ? *indicators : model.indicator_config,
                   column_set.value_or(model.column_set));
  check_schema(model.feature_names, features.column_names);
  const FeatureMatrix scaled = transform(model.scaler, features, model.clip_scaled);
  if (scaled.rows() <= model.lookback) {
    throw EvalError(EvalError::Kind::TooFewRows,
                    "need more than " + std::to_string(model.lookback) + " feature rows, have " +
                        std::to_string(scaled.rows()));
  }
  const WindowedDataset all = make_windows(scaled, model.lookback);
  return chronological_split(all, SplitSpec{model.train_fraction}).second;
}

std::vector<FoldReport> walk_forward(const OhlcvSeries& series, const PipelineConfig& cfg, std::size_t folds) {
  cfg.validate();
  if (folds < 2) throw std::invalid_argument("walk-forward needs at least 2 folds");
  const FeatureMatrix features = build_features(series, cfg.indicators, cfg.column_set);
  if (features.rows() <= cfg.lookback) {
    throw EvalError(EvalError::Kind::TooFewRows, "too few feature rows for the lookback");
  }
  const std::size_t samples = features.rows() - cfg.lookback;
  const auto boundary = [&](std::size_t j) { return j * samples / (folds + 1); };
  for (std::size_t j = 1; j <= folds; ++j) {
    const std::size_t train_end = boundary(j);
    const auto val = static_cast<std::size_t>(
        std::ceil(cfg.train.validation_fraction * static_cast<double>(train_end)));
    if (train_end < 2 || val >= train_end || boundary(j + 1) <= train_end) {
      throw EvalError(EvalError::Kind::TooFewRows,
                      "fold " + std::to_string(j) + " has too few samples (" + std::to_string(samples) +
                          " total for " + std::to_string(folds) + " folds)");
    }
  }

  const auto run_fold = [&](std::size_t j) {
    const std::size_t train_end = boundary(j);
    const std::size_t test_end = boundary(j + 1);
    const ScalerParams scaler = fit(features, RowRange{0, rows_covered(train_end, cfg.lookback)});
    const FeatureMatrix scaled = transform(scaler, features, cfg.clip_scaled);
    const WindowedDataset all = make_windows(scaled, cfg.lookback);
    TrainConfig fold_cfg = cfg.train;
    fold_cfg.seed = cfg.train.seed + j;
    LstmModel init = fresh_model(features, scaler, cfg, fold_cfg, series.symbol());
    const WindowedDataset test_ds = all.slice(train_end, test_end);
    auto trained = train(std::move(init), all.slice(0, train_end), fold_cfg);
    FoldReport report;
    report.fold = j;
    report.metrics = evaluate_one_step(trained.first, test_ds).metrics;
    report.test_start = test_ds.dates.front();
    report.test_end = test_ds.dates.back();
    return report;
  };

  // Folds are independent and seeded per fold, so scheduling does not affect results.
  std::vector<std::future<FoldReport>> pending;
  for (std::size_t j = 1; j <= folds; ++j) pending.push_back(std::async(std::launch::async, run_fold, j));
  std::vector<FoldReport> reports;
  for (auto& f : pending) reports.push_back(f.get());
  return reports;
}

}  // namespace stockcast
