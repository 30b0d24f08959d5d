#include "models.hpp"

#include "stockcast/dataset.hpp"
#include "stockcast/indicators.hpp"
#include "stockcast/scaling.hpp"

namespace stockcast::testing {

LstmModel persistence_model(const OhlcvSeries& series, std::size_t lookback, double train_fraction) {
  const FeatureMatrix features = build_features(series, IndicatorConfig{}, ColumnSet::Univariate);
  const std::size_t samples = features.rows() - lookback;
  const std::size_t train = train_sample_count(samples, SplitSpec{train_fraction});

  constexpr double eps = 1e-4;
  LstmModel m;
  m.mode = ModelMode::Univariate;
  m.column_set = ColumnSet::Univariate;
  m.lookback = lookback;
  m.feature_names = {"Close"};
  m.scaler = fit(features, RowRange{0, rows_covered(train, lookback)});
  m.train_fraction = train_fraction;
  m.symbol = series.symbol();
  m.train_config.hidden_sizes = {1};
  auto layer = LstmLayerParams::zeros(1, 1);
  layer.b_f(0) = -40.0;
  layer.b_i(0) = 40.0;
  layer.b_o(0) = 40.0;
  layer.w_gx(0, 0) = eps;
  m.layers.push_back(layer);
  m.head_weights = Vector::Constant(1, 1.0 / eps);
  m.head_bias = 0.0;
  return m;
}

}  // namespace stockcast::testing
