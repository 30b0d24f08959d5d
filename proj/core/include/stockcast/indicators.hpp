#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "stockcast/market_data.hpp"

namespace stockcast {

// One value per input bar; std::nullopt where the indicator is not yet
// defined (warmup).
using IndicatorSeries = std::vector<std::optional<double>>;

struct IndicatorConfig {
  std::vector<int> sma_periods{10, 50, 200};
  int wma_period = 10;
  double ema_alpha = 0.1;
  int rsi_period = 14;
  int cci_period = 20;
  int stoch_k_period = 14;
  int stoch_d_period = 10;
  int macd_fast = 12;
  int macd_slow = 26;
  int macd_signal = 9;

  // Throws std::invalid_argument naming the first bad key.
  void validate() const;
};

enum class ColumnSet { Univariate, PaperMultivariate, Table4All };

std::string to_string(ColumnSet set);
std::optional<ColumnSet> parse_column_set(std::string_view text);

struct FeatureMatrix {
  std::vector<Date> dates;
  std::vector<std::string> column_names;
  std::vector<double> values;  // row-major, rows() x cols()
  std::size_t warmup_dropped = 0;

  std::size_t rows() const { return dates.size(); }
  std::size_t cols() const { return column_names.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
  double& at(std::size_t row, std::size_t col) { return values[row * cols() + col]; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
  // Index of a named column, or nullopt.
  std::optional<std::size_t> column_index(std::string_view name) const;
};

class SeriesTooShort : public std::runtime_error {
 public:
  SeriesTooShort(std::size_t needed, std::size_t have)
      : std::runtime_error("series too short: need " + std::to_string(needed) + " bars, have " +
                           std::to_string(have)),
        needed(needed),
        have(have) {}
  std::size_t needed;
  std::size_t have;
};

namespace indicators {

IndicatorSeries sma(std::span<const double> closes, int n);
IndicatorSeries cma(std::span<const double> closes);
// Weight n on the newest close, 1 on the oldest.
IndicatorSeries wma(std::span<const double> closes, int n);
// Seeded with the first close.
IndicatorSeries ema(std::span<const double> closes, double alpha);
// Wilder smoothing. Flat window -> 50, no losses -> 100, no gains -> 0.
IndicatorSeries rsi(std::span<const double> closes, int n);
// Zero mean deviation -> 0.
IndicatorSeries cci(const OhlcvSeries& series, int n);
// Per-bar (H_t - C_{t-1}) / (H_t - L_t); H == L -> 0.
IndicatorSeries ad(const OhlcvSeries& series);
// HH == LL -> 50.
IndicatorSeries stochastic_k(const OhlcvSeries& series, int n);
// m-period mean of K%; defined once m consecutive K values exist.
IndicatorSeries stochastic_d(const IndicatorSeries& k_values, int m);

struct MacdLines {
  IndicatorSeries diff;
  IndicatorSeries signal;
  IndicatorSeries histogram;
};
MacdLines macd(std::span<const double> closes, int fast, int slow, int signal_n);

}  // namespace indicators

// Column names produced for a set under a config, in output order.
std::vector<std::string> feature_columns(const IndicatorConfig& cfg, ColumnSet set);

// Leading rows that build_features drops for a set under a config.
std::size_t warmup_rows(const IndicatorConfig& cfg, ColumnSet set);

// Computes the requested columns and drops every leading row where any of
// them is undefined. Throws SeriesTooShort when no row survives.
FeatureMatrix build_features(const OhlcvSeries& series, const IndicatorConfig& cfg, ColumnSet set);

// CSV with a Date column followed by column_names, values as %.17g.
std::string feature_matrix_to_csv(const FeatureMatrix& matrix);

}  // namespace stockcast
