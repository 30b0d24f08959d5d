#include "stockcast/indicators.hpp"

#include <algorithm>
#include <cmath>

#include "stockcast/number_format.hpp"

namespace stockcast {

namespace {

void require_period(int n, const char* what) {
  if (n < 1) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

std::size_t window(int n) { return static_cast<std::size_t>(n); }

}  // namespace

void IndicatorConfig::validate() const {
  if (sma_periods.empty()) throw std::invalid_argument("sma_periods must not be empty");
  for (int p : sma_periods) require_period(p, "sma_periods");
  require_period(wma_period, "wma_period");
  require_period(rsi_period, "rsi_period");
  require_period(cci_period, "cci_period");
  require_period(stoch_k_period, "stoch_k_period");
  require_period(stoch_d_period, "stoch_d_period");
  require_period(macd_fast, "macd_fast");
  require_period(macd_slow, "macd_slow");
  require_period(macd_signal, "macd_signal");
  if (macd_fast >= macd_slow) throw std::invalid_argument("macd_fast must be < macd_slow");
  if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) throw std::invalid_argument("ema_alpha must be in (0,1)");
}

std::string to_string(ColumnSet set) {
  switch (set) {
    case ColumnSet::Univariate:
      return "univariate";
    case ColumnSet::PaperMultivariate:
      return "paper_multivariate";
    case ColumnSet::Table4All:
      return "table4_all";
  }
  return "unknown";
}

std::optional<ColumnSet> parse_column_set(std::string_view text) {
  if (text == "univariate") return ColumnSet::Univariate;
  if (text == "paper_multivariate") return ColumnSet::PaperMultivariate;
  if (text == "table4_all") return ColumnSet::Table4All;
  return std::nullopt;
}

std::optional<std::size_t> FeatureMatrix::column_index(std::string_view name) const {
  const auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - column_names.begin());
}

namespace indicators {

IndicatorSeries sma(std::span<const double> closes, int n) {
  require_period(n, "sma window");
  const std::size_t w = window(n);
  IndicatorSeries out(closes.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < closes.size(); ++t) {
    sum += closes[t];
    if (t >= w) sum -= closes[t - w];
    if (t + 1 >= w) out[t] = sum / static_cast<double>(w);
  }
  return out;
}

IndicatorSeries cma(std::span<const double> closes) {
  IndicatorSeries out(closes.size());
  double prefix = 0.0;
  for (std::size_t t = 0; t < closes.size(); ++t) {
    prefix += closes[t];
    out[t] = prefix / static_cast<double>(t + 1);
  }
  return out;
}

IndicatorSeries wma(std::span<const double> closes, int n) {
  require_period(n, "wma window");
  const std::size_t w = window(n);
  const double denom = static_cast<double>(w * (w + 1) / 2);
  IndicatorSeries out(closes.size());
  for (std::size_t t = w - 1; t < closes.size(); ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w; ++i) acc += static_cast<double>(w - i) * closes[t - i];
    out[t] = acc / denom;
  }
  return out;
}

IndicatorSeries ema(std::span<const double> closes, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("ema alpha must be in (0,1)");
  IndicatorSeries out(closes.size());
  if (closes.empty()) return out;
  double value = closes[0];
  out[0] = value;
  for (std::size_t t = 1; t < closes.size(); ++t) {
    // prev + alpha * (x - prev) keeps a constant input exactly constant.
    value += alpha * (closes[t] - value);
    out[t] = value;
  }
  return out;
}

IndicatorSeries rsi(std::span<const double> closes, int n) {
  require_period(n, "rsi period");
  const std::size_t w = window(n);
  IndicatorSeries out(closes.size());
  if (closes.size() < w + 1) return out;

  const auto score = [](double avg_gain, double avg_loss) {
    if (avg_loss == 0.0) return avg_gain == 0.0 ? 50.0 : 100.0;
    if (avg_gain == 0.0) return 0.0;
    return 100.0 - 100.0 / (1.0 + avg_gain / avg_loss);
  };

  double gain = 0.0;
  double loss = 0.0;
  for (std::size_t t = 1; t <= w; ++t) {
    const double change = closes[t] - closes[t - 1];
    if (change > 0.0) gain += change;
    if (change < 0.0) loss -= change;
  }
  gain /= static_cast<double>(w);
  loss /= static_cast<double>(w);
  out[w] = score(gain, loss);
  const double keep = static_cast<double>(w - 1);
  for (std::size_t t = w + 1; t < closes.size(); ++t) {
    const double change = closes[t] - closes[t - 1];
    gain = (gain * keep + (change > 0.0 ? change : 0.0)) / static_cast<double>(w);
    loss = (loss * keep + (change < 0.0 ? -change : 0.0)) / static_cast<double>(w);
    out[t] = score(gain, loss);
  }
  return out;
}

IndicatorSeries cci(const OhlcvSeries& series, int n) {
  require_period(n, "cci period");
  const std::size_t w = window(n);
  const auto& bars = series.bars();
  std::vector<double> typical(bars.size());
  for (std::size_t t = 0; t < bars.size(); ++t) {
    typical[t] = (bars[t].high + bars[t].low + bars[t].close) / 3.0;
  }
  IndicatorSeries out(bars.size());
  for (std::size_t t = w - 1; t < bars.size(); ++t) {
    // Offsets from the current typical price; exact zeros for flat windows.
    const double ref = typical[t];
    double offset_sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) offset_sum += typical[t - i] - ref;
    const double mean_offset = offset_sum / static_cast<double>(w);
    double deviation = 0.0;
    for (std::size_t i = 0; i < w; ++i) deviation += std::abs(typical[t - i] - ref - mean_offset);
    deviation /= static_cast<double>(w);
    out[t] = deviation == 0.0 ? 0.0 : -mean_offset / (0.015 * deviation);
  }
  return out;
}

IndicatorSeries ad(const OhlcvSeries& series) {
  const auto& bars = series.bars();
  IndicatorSeries out(bars.size());
  for (std::size_t t = 1; t < bars.size(); ++t) {
    const double range = bars[t].high - bars[t].low;
    out[t] = range == 0.0 ? 0.0 : (bars[t].high - bars[t - 1].close) / range;
  }
  return out;
}

IndicatorSeries stochastic_k(const OhlcvSeries& series, int n) {
  require_period(n, "stochastic K period");
  const std::size_t w = window(n);
  const auto& bars = series.bars();
  IndicatorSeries out(bars.size());
  for (std::size_t t = w - 1; t < bars.size(); ++t) {
    double lowest = bars[t].low;
    double highest = bars[t].high;
    for (std::size_t i = 1; i < w; ++i) {
      lowest = std::min(lowest, bars[t - i].low);
      highest = std::max(highest, bars[t - i].high);
    }
    out[t] = highest == lowest ? 50.0 : (bars[t].close - lowest) / (highest - lowest) * 100.0;
  }
  return out;
}

IndicatorSeries stochastic_d(const IndicatorSeries& k_values, int m) {
  require_period(m, "stochastic D period");
  const std::size_t w = window(m);
  IndicatorSeries out(k_values.size());
  std::size_t run = 0;  // consecutive defined K values ending at t
  for (std::size_t t = 0; t < k_values.size(); ++t) {
    run = k_values[t] ? run + 1 : 0;
    if (run < w) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < w; ++i) sum += *k_values[t - i];
    out[t] = sum / static_cast<double>(w);
  }
  return out;
}

MacdLines macd(std::span<const double> closes, int fast, int slow, int signal_n) {
  require_period(fast, "macd_fast");
  require_period(slow, "macd_slow");
  require_period(signal_n, "macd_signal");
  if (fast >= slow) throw std::invalid_argument("macd_fast must be < macd_slow");
  const auto fast_ema = ema(closes, 2.0 / (fast + 1.0));
  const auto slow_ema = ema(closes, 2.0 / (slow + 1.0));

  MacdLines lines;
  lines.diff.resize(closes.size());
  lines.signal.resize(closes.size());
  lines.histogram.resize(closes.size());
  const double k = 2.0 / (signal_n + 1.0);
  double signal = 0.0;
  for (std::size_t t = 0; t < closes.size(); ++t) {
    const double diff = *fast_ema[t] - *slow_ema[t];
    signal = t == 0 ? diff : signal + k * (diff - signal);
    lines.diff[t] = diff;
    lines.signal[t] = signal;
    lines.histogram[t] = diff - signal;
  }
  return lines;
}

}  // namespace indicators

namespace {

std::string ema_column_name(double alpha) { return "EMA_" + format_shortest(alpha); }

}  // namespace

std::vector<std::string> feature_columns(const IndicatorConfig& cfg, ColumnSet set) {
  std::vector<std::string> names{"Close"};
  if (set == ColumnSet::Univariate) return names;
  names.emplace_back("CMA");
  for (int p : cfg.sma_periods) names.push_back("SMA" + std::to_string(p));
  names.push_back(ema_column_name(cfg.ema_alpha));
  for (const char* name : {"RSI", "K%", "D%", "CCI", "macd", "macd_s", "macd_h"}) {
    names.emplace_back(name);
  }
  if (set == ColumnSet::Table4All) {
    names.push_back("WMA" + std::to_string(cfg.wma_period));
    names.emplace_back("AD");
  }
  return names;
}

std::size_t warmup_rows(const IndicatorConfig& cfg, ColumnSet set) {
  if (set == ColumnSet::Univariate) return 0;
  std::size_t warmup = 0;
  for (int p : cfg.sma_periods) warmup = std::max(warmup, window(p) - 1);
  warmup = std::max(warmup, window(cfg.rsi_period));
  warmup = std::max(warmup, window(cfg.cci_period) - 1);
  warmup = std::max(warmup, window(cfg.stoch_k_period) - 1 + window(cfg.stoch_d_period) - 1);
  if (set == ColumnSet::Table4All) {
    warmup = std::max(warmup, window(cfg.wma_period) - 1);
    warmup = std::max<std::size_t>(warmup, 1);
  }
  return warmup;
}

FeatureMatrix build_features(const OhlcvSeries& series, const IndicatorConfig& cfg, ColumnSet set) {
  cfg.validate();
  const std::size_t warmup = warmup_rows(cfg, set);
  if (series.size() <= warmup) throw SeriesTooShort(warmup + 1, series.size());

  const std::vector<double> closes = series.closes();
  std::vector<IndicatorSeries> columns;
  IndicatorSeries close_column(closes.begin(), closes.end());
  columns.push_back(std::move(close_column));
  if (set != ColumnSet::Univariate) {
    columns.push_back(indicators::cma(closes));
    for (int p : cfg.sma_periods) columns.push_back(indicators::sma(closes, p));
    columns.push_back(indicators::ema(closes, cfg.ema_alpha));
    columns.push_back(indicators::rsi(closes, cfg.rsi_period));
    auto k = indicators::stochastic_k(series, cfg.stoch_k_period);
    auto d = indicators::stochastic_d(k, cfg.stoch_d_period);
    columns.push_back(std::move(k));
    columns.push_back(std::move(d));
    columns.push_back(indicators::cci(series, cfg.cci_period));
    auto lines = indicators::macd(closes, cfg.macd_fast, cfg.macd_slow, cfg.macd_signal);
    columns.push_back(std::move(lines.diff));
    columns.push_back(std::move(lines.signal));
    columns.push_back(std::move(lines.histogram));
    if (set == ColumnSet::Table4All) {
      columns.push_back(indicators::wma(closes, cfg.wma_period));
      columns.push_back(indicators::ad(series));
    }
  }

  FeatureMatrix matrix;
  matrix.column_names = feature_columns(cfg, set);
  matrix.warmup_dropped = warmup;
  const std::size_t rows = series.size() - warmup;
  matrix.dates.reserve(rows);
  matrix.values.reserve(rows * columns.size());
  for (std::size_t t = warmup; t < series.size(); ++t) {
    matrix.dates.push_back(series[t].date);
    for (const auto& column : columns) {
      const auto& v = column[t];
      if (!v || !std::isfinite(*v)) {
        throw std::logic_error("indicator undefined after warmup at " + series[t].date.to_string());
      }
      matrix.values.push_back(*v);
    }
  }
  return matrix;
}

std::string feature_matrix_to_csv(const FeatureMatrix& matrix) {
  std::string out = "Date";
  for (const auto& name : matrix.column_names) {
    out += ',';
    out += name;
  }
  out += '\n';
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    out += matrix.dates[r].to_string();
    for (double v : matrix.row(r)) {
      out += ',';
      out += format_g17(v);
    }
    out += '\n';
  }
  return out;
}

}  // namespace stockcast
