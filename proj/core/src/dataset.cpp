#include "stockcast/dataset.hpp"

#include <cmath>

namespace stockcast {

WindowedDataset WindowedDataset::slice(std::size_t begin, std::size_t end) const {
  WindowedDataset out;
  out.lookback = lookback;
  out.feature_names = feature_names;
  const std::size_t stride = lookback * num_features();
  out.inputs.assign(inputs.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                    inputs.begin() + static_cast<std::ptrdiff_t>(end * stride));
  out.targets.assign(targets.begin() + static_cast<std::ptrdiff_t>(begin),
                     targets.begin() + static_cast<std::ptrdiff_t>(end));
  out.dates.assign(dates.begin() + static_cast<std::ptrdiff_t>(begin),
                   dates.begin() + static_cast<std::ptrdiff_t>(end));
  out.target_rows.assign(target_rows.begin() + static_cast<std::ptrdiff_t>(begin),
                         target_rows.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

WindowedDataset make_windows(const FeatureMatrix& scaled, std::size_t lookback) {
  if (lookback == 0) throw std::invalid_argument("lookback must be >= 1");
  if (scaled.rows() <= lookback) {
    throw DatasetError(DatasetError::Kind::TooFewRows,
                       "need more than " + std::to_string(lookback) + " rows, have " +
                           std::to_string(scaled.rows()));
  }
  const auto close = scaled.column_index("Close");
  if (!close) throw DatasetError(DatasetError::Kind::MissingCloseColumn, "matrix has no Close column");

  WindowedDataset ds;
  ds.lookback = lookback;
  ds.feature_names = scaled.column_names;
  const std::size_t samples = scaled.rows() - lookback;
  const std::size_t cols = scaled.cols();
  ds.inputs.reserve(samples * lookback * cols);
  ds.targets.reserve(samples);
  for (std::size_t t = lookback; t < scaled.rows(); ++t) {
    const auto first = scaled.values.begin() + static_cast<std::ptrdiff_t>((t - lookback) * cols);
    ds.inputs.insert(ds.inputs.end(), first, first + static_cast<std::ptrdiff_t>(lookback * cols));
    ds.targets.push_back(scaled.at(t, *close));
    ds.dates.push_back(scaled.dates[t]);
    ds.target_rows.push_back(t);
  }
  return ds;
}

std::size_t train_sample_count(std::size_t num_samples, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0,1)");
  }
  return static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(num_samples)));
}

std::pair<WindowedDataset, WindowedDataset> chronological_split(const WindowedDataset& ds,
                                                                const SplitSpec& spec) {
  const std::size_t n = ds.num_samples();
  const std::size_t k = train_sample_count(n, spec);
  if (k == 0 || k >= n) {
    throw DatasetError(DatasetError::Kind::DegenerateSplit,
                       "split of " + std::to_string(n) + " samples leaves an empty side");
  }
  return {ds.slice(0, k), ds.slice(k, n)};
}

std::size_t rows_covered(std::size_t train_samples, std::size_t lookback) {
  return train_samples + lookback;
}

bool check_no_lookahead(const WindowedDataset& ds, const FeatureMatrix& scaled) {
  const auto close = scaled.column_index("Close");
  if (!close || ds.feature_names != scaled.column_names) return false;
  const std::size_t cols = scaled.cols();
  for (std::size_t s = 0; s < ds.num_samples(); ++s) {
    const std::size_t target = ds.target_rows[s];
    if (target < ds.lookback || target >= scaled.rows()) return false;
    if (ds.dates[s] != scaled.dates[target]) return false;
    if (ds.targets[s] != scaled.at(target, *close)) return false;
    const auto window = ds.window(s);
    for (std::size_t step = 0; step < ds.lookback; ++step) {
      const auto row = scaled.row(target - ds.lookback + step);
      for (std::size_t c = 0; c < cols; ++c) {
        if (window[step * cols + c] != row[c]) return false;
      }
    }
    if (s > 0 && !(ds.dates[s - 1] < ds.dates[s])) return false;
  }
  return true;
}

}  // namespace stockcast
