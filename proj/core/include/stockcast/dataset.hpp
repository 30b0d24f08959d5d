#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "stockcast/indicators.hpp"

namespace stockcast {

class DatasetError : public std::runtime_error {
 public:
  enum class Kind { TooFewRows, DegenerateSplit, MissingCloseColumn };
  DatasetError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Sample s has inputs from matrix rows [target_rows[s] - lookback, target_rows[s])
// and targets the Close column at row target_rows[s].
struct WindowedDataset {
  std::size_t lookback = 0;
  std::vector<std::string> feature_names;
  std::vector<double> inputs;  // (num_samples, lookback, num_features), row-major
  std::vector<double> targets;
  std::vector<Date> dates;
  std::vector<std::size_t> target_rows;

  std::size_t num_samples() const { return targets.size(); }
  std::size_t num_features() const { return feature_names.size(); }
  // lookback x num_features block for one sample.
  std::span<const double> window(std::size_t sample) const {
    const std::size_t stride = lookback * num_features();
    return {inputs.data() + sample * stride, stride};
  }
  // Samples [begin, end) as an independent dataset.
  WindowedDataset slice(std::size_t begin, std::size_t end) const;
};

struct SplitSpec {
  double train_fraction = 0.80;
};

WindowedDataset make_windows(const FeatureMatrix& scaled, std::size_t lookback);

// floor(train_fraction * num_samples) leading samples go to train.
std::pair<WindowedDataset, WindowedDataset> chronological_split(const WindowedDataset& ds,
                                                                const SplitSpec& spec);

// Number of training samples chronological_split will produce for a dataset
// of `num_samples` samples.
std::size_t train_sample_count(std::size_t num_samples, const SplitSpec& spec);

// Matrix rows touched (inputs or targets) by the first `train_samples`
// samples. The scaler is fit on exactly these rows.
std::size_t rows_covered(std::size_t train_samples, std::size_t lookback);

// True iff, for every sample, the input block equals matrix rows
// [target - lookback, target), the target equals the Close value at the target
// row, and target dates ascend. `scaled` must be the matrix `ds` was built from.
bool check_no_lookahead(const WindowedDataset& ds, const FeatureMatrix& scaled);

}  // namespace stockcast
