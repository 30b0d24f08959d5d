#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "stockcast/indicators.hpp"

namespace stockcast {

class ScalingError : public std::runtime_error {
 public:
  enum class Kind { EmptyRange, ColumnMismatch, MissingCloseColumn };
  ScalingError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Half-open row interval [begin, end).
struct RowRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end > begin ? end - begin : 0; }
};

// Per-column min/max mapping onto [-1, +1].
struct ScalerParams {
  std::vector<std::string> column_names;
  std::vector<double> mins;
  std::vector<double> maxs;

  // Maps one value of column `col`. Degenerate columns (max == min) map to 0.
  double scale(std::size_t col, double x) const;
  double unscale(std::size_t col, double scaled) const;
};

ScalerParams fit(const FeatureMatrix& matrix, RowRange rows);

// Values outside the fitted range land outside [-1, 1] unless `clip` is set.
FeatureMatrix transform(const ScalerParams& params, const FeatureMatrix& matrix, bool clip = false);

double inverse_close(const ScalerParams& params, double scaled_value);

}  // namespace stockcast
