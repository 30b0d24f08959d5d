#include "stockcast/scaling.hpp"

#include <algorithm>

namespace stockcast {

double ScalerParams::scale(std::size_t col, double x) const {
  const double lo = mins[col];
  const double hi = maxs[col];
  if (hi == lo) return 0.0;
  return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

double ScalerParams::unscale(std::size_t col, double scaled) const {
  const double lo = mins[col];
  const double hi = maxs[col];
  if (hi == lo) return lo;
  return (scaled + 1.0) / 2.0 * (hi - lo) + lo;
}

ScalerParams fit(const FeatureMatrix& matrix, RowRange rows) {
  if (rows.size() == 0 || rows.end > matrix.rows()) {
    throw ScalingError(ScalingError::Kind::EmptyRange,
                       "fit range [" + std::to_string(rows.begin) + ", " + std::to_string(rows.end) +
                           ") is empty or outside " + std::to_string(matrix.rows()) + " rows");
  }
  ScalerParams params;
  params.column_names = matrix.column_names;
  const auto first = matrix.row(rows.begin);
  params.mins.assign(first.begin(), first.end());
  params.maxs.assign(first.begin(), first.end());
  for (std::size_t r = rows.begin + 1; r < rows.end; ++r) {
    const auto row = matrix.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      params.mins[c] = std::min(params.mins[c], row[c]);
      params.maxs[c] = std::max(params.maxs[c], row[c]);
    }
  }
  return params;
}

FeatureMatrix transform(const ScalerParams& params, const FeatureMatrix& matrix, bool clip) {
  if (params.column_names != matrix.column_names) {
    std::string detail;
    for (std::size_t c = 0; c < std::max(params.column_names.size(), matrix.cols()); ++c) {
      const std::string expected = c < params.column_names.size() ? params.column_names[c] : "<none>";
      const std::string got = c < matrix.cols() ? matrix.column_names[c] : "<none>";
      if (expected != got) {
        detail = "column " + std::to_string(c) + ": expected " + expected + ", got " + got;
        break;
      }
    }
    throw ScalingError(ScalingError::Kind::ColumnMismatch, "scaler column mismatch, " + detail);
  }
  FeatureMatrix out = matrix;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) {
      double v = params.scale(c, out.at(r, c));
      if (clip) v = std::clamp(v, -1.0, 1.0);
      out.at(r, c) = v;
    }
  }
  return out;
}

double inverse_close(const ScalerParams& params, double scaled_value) {
  const auto it = std::find(params.column_names.begin(), params.column_names.end(), "Close");
  if (it == params.column_names.end()) {
    throw ScalingError(ScalingError::Kind::MissingCloseColumn, "scaler has no Close column");
  }
  return params.unscale(static_cast<std::size_t>(it - params.column_names.begin()), scaled_value);
}

}  // namespace stockcast
