#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "stockcast/scaling.hpp"
#include "synthetic.hpp"

using namespace stockcast;

namespace {

FeatureMatrix matrix_of(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
  FeatureMatrix m;
  m.column_names = names;
  Date d = Date::from_ymd(2020, 1, 1);
  for (const auto& r : rows) {
    m.dates.push_back(d);
    d = d.next_day();
    m.values.insert(m.values.end(), r.begin(), r.end());
  }
  return m;
}

}  // namespace

TEST(Fit, SingleRowAndSimpleRange) {
  const auto m = matrix_of({"Close", "RSI"}, {{5, 30}, {0, 70}, {10, 50}});
  const auto one = fit(m, {0, 1});
  EXPECT_EQ(one.mins, (std::vector<double>{5, 30}));
  EXPECT_EQ(one.maxs, (std::vector<double>{5, 30}));
  const auto all = fit(m, {0, 3});
  EXPECT_EQ(all.mins[0], 0.0);
  EXPECT_EQ(all.maxs[0], 10.0);
  EXPECT_EQ(all.column_names, m.column_names);
}

TEST(Fit, EmptyRangeAndMissingClose) {
  const auto m = matrix_of({"Close"}, {{1}, {2}});
  try {
    fit(m, {1, 1});
    FAIL();
  } catch (const ScalingError& e) {
    EXPECT_EQ(e.kind(), ScalingError::Kind::EmptyRange);
  }
  EXPECT_THROW(fit(m, {0, 5}), ScalingError);
  const auto no_close = fit(matrix_of({"RSI"}, {{1}, {2}}), {0, 2});
  try {
    inverse_close(no_close, 0.5);
    FAIL();
  } catch (const ScalingError& e) {
    EXPECT_EQ(e.kind(), ScalingError::Kind::MissingCloseColumn);
  }
}

TEST(Transform, MidpointEndpointsDegenerate) {
  const auto m = matrix_of({"Close", "Flat"}, {{0, 3}, {10, 3}, {5, 3}});
  const auto p = fit(m, {0, 2});
  const auto t = transform(p, m);
  EXPECT_EQ(t.at(0, 0), -1.0);
  EXPECT_EQ(t.at(1, 0), 1.0);
  EXPECT_EQ(t.at(2, 0), 0.0);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(t.at(r, 1), 0.0);
  EXPECT_EQ(p.unscale(1, 0.0), 3.0);
  EXPECT_EQ(inverse_close(p, 1.0), 10.0);
  EXPECT_EQ(inverse_close(p, -1.0), 0.0);
}

TEST(Transform, OutOfRangePassesThroughUnlessClipped) {
  const auto train = matrix_of({"Close"}, {{10}, {20}, {30}});
  const auto p = fit(train, {0, 2});
  EXPECT_DOUBLE_EQ(transform(p, train).at(2, 0), 3.0);
  EXPECT_EQ(transform(p, train, true).at(2, 0), 1.0);
}

TEST(Transform, ColumnMismatchNamesColumn) {
  const auto a = matrix_of({"Close", "RSI"}, {{1, 2}, {3, 4}});
  const auto b = matrix_of({"Close", "CCI"}, {{1, 2}, {3, 4}});
  const auto p = fit(a, {0, 2});
  try {
    transform(p, b);
    FAIL();
  } catch (const ScalingError& e) {
    EXPECT_EQ(e.kind(), ScalingError::Kind::ColumnMismatch);
    EXPECT_NE(std::string(e.what()).find("CCI"), std::string::npos);
  }
}

TEST(Transform, RoundTripAndMonotone) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(50.0, 3000.0);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i < 10000; ++i) rows.push_back({dist(rng)});
  const auto m = matrix_of({"Close"}, rows);
  const auto p = fit(m, {0, 8000});
  const auto t = transform(p, m);
  double lo = 1e9, hi = -1e9;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double x = m.at(r, 0);
    const double back = inverse_close(p, t.at(r, 0));
    EXPECT_LE(std::fabs(back - x), 1e-9 * std::fabs(x));
    if (r < 8000) {
      lo = std::min(lo, t.at(r, 0));
      hi = std::max(hi, t.at(r, 0));
    }
  }
  EXPECT_EQ(lo, -1.0);
  EXPECT_EQ(hi, 1.0);
  for (double x = 0.0; x < 4000.0; x += 17.3) EXPECT_LT(p.scale(0, x), p.scale(0, x + 0.01));
}
