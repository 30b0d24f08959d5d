#pragma once

#include <optional>
#include <vector>

#include "stockcast/indicators.hpp"
#include "stockcast/lstm.hpp"
#include "stockcast/market_data.hpp"

// Deliberately naive recomputations used to cross-check the library. They
// share no code with it.
namespace stockcast::oracle {

using Series = std::vector<std::optional<double>>;

Series sma(const std::vector<double>& x, int n);
Series cma(const std::vector<double>& x);
Series wma(const std::vector<double>& x, int n);
Series ema(const std::vector<double>& x, double alpha);
Series rsi(const std::vector<double>& x, int n);
Series cci(const OhlcvSeries& s, int n);
Series ad(const OhlcvSeries& s);
Series stochastic_k(const OhlcvSeries& s, int n);
Series stochastic_d(const Series& k, int m);
struct Macd {
  Series diff, signal, histogram;
};
Macd macd(const std::vector<double>& x, int fast, int slow, int signal_n);

// Largest |a - b| over positions where both are defined; +inf if the
// definedness patterns differ.
double max_abs_diff(const Series& a, const Series& b);
// Same, relative to max(1, |b|).
double max_rel_diff(const Series& a, const Series& b);

// Loss 0.5 * sum(pred^2) over a batch of windows, by plain forward passes.
double probe_loss(const LstmModel& model, const std::vector<double>& inputs, std::size_t batch);

struct GradCheckResult {
  std::size_t checked = 0;
  std::size_t failures = 0;
  double worst_rel = 0.0;
};

// Compares backward() with central differences for every parameter of the
// model. Relative error is |a - n| / max(|a|, |n|, floor).
GradCheckResult gradient_check(LstmModel model, const std::vector<double>& inputs, std::size_t batch,
                               double h = 1e-5, double tol = 1e-4, double floor = 1e-6);

}  // namespace stockcast::oracle
