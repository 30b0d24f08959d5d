#include "synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace stockcast::testing {

OhlcvSeries random_walk_series(std::size_t n, std::uint64_t seed, const std::string& symbol) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> step(0.0, 0.012);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Bar> bars;
  bars.reserve(n);
  Date date = Date::from_ymd(2010, 1, 4);
  double close = 100.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double open = close * (1.0 + 0.004 * (unit(rng) - 0.5));
    close = close * std::exp(step(rng));
    Bar bar;
    bar.date = date;
    bar.open = open;
    bar.close = close;
    bar.high = std::max(open, close) * (1.0 + 0.01 * unit(rng));
    bar.low = std::min(open, close) * (1.0 - 0.01 * unit(rng));
    bar.adj_close = close * 0.98;
    bar.volume = std::floor(1e5 + 9e5 * unit(rng));
    bars.push_back(bar);
    date = date.next_day();
  }
  return OhlcvSeries::from_bars(symbol, std::move(bars));
}

OhlcvSeries series_from_closes(const std::vector<double>& closes, const std::string& symbol) {
  std::vector<Bar> bars;
  bars.reserve(closes.size());
  Date date = Date::from_ymd(2010, 1, 4);
  for (std::size_t t = 0; t < closes.size(); ++t) {
    Bar bar;
    bar.date = date;
    bar.close = closes[t];
    bar.open = t == 0 ? closes[t] : closes[t - 1];
    bar.high = std::max(bar.open, bar.close) * 1.005;
    bar.low = std::min(bar.open, bar.close) * 0.995;
    bar.adj_close = closes[t];
    bar.volume = 1e6;
    bars.push_back(bar);
    date = date.next_day();
  }
  return OhlcvSeries::from_bars(symbol, std::move(bars));
}

std::vector<double> sine_closes(std::size_t n, double period) {
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    out[t] = 100.0 + 20.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / period);
  }
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("stockcast_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

const char* const kRelianceSampleCsv =
    "Date,Open,High,Low,Close,Adj Close,Volume\n"
    "2021-12-24,2370.000000,2392.000000,2337.550049,2372.800049,2372.800049,3639616.0\n"
    "2021-12-27,2361.550049,2378.000000,2348.100098,2370.250000,2370.250000,1853948.0\n"
    "2021-12-28,2375.600098,2404.850098,2373.050049,2398.399902,2398.399902,2941883.0\n"
    "2021-12-29,2391.000000,2419.000000,2382.100098,2402.500000,2402.500000,7118779.0\n"
    "2021-12-30,2400.000000,2404.949951,2345.600098,2359.100098,2359.100098,13537254.0\n";

}  // namespace stockcast::testing
