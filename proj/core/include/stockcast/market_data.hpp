#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stockcast {

// Calendar date of a trading day. Used purely as an ordered label.
class Date {
 public:
  constexpr Date() = default;

  static Date from_ymd(int year, unsigned month, unsigned day);
  // Accepts exactly YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view text);

  std::string to_string() const;
  Date next_day() const { return Date{days_ + 1}; }
  std::int32_t days_since_epoch() const { return days_; }

  auto operator<=>(const Date&) const = default;

 private:
  explicit constexpr Date(std::int32_t days) : days_(days) {}
  std::int32_t days_ = 0;
};

struct Bar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double adj_close = 0.0;
  double volume = 0.0;
};

class MarketDataError : public std::runtime_error {
 public:
  enum class Kind {
    MalformedHeader,
    MalformedRow,
    NonAscendingDates,
    InvariantViolation,
    EmptySeries,
    InvalidRange,
    NetworkError,
    HttpStatus,
    UnexpectedSchema,
  };

  MarketDataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

  // Location details; only the ones relevant to the kind are set.
  std::size_t line = 0;
  std::optional<Date> date;
  std::string field;
  int http_status = 0;

 private:
  Kind kind_;
};

// Date-ascending daily bars for one symbol. Construct through parse_csv or
// OhlcvSeries::from_bars, both of which validate.
class OhlcvSeries {
 public:
  OhlcvSeries() = default;

  // Validates ordering and the per-bar invariants. Empty input is allowed
  // here (slices may be empty); parse_csv rejects empty files separately.
  static OhlcvSeries from_bars(std::string symbol, std::vector<Bar> bars);

  const std::string& symbol() const { return symbol_; }
  const std::vector<Bar>& bars() const { return bars_; }
  std::size_t size() const { return bars_.size(); }
  bool empty() const { return bars_.empty(); }
  const Bar& operator[](std::size_t i) const { return bars_[i]; }
  const Bar& front() const { return bars_.front(); }
  const Bar& back() const { return bars_.back(); }

  std::vector<double> closes() const;

  // Rows dropped because a field held Yahoo's "null" marker.
  std::size_t dropped_null_rows() const { return dropped_null_rows_; }
  // Bars with zero volume and open == high == low == close (likely holiday
  // artifacts). They are kept.
  std::size_t flat_zero_volume_bars() const { return flat_zero_volume_bars_; }

 private:
  friend OhlcvSeries parse_csv(std::istream& in, std::string symbol);

  std::string symbol_;
  std::vector<Bar> bars_;
  std::size_t dropped_null_rows_ = 0;
  std::size_t flat_zero_volume_bars_ = 0;
};

inline constexpr std::string_view kYahooHeader = "Date,Open,High,Low,Close,Adj Close,Volume";

OhlcvSeries parse_csv(std::istream& in, std::string symbol);
OhlcvSeries parse_csv(std::string_view text, std::string symbol);
OhlcvSeries load_csv_file(const std::string& path, std::string symbol);

// Writes the series in the same 7-column schema using shortest round-trip
// number formatting, so parse_csv(to_csv(s)) reproduces every field exactly.
std::string to_csv(const OhlcvSeries& series);

// Bars with start <= date <= end, in order. Throws InvalidRange if start > end.
OhlcvSeries slice_by_date(const OhlcvSeries& series, Date start, Date end);

// Copy of the series with adj_close substituted for close. Bar invariants are
// not re-checked since adjusted prices need not sit inside [low, high].
OhlcvSeries with_adj_close_as_close(const OhlcvSeries& series);

struct FetchOptions {
  // "{symbol}", "{start}" and "{end}" are substituted; start/end as unix
  // seconds when the template contains "{period1}"/"{period2}" instead.
  std::string endpoint_template =
      "https://query1.finance.yahoo.com/v7/finance/download/"
      "{symbol}?period1={period1}&period2={period2}&interval=1d&events=history";
  std::chrono::seconds timeout{30};
};

// Downloads CSV text for the symbol and range and checks its header row.
// Never touches the filesystem.
std::string fetch_quotes(const std::string& symbol, Date start, Date end,
                         const FetchOptions& options = {});

}  // namespace stockcast
