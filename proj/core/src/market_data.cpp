#include "stockcast/market_data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "stockcast/number_format.hpp"

namespace stockcast {

namespace {

using std::chrono::day;
using std::chrono::month;
using std::chrono::sys_days;
using std::chrono::year;
using std::chrono::year_month_day;

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return value;
}

MarketDataError malformed_row(std::size_t line, const std::string& why) {
  MarketDataError err(MarketDataError::Kind::MalformedRow,
                      "malformed row at line " + std::to_string(line) + ": " + why);
  err.line = line;
  return err;
}

void check_bar(const Bar& bar) {
  const auto violation = [&](const char* field, const std::string& why) {
    MarketDataError err(MarketDataError::Kind::InvariantViolation,
                        "bar " + bar.date.to_string() + " field " + field + ": " + why);
    err.date = bar.date;
    err.field = field;
    return err;
  };
  const std::array<std::pair<const char*, double>, 5> prices{{{"Open", bar.open},
                                                               {"High", bar.high},
                                                               {"Low", bar.low},
                                                               {"Close", bar.close},
                                                               {"Adj Close", bar.adj_close}}};
  for (const auto& [name, value] : prices) {
    if (!std::isfinite(value) || value <= 0.0) throw violation(name, "price must be finite and > 0");
  }
  if (!std::isfinite(bar.volume) || bar.volume < 0.0) {
    throw violation("Volume", "volume must be finite and >= 0");
  }
  if (bar.low > bar.high) throw violation("Low", "low exceeds high");
  if (bar.low > std::min(bar.open, bar.close)) throw violation("Low", "low exceeds open/close");
  if (bar.high < std::max(bar.open, bar.close)) throw violation("High", "high below open/close");
}

bool is_flat_zero_volume(const Bar& bar) {
  return bar.volume == 0.0 && bar.open == bar.high && bar.high == bar.low && bar.low == bar.close;
}

void check_order(const Bar& previous, const Bar& current) {
  if (!(previous.date < current.date)) {
    MarketDataError err(MarketDataError::Kind::NonAscendingDates,
                        "dates not strictly ascending at " + current.date.to_string());
    err.date = current.date;
    throw err;
  }
}

}  // namespace

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  const auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int value = 0;
    const auto* first = text.data() + pos;
    const auto* last = first + len;
    if (std::any_of(first, last, [](char c) { return c < '0' || c > '9'; })) return std::nullopt;
    std::from_chars(first, last, value);
    return value;
  };
  const auto y = digits(0, 4);
  const auto m = digits(5, 2);
  const auto d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*m)},
                           day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{static_cast<std::int32_t>(sys_days{ymd}.time_since_epoch().count())};
}

std::string Date::to_string() const {
  const year_month_day ymd{sys_days{std::chrono::days{days_}}};
  std::array<char, 16> buf{};
  std::snprintf(buf.data(), buf.size(), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf.data();
}

OhlcvSeries OhlcvSeries::from_bars(std::string symbol, std::vector<Bar> bars) {
  OhlcvSeries series;
  series.symbol_ = std::move(symbol);
  for (std::size_t i = 0; i < bars.size(); ++i) {
    check_bar(bars[i]);
    if (i > 0) check_order(bars[i - 1], bars[i]);
    if (is_flat_zero_volume(bars[i])) ++series.flat_zero_volume_bars_;
  }
  series.bars_ = std::move(bars);
  return series;
}

std::vector<double> OhlcvSeries::closes() const {
  std::vector<double> out;
  out.reserve(bars_.size());
  for (const auto& bar : bars_) out.push_back(bar.close);
  return out;
}

OhlcvSeries parse_csv(std::istream& in, std::string symbol) {
  std::string raw;
  if (!std::getline(in, raw) || strip_cr(raw) != kYahooHeader) {
    MarketDataError err(MarketDataError::Kind::MalformedHeader,
                        "expected header \"" + std::string(kYahooHeader) + "\"");
    err.line = 1;
    throw err;
  }

  OhlcvSeries series;
  series.symbol_ = std::move(symbol);
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    const auto fields = split_commas(line);
    if (fields.size() != 7) {
      throw malformed_row(line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    const auto date = Date::parse(fields[0]);
    if (!date) throw malformed_row(line_no, "bad date \"" + std::string(fields[0]) + "\"");
    if (std::any_of(fields.begin() + 1, fields.end(), [](std::string_view f) { return f == "null"; })) {
      ++series.dropped_null_rows_;
      continue;
    }
    std::array<double, 6> values{};
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto v = parse_number(fields[i + 1]);
      if (!v) {
        throw malformed_row(line_no, "bad number \"" + std::string(fields[i + 1]) + "\"");
      }
      values[i] = *v;
    }
    const Bar bar{*date, values[0], values[1], values[2], values[3], values[4], values[5]};
    check_bar(bar);
    if (!series.bars_.empty()) check_order(series.bars_.back(), bar);
    if (is_flat_zero_volume(bar)) ++series.flat_zero_volume_bars_;
    series.bars_.push_back(bar);
  }
  if (series.bars_.empty()) {
    throw MarketDataError(MarketDataError::Kind::EmptySeries, "no data rows");
  }
  return series;
}

OhlcvSeries parse_csv(std::string_view text, std::string symbol) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, std::move(symbol));
}

OhlcvSeries load_csv_file(const std::string& path, std::string symbol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MarketDataError(MarketDataError::Kind::MalformedHeader, "cannot open " + path);
  }
  return parse_csv(in, std::move(symbol));
}

std::string to_csv(const OhlcvSeries& series) {
  std::string out(kYahooHeader);
  out += '\n';
  for (const auto& bar : series.bars()) {
    out += bar.date.to_string();
    for (double v : {bar.open, bar.high, bar.low, bar.close, bar.adj_close, bar.volume}) {
      out += ',';
      out += format_shortest(v);
    }
    out += '\n';
  }
  return out;
}

OhlcvSeries slice_by_date(const OhlcvSeries& series, Date start, Date end) {
  if (end < start) {
    throw MarketDataError(MarketDataError::Kind::InvalidRange,
                          "start " + start.to_string() + " after end " + end.to_string());
  }
  const auto& bars = series.bars();
  const auto first = std::lower_bound(bars.begin(), bars.end(), start,
                                      [](const Bar& b, Date d) { return b.date < d; });
  const auto last = std::upper_bound(first, bars.end(), end,
                                     [](Date d, const Bar& b) { return d < b.date; });
  return OhlcvSeries::from_bars(series.symbol(), std::vector<Bar>(first, last));
}

OhlcvSeries with_adj_close_as_close(const OhlcvSeries& series) {
  std::vector<Bar> bars = series.bars();
  for (auto& bar : bars) bar.close = bar.adj_close;
  // Adjusted closes may fall outside [low, high]; widen the range so the
  // resulting bars remain valid.
  for (auto& bar : bars) {
    bar.low = std::min(bar.low, bar.close);
    bar.high = std::max(bar.high, bar.close);
  }
  return OhlcvSeries::from_bars(series.symbol(), std::move(bars));
}

namespace {

void replace_all(std::string& text, std::string_view key, const std::string& value) {
  for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size())) {
    text.replace(pos, key.size(), value);
  }
}

}  // namespace

std::string fetch_quotes(const std::string& symbol, Date start, Date end,
                         const FetchOptions& options) {
  if (end < start) {
    throw MarketDataError(MarketDataError::Kind::InvalidRange,
                          "start " + start.to_string() + " after end " + end.to_string());
  }
  std::string url = options.endpoint_template;
  replace_all(url, "{symbol}", symbol);
  replace_all(url, "{start}", start.to_string());
  replace_all(url, "{end}", end.to_string());
  // End is inclusive, so the upper unix timestamp points at the next midnight.
  replace_all(url, "{period1}", std::to_string(std::int64_t{start.days_since_epoch()} * 86400));
  replace_all(url, "{period2}", std::to_string((std::int64_t{end.days_since_epoch()} + 1) * 86400));

  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw MarketDataError(MarketDataError::Kind::NetworkError, "endpoint is not a URL: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  const std::string origin = url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw MarketDataError(MarketDataError::Kind::NetworkError, "unsupported endpoint: " + origin);
  }
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_follow_location(true);
  const auto response = client.Get(path);
  if (!response) {
    throw MarketDataError(MarketDataError::Kind::NetworkError,
                          "request to " + origin + " failed: " + httplib::to_string(response.error()));
  }
  if (response->status != 200) {
    MarketDataError err(MarketDataError::Kind::HttpStatus,
                        "HTTP status " + std::to_string(response->status));
    err.http_status = response->status;
    throw err;
  }
  const std::string& body = response->body;
  const auto header = strip_cr(std::string_view(body).substr(0, body.find('\n')));
  if (header != kYahooHeader) {
    throw MarketDataError(MarketDataError::Kind::UnexpectedSchema,
                          "unexpected header \"" + std::string(header) + "\"");
  }
  return body;
}

}  // namespace stockcast
