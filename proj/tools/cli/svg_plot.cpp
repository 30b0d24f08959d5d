#include "cli/svg_plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "stockcast/number_format.hpp"

namespace stockcast::cli {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

PlotSeries read_plot_series(const std::string& label, const std::string& path, const std::string& column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PlotError("cannot read series file " + path);
  std::string line;
  if (!std::getline(in, line)) throw PlotError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  std::size_t col = header.size() - 1;
  if (!column.empty()) {
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw PlotError(path + ": no column named " + column);
    col = static_cast<std::size_t>(it - header.begin());
  }
  PlotSeries series{label, {}};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw PlotError(path + ":" + std::to_string(line_no) + ": ragged row (" + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()) + ")");
    }
    const std::string& cell = fields[col];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
      throw PlotError(path + ":" + std::to_string(line_no) + ": non-numeric value \"" + cell + "\"");
    }
    series.values.push_back(v);
  }
  if (series.values.empty()) throw PlotError(path + ": no data rows");
  return series;
}

PlotSeries read_plot_spec(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw PlotError("series must be label=path[:column], got " + spec);
  const std::string label = spec.substr(0, eq);
  std::string path = spec.substr(eq + 1);
  std::string column;
  const auto colon = path.rfind(':');
  if (colon != std::string::npos) {
    column = path.substr(colon + 1);
    path = path.substr(0, colon);
  }
  return read_plot_series(label, path, column);
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  constexpr double width = 800, height = 450;
  constexpr double left = 70, right = 160, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  std::size_t max_len = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series) {
    max_len = std::max(max_len, s.values.size());
    for (double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) lo = 0, hi = 1;
  if (hi == lo) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double x_span = max_len > 1 ? static_cast<double>(max_len - 1) : 1.0;
  auto px = [&](std::size_t i) {
    return max_len > 1 ? left + plot_w * static_cast<double>(i) / x_span : left + plot_w / 2;
  };
  auto py = [&](double v) { return top + plot_h * (hi - v) / (hi - lo); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << fixed2(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << escape_xml(title) << "</text>\n";
  }

  svg << "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top + plot_h) << "\" x2=\"" << fixed2(left + plot_w)
      << "\" y2=\"" << fixed2(top + plot_h) << "\"/>\n";
  svg << "<line x1=\"" << fixed2(left) << "\" y1=\"" << fixed2(top) << "\" x2=\"" << fixed2(left) << "\" y2=\""
      << fixed2(top + plot_h) << "\"/>\n";
  svg << "</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double v = lo + (hi - lo) * t / kTicks;
    const double y = py(v);
    svg << "<line x1=\"" << fixed2(left - 4) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(left) << "\" y2=\""
        << fixed2(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(left - 6) << "\" y=\"" << fixed2(y + 4) << "\" text-anchor=\"end\">"
        << tick_label(v) << "</text>\n";
  }
  const std::size_t last_index = max_len > 0 ? max_len - 1 : 0;
  for (int t = 0; t <= kTicks; ++t) {
    const auto i = static_cast<std::size_t>(std::llround(static_cast<double>(last_index) * t / kTicks));
    if (t > 0 && max_len <= 1) break;
    const double x = px(i);
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(top + plot_h) << "\" x2=\"" << fixed2(x) << "\" y2=\""
        << fixed2(top + plot_h + 4) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << fixed2(x) << "\" y=\"" << fixed2(top + plot_h + 18) << "\" text-anchor=\"middle\">" << i
        << "</text>\n";
  }
  svg << "</g>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[s].values.size(); ++i) {
      if (i) svg << ' ';
      svg << fixed2(px(i)) << ',' << fixed2(py(series[s].values[i]));
    }
    svg << "\"/>\n";
    if (series[s].values.size() == 1) {
      svg << "<circle cx=\"" << fixed2(px(0)) << "\" cy=\"" << fixed2(py(series[s].values[0])) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    }
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    const double y = top + 10 + 18.0 * static_cast<double>(s);
    const double x = left + plot_w + 12;
    svg << "<line x1=\"" << fixed2(x) << "\" y1=\"" << fixed2(y) << "\" x2=\"" << fixed2(x + 20) << "\" y2=\""
        << fixed2(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << fixed2(x + 26) << "\" y=\"" << fixed2(y + 4) << "\">" << escape_xml(series[s].label)
        << "</text>\n";
  }
  svg << "</g>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string merged_csv(const std::vector<PlotSeries>& series) {
  std::size_t max_len = 0;
  std::string out = "index";
  for (const auto& s : series) {
    out += ',' + s.label;
    max_len = std::max(max_len, s.values.size());
  }
  out += '\n';
  for (std::size_t i = 0; i < max_len; ++i) {
    out += std::to_string(i);
    for (const auto& s : series) {
      out += ',';
      if (i < s.values.size()) out += format_shortest(s.values[i]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace stockcast::cli
