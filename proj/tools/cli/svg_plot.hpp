#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stockcast::cli {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PlotSeries {
  std::string label;
  std::vector<double> values;
};

// Reads one numeric column from a CSV with a header row. An empty column
// name picks the last column. Throws PlotError on unreadable, ragged or
// non-numeric input.
PlotSeries read_plot_series(const std::string& label, const std::string& path, const std::string& column = "");

// Parses "label=path" or "label=path:column".
PlotSeries read_plot_spec(const std::string& spec);

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title = "");

// index,<label1>,<label2>,... with blank cells past a series' end.
std::string merged_csv(const std::vector<PlotSeries>& series);

}  // namespace stockcast::cli
