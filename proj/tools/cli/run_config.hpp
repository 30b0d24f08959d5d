#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stockcast/forecast_eval.hpp"

namespace stockcast::cli {

// Bad key, bad value, or bad config syntax. Maps to the usage exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string symbol = "STOCK";
  ModelMode mode = ModelMode::Univariate;
  ColumnSet column_set = ColumnSet::Univariate;
  IndicatorConfig indicators;
  std::size_t lookback = 60;
  double train_fraction = 0.8;
  TrainConfig train;
  std::size_t horizon = 30;
  bool clip_scaled = false;
  std::string price_field = "close";
  std::size_t folds = 3;
  std::string endpoint;
  int timeout_seconds = 30;

  std::string input;
  std::string model;
  std::string out;
  std::string history;
  std::string predictions;

  // Keys assigned by a config file or flag, in any order.
  std::set<std::string> explicit_keys;

  PipelineConfig pipeline() const;
};

// All keys accepted in config files and via --set.
const std::vector<std::string>& known_keys();

// Throws ConfigError for unknown keys or unparsable values.
void apply_key(RunConfig& cfg, const std::string& key, const std::string& value);

// Flat "key = value" lines; '#' starts a comment.
void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& source_name);
void apply_config_file(RunConfig& cfg, const std::string& path);

// Cross-key checks (indicator periods, training knobs, mode/column_set).
void validate(const RunConfig& cfg);

}  // namespace stockcast::cli
