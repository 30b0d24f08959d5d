#include "cli/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace stockcast::cli {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

ConfigError bad_value(const std::string& key, const std::string& value, const std::string& expected) {
  return ConfigError("invalid value \"" + value + "\" for " + key + " (expected " + expected + ")");
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) throw bad_value(key, value, "integer");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < -1'000'000'000 || v > 1'000'000'000) throw bad_value(key, value, "integer in range");
  return static_cast<int>(v);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < 0) throw bad_value(key, value, "non-negative integer");
  return static_cast<std::size_t>(v);
}

double parse_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) throw bad_value(key, value, "number");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw bad_value(key, value, "true or false");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_int(key, trim(item)));
  if (out.empty()) throw bad_value(key, value, "comma-separated integers");
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"symbol", [](RunConfig& c, const auto&, const auto& v) { c.symbol = v; }},
      {"mode",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto mode = parse_model_mode(v);
         if (!mode) throw bad_value(k, v, "univariate or multivariate");
         c.mode = *mode;
       }},
      {"column_set",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto set = parse_column_set(v);
         if (!set) throw bad_value(k, v, "univariate, paper_multivariate or table4_all");
         c.column_set = *set;
       }},
      {"sma_periods",
       [](RunConfig& c, const auto& k, const auto& v) { c.indicators.sma_periods = parse_int_list(k, v); }},
      {"wma_period", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.wma_period = parse_int(k, v); }},
      {"ema_alpha", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.ema_alpha = parse_real(k, v); }},
      {"rsi_period", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.rsi_period = parse_int(k, v); }},
      {"cci_period", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.cci_period = parse_int(k, v); }},
      {"stoch_k_period",
       [](RunConfig& c, const auto& k, const auto& v) { c.indicators.stoch_k_period = parse_int(k, v); }},
      {"stoch_d_period",
       [](RunConfig& c, const auto& k, const auto& v) { c.indicators.stoch_d_period = parse_int(k, v); }},
      {"macd_fast", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.macd_fast = parse_int(k, v); }},
      {"macd_slow", [](RunConfig& c, const auto& k, const auto& v) { c.indicators.macd_slow = parse_int(k, v); }},
      {"macd_signal",
       [](RunConfig& c, const auto& k, const auto& v) { c.indicators.macd_signal = parse_int(k, v); }},
      {"lookback", [](RunConfig& c, const auto& k, const auto& v) { c.lookback = parse_count(k, v); }},
      {"train_fraction", [](RunConfig& c, const auto& k, const auto& v) { c.train_fraction = parse_real(k, v); }},
      {"epochs", [](RunConfig& c, const auto& k, const auto& v) { c.train.epochs = parse_int(k, v); }},
      {"batch_size", [](RunConfig& c, const auto& k, const auto& v) { c.train.batch_size = parse_int(k, v); }},
      {"learning_rate",
       [](RunConfig& c, const auto& k, const auto& v) { c.train.learning_rate = parse_real(k, v); }},
      {"hidden_sizes",
       [](RunConfig& c, const auto& k, const auto& v) { c.train.hidden_sizes = parse_int_list(k, v); }},
      {"validation_fraction",
       [](RunConfig& c, const auto& k, const auto& v) { c.train.validation_fraction = parse_real(k, v); }},
      {"gradient_clip_norm",
       [](RunConfig& c, const auto& k, const auto& v) { c.train.gradient_clip_norm = parse_real(k, v); }},
      {"cell_variant",
       [](RunConfig& c, const auto& k, const auto& v) {
         const auto variant = parse_cell_variant(v);
         if (!variant) throw bad_value(k, v, "standard or as_printed");
         c.train.cell_variant = *variant;
       }},
      {"seed",
       [](RunConfig& c, const auto& k, const auto& v) {
         const long long seed = parse_integer(k, v);
         if (seed < 0) throw bad_value(k, v, "non-negative integer");
         c.train.seed = static_cast<std::uint64_t>(seed);
       }},
      {"horizon", [](RunConfig& c, const auto& k, const auto& v) { c.horizon = parse_count(k, v); }},
      {"clip_scaled", [](RunConfig& c, const auto& k, const auto& v) { c.clip_scaled = parse_bool(k, v); }},
      {"price_field",
       [](RunConfig& c, const auto& k, const auto& v) {
         if (v != "close" && v != "adj_close") throw bad_value(k, v, "close or adj_close");
         c.price_field = v;
       }},
      {"folds", [](RunConfig& c, const auto& k, const auto& v) { c.folds = parse_count(k, v); }},
      {"endpoint", [](RunConfig& c, const auto&, const auto& v) { c.endpoint = v; }},
      {"timeout", [](RunConfig& c, const auto& k, const auto& v) { c.timeout_seconds = parse_int(k, v); }},
      {"input", [](RunConfig& c, const auto&, const auto& v) { c.input = v; }},
      {"model", [](RunConfig& c, const auto&, const auto& v) { c.model = v; }},
      {"out", [](RunConfig& c, const auto&, const auto& v) { c.out = v; }},
      {"history", [](RunConfig& c, const auto&, const auto& v) { c.history = v; }},
      {"predictions", [](RunConfig& c, const auto&, const auto& v) { c.predictions = v; }},
  };
  return table;
}

}  // namespace

PipelineConfig RunConfig::pipeline() const {
  PipelineConfig p;
  p.mode = mode;
  p.column_set = column_set;
  p.indicators = indicators;
  p.lookback = lookback;
  p.split.train_fraction = train_fraction;
  p.train = train;
  p.clip_scaled = clip_scaled;
  return p;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [key, setter] : setters()) out.push_back(key);
    return out;
  }();
  return keys;
}

void apply_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key \"" + key + "\"");
  it->second(cfg, key, value);
  cfg.explicit_keys.insert(key);
  // Choosing a mode picks its default column set unless one was given.
  if (key == "mode" && !cfg.explicit_keys.contains("column_set")) {
    cfg.column_set = cfg.mode == ModelMode::Univariate ? ColumnSet::Univariate : ColumnSet::PaperMultivariate;
  }
  if (key == "column_set" && !cfg.explicit_keys.contains("mode")) {
    cfg.mode = cfg.column_set == ColumnSet::Univariate ? ModelMode::Univariate : ModelMode::Multivariate;
  }
}

void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& source_name) {
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    try {
      apply_key(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source_name + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str(), path);
}

void validate(const RunConfig& cfg) {
  try {
    cfg.pipeline().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const ModelError& e) {
    throw ConfigError(e.what());
  }
  if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (cfg.folds < 2) throw ConfigError("folds must be >= 2");
  if (cfg.timeout_seconds < 1) throw ConfigError("timeout must be >= 1 second");
}

}  // namespace stockcast::cli
