#include "cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cli/run_config.hpp"
#include "cli/svg_plot.hpp"
#include "stockcast/forecast_eval.hpp"
#include "stockcast/number_format.hpp"

namespace stockcast::cli {

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  if (!out) throw IoError("write failed for " + path);
}

// A command-line flag that, when given, assigns a config key.
struct Binding {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

class Bindings {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto binding = std::make_unique<Binding>();
    binding->key = key;
    binding->option = app->add_option(flag, binding->value, help);
    items_.push_back(std::move(binding));
  }

  void apply(RunConfig& cfg) const {
    for (const auto& b : items_) {
      if (b->option->count() > 0) apply_key(cfg, b->key, b->value);
    }
  }

 private:
  std::vector<std::unique_ptr<Binding>> items_;
};

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
}

OhlcvSeries load_series(const RunConfig& cfg, const std::string& symbol) {
  OhlcvSeries series = load_csv_file(cfg.input, symbol);
  if (cfg.price_field == "adj_close") series = with_adj_close_as_close(series);
  return series;
}

bool indicator_keys_given(const RunConfig& cfg) {
  static const char* keys[] = {"sma_periods", "wma_period",     "ema_alpha",      "rsi_period", "cci_period",
                               "stoch_k_period", "stoch_d_period", "macd_fast", "macd_slow", "macd_signal"};
  for (const char* k : keys) {
    if (cfg.explicit_keys.contains(k)) return true;
  }
  return false;
}

// Epoch default depends on the mode unless set explicitly.
void resolve_defaults(RunConfig& cfg) {
  if (!cfg.explicit_keys.contains("epochs")) cfg.train.epochs = cfg.mode == ModelMode::Multivariate ? 40 : 20;
}

int cmd_fetch(const RunConfig& cfg, const std::string& start_text, const std::string& end_text, std::ostream& out) {
  if (!cfg.explicit_keys.contains("symbol")) throw ConfigError("--symbol is required");
  require(cfg.out, "--out");
  const auto start = Date::parse(start_text);
  const auto end = Date::parse(end_text);
  if (!start) throw ConfigError("--start must be YYYY-MM-DD, got \"" + start_text + "\"");
  if (!end) throw ConfigError("--end must be YYYY-MM-DD, got \"" + end_text + "\"");
  if (*end < *start) throw ConfigError("--start is after --end");

  FetchOptions options;
  if (!cfg.endpoint.empty()) options.endpoint_template = cfg.endpoint;
  options.timeout = std::chrono::seconds(cfg.timeout_seconds);
  const std::string body = fetch_quotes(cfg.symbol, *start, *end, options);
  const OhlcvSeries parsed = parse_csv(std::string_view(body), cfg.symbol);
  write_text(cfg.out, body);
  out << "rows: " << parsed.size() << '\n';
  return kExitOk;
}

int cmd_indicators(const RunConfig& cfg, std::ostream& out) {
  require(cfg.input, "--input");
  require(cfg.out, "--out");
  const OhlcvSeries series = load_series(cfg, cfg.symbol);
  const FeatureMatrix features = build_features(series, cfg.indicators, cfg.column_set);
  write_text(cfg.out, feature_matrix_to_csv(features));
  out << "warmup_dropped: " << features.warmup_dropped << '\n';
  out << "rows: " << features.dates.size() << '\n';
  return kExitOk;
}

std::string history_csv(const TrainHistory& history) {
  std::string text = "epoch,train_mse,val_mse\n";
  for (std::size_t e = 0; e < history.train_mse.size(); ++e) {
    text += std::to_string(e + 1) + ',' + format_g17(history.train_mse[e]) + ',' +
            format_g17(e < history.val_mse.size() ? history.val_mse[e] : 0.0) + '\n';
  }
  return text;
}

int cmd_train(const RunConfig& cfg, bool verbose, std::ostream& out, std::ostream& err) {
  require(cfg.input, "--input");
  require(cfg.model, "--model");
  const OhlcvSeries series = load_series(cfg, cfg.symbol);
  std::function<void(const EpochReport&)> progress;
  if (verbose) {
    progress = [&err](const EpochReport& r) {
      err << "epoch " << r.epoch << " train_mse " << format_g17(r.train_mse) << " val_mse "
          << format_g17(r.val_mse) << '\n';
    };
  }
  const TrainedPipeline trained = train_pipeline(series, cfg.pipeline(), progress);
  save_model_file(trained.model, cfg.model);
  const std::string history_path = cfg.history.empty() ? cfg.model + ".history.csv" : cfg.history;
  write_text(history_path, history_csv(trained.history));
  out << "model: " << cfg.model << '\n';
  out << "history: " << history_path << '\n';
  out << "train_samples: " << trained.data.train.num_samples() << " test_samples: " << trained.data.test.num_samples() << '\n';
  if (!trained.history.train_mse.empty()) {
    out << "final_train_mse: " << format_g17(trained.history.train_mse.back()) << '\n';
  }
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& out) {
  require(cfg.input, "--input");
  require(cfg.model, "--model");
  const LstmModel model = load_model_file(cfg.model);
  const std::string symbol = cfg.explicit_keys.contains("symbol") ? cfg.symbol : model.symbol;
  const OhlcvSeries series = load_series(cfg, symbol);

  std::optional<ColumnSet> set;
  const IndicatorConfig* indicators = nullptr;
  if (cfg.explicit_keys.contains("column_set")) set = cfg.column_set;
  if (indicator_keys_given(cfg)) indicators = &cfg.indicators;
  const WindowedDataset test = model_test_dataset(model, series, set, indicators);
  const OneStepResult result = evaluate_one_step(model, test);

  const std::string report =
      metrics_to_json(result.metrics, to_string(model.mode), symbol, model.train_config.epochs);
  if (cfg.out.empty()) {
    out << report;
  } else {
    write_text(cfg.out, report);
    out << "report: " << cfg.out << '\n';
  }
  if (!cfg.predictions.empty()) {
    std::string csv = "date,actual,predicted\n";
    for (std::size_t i = 0; i < result.dates.size(); ++i) {
      csv += result.dates[i].to_string() + ',' + format_g17(result.actual[i]) + ',' +
             format_g17(result.predicted[i]) + '\n';
    }
    write_text(cfg.predictions, csv);
  }
  char line[160];
  std::snprintf(line, sizeof line, "mape: %.4f rmse: %.4f n: %zu", result.metrics.mape, result.metrics.rmse,
                result.metrics.n);
  out << line << '\n';
  return kExitOk;
}

int cmd_forecast(const RunConfig& cfg, std::ostream& out) {
  require(cfg.input, "--input");
  require(cfg.model, "--model");
  require(cfg.out, "--out");
  const LstmModel model = load_model_file(cfg.model);
  const std::string symbol = cfg.explicit_keys.contains("symbol") ? cfg.symbol : model.symbol;
  const OhlcvSeries series = load_series(cfg, symbol);
  const ForecastResult forecast = forecast_recursive(model, series, cfg.horizon);
  write_text(cfg.out, forecast_to_csv(forecast));
  out << "trend: " << to_string(forecast.trend) << '\n';
  return kExitOk;
}

int cmd_backtest(const RunConfig& cfg, std::ostream& out) {
  require(cfg.input, "--input");
  require(cfg.out, "--out");
  const OhlcvSeries series = load_series(cfg, cfg.symbol);
  const auto folds = walk_forward(series, cfg.pipeline(), cfg.folds);
  std::filesystem::create_directories(cfg.out);
  for (const auto& fold : folds) {
    const std::string path = (std::filesystem::path(cfg.out) / ("fold_" + std::to_string(fold.fold) + ".json")).string();
    write_text(path, metrics_to_json(fold.metrics, to_string(cfg.mode), series.symbol(), cfg.train.epochs));
    char line[200];
    std::snprintf(line, sizeof line, "fold %zu: %s..%s mape %.4f rmse %.4f", fold.fold,
                  fold.test_start.to_string().c_str(), fold.test_end.to_string().c_str(), fold.metrics.mape,
                  fold.metrics.rmse);
    out << line << '\n';
  }
  return kExitOk;
}

int cmd_plot(const std::vector<std::string>& specs, const std::string& svg_path, const std::string& csv_path,
             const std::string& title, std::ostream& out) {
  if (specs.empty()) throw ConfigError("plot needs at least one --series label=path[:column]");
  if (svg_path.empty() && csv_path.empty()) throw ConfigError("plot needs --out and/or --csv");
  std::vector<PlotSeries> series;
  for (const auto& spec : specs) series.push_back(read_plot_spec(spec));
  if (!svg_path.empty()) {
    write_text(svg_path, render_svg(series, title));
    out << "svg: " << svg_path << '\n';
  }
  if (!csv_path.empty()) {
    write_text(csv_path, merged_csv(series));
    out << "csv: " << csv_path << '\n';
  }
  return kExitOk;
}

int report(std::ostream& err, const std::string& what, int code) {
  err << "error: " << what << '\n';
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"LSTM stock price forecasting pipeline", "stockcast"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> set_pairs;
  std::string seed_text;
  bool verbose = false;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--set", set_pairs, "override a config key (key=value), repeatable")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  app.add_option("--seed", seed_text, "random seed");
  app.add_flag("-v,--verbose", verbose, "progress on standard error");

  Bindings bindings;
  auto add_pipeline_flags = [&](CLI::App* sub) {
    bindings.add(sub, "--input", "input", "input OHLCV CSV");
    bindings.add(sub, "--symbol", "symbol", "ticker symbol");
    bindings.add(sub, "--price-field", "price_field", "close or adj_close");
  };
  auto add_model_flags = [&](CLI::App* sub) {
    bindings.add(sub, "--mode", "mode", "univariate or multivariate");
    bindings.add(sub, "--column-set", "column_set", "univariate, paper_multivariate or table4_all");
    bindings.add(sub, "--lookback", "lookback", "window length");
    bindings.add(sub, "--epochs", "epochs", "training epochs");
    bindings.add(sub, "--hidden-sizes", "hidden_sizes", "comma-separated layer widths");
    bindings.add(sub, "--train-fraction", "train_fraction", "share of samples used for training");
  };

  auto* fetch = app.add_subcommand("fetch", "download daily quotes as CSV");
  std::string start_text, end_text;
  bindings.add(fetch, "--symbol", "symbol", "ticker symbol");
  fetch->add_option("--start", start_text, "first date, YYYY-MM-DD")->required();
  fetch->add_option("--end", end_text, "last date, YYYY-MM-DD")->required();
  bindings.add(fetch, "--out", "out", "output CSV path");
  bindings.add(fetch, "--endpoint", "endpoint", "URL template");
  bindings.add(fetch, "--timeout", "timeout", "seconds");

  auto* indicators = app.add_subcommand("indicators", "write the feature matrix CSV");
  add_pipeline_flags(indicators);
  bindings.add(indicators, "--column-set", "column_set", "univariate, paper_multivariate or table4_all");
  bindings.add(indicators, "--out", "out", "output CSV path");

  auto* train_cmd = app.add_subcommand("train", "train a model");
  add_pipeline_flags(train_cmd);
  add_model_flags(train_cmd);
  bindings.add(train_cmd, "--model", "model", "output model JSON");
  bindings.add(train_cmd, "--history", "history", "output loss history CSV");

  auto* evaluate = app.add_subcommand("evaluate", "one-step test metrics for a trained model");
  add_pipeline_flags(evaluate);
  bindings.add(evaluate, "--model", "model", "model JSON");
  bindings.add(evaluate, "--column-set", "column_set", "feature set to rebuild (must match the model)");
  bindings.add(evaluate, "--out", "out", "report JSON path");
  bindings.add(evaluate, "--predictions", "predictions", "actual vs predicted CSV path");

  auto* forecast = app.add_subcommand("forecast", "recursive multi-day forecast");
  add_pipeline_flags(forecast);
  bindings.add(forecast, "--model", "model", "model JSON");
  bindings.add(forecast, "--horizon", "horizon", "days ahead");
  bindings.add(forecast, "--out", "out", "forecast CSV path");

  auto* backtest = app.add_subcommand("backtest", "walk-forward evaluation");
  add_pipeline_flags(backtest);
  add_model_flags(backtest);
  bindings.add(backtest, "--folds", "folds", "number of folds");
  bindings.add(backtest, "--out", "out", "directory for per-fold reports");

  auto* plot = app.add_subcommand("plot", "SVG line chart and merged CSV");
  std::vector<std::string> plot_specs;
  std::string plot_svg, plot_csv, plot_title;
  plot->add_option("--series", plot_specs, "label=path[:column], repeatable")
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  plot->add_option("--out", plot_svg, "SVG path");
  plot->add_option("--csv", plot_csv, "merged CSV path");
  plot->add_option("--title", plot_title, "chart title");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (plot->parsed()) return cmd_plot(plot_specs, plot_svg, plot_csv, plot_title, out);

    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& pair : set_pairs) {
      const auto eq = pair.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + pair);
      apply_key(cfg, pair.substr(0, eq), pair.substr(eq + 1));
    }
    bindings.apply(cfg);
    if (!seed_text.empty()) apply_key(cfg, "seed", seed_text);
    resolve_defaults(cfg);
    validate(cfg);

    if (fetch->parsed()) return cmd_fetch(cfg, start_text, end_text, out);
    if (indicators->parsed()) return cmd_indicators(cfg, out);
    if (train_cmd->parsed()) return cmd_train(cfg, verbose, out, err);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out);
    if (forecast->parsed()) return cmd_forecast(cfg, out);
    if (backtest->parsed()) return cmd_backtest(cfg, out);
    return report(err, "no command given", kExitUsage);
  } catch (const ConfigError& e) {
    return report(err, e.what(), kExitUsage);
  } catch (const ModelError& e) {
    switch (e.kind()) {
      case ModelError::Kind::NonFiniteLoss:
        return report(err,
                      std::string(e.what()) + " (epoch " + std::to_string(e.epoch) + ", batch " +
                          std::to_string(e.batch) + ")",
                      kExitNumeric);
      case ModelError::Kind::NonFiniteInput:
        return report(err, e.what(), kExitNumeric);
      case ModelError::Kind::InvalidConfig:
        return report(err, e.what(), kExitUsage);
      default:
        return report(err, e.path.empty() ? e.what() : std::string(e.what()) + " at " + e.path, kExitData);
    }
  } catch (const EvalError& e) {
    return report(err, e.what(), e.kind() == EvalError::Kind::NonPositiveForecast ? kExitNumeric : kExitData);
  } catch (const std::exception& e) {
    // Market data, short series, scaling, dataset, plot input and file I/O.
    return report(err, e.what(), kExitData);
  }
}

}  // namespace stockcast::cli
