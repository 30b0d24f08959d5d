#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stockcast/lstm.hpp"
#include "stockcast/number_format.hpp"

namespace stockcast {

namespace {

using nlohmann::json;

std::string quote(const std::string& text) { return json(text).dump(); }

std::string number_array(std::span<const double> values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_g17(values[i]);
  }
  out += ']';
  return out;
}

std::string int_array(const std::vector<int>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::to_string(values[i]);
  }
  out += ']';
  return out;
}

std::string string_array(const std::vector<std::string>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += quote(values[i]);
  }
  out += ']';
  return out;
}

std::string vector_json(const Vector& v) {
  return number_array(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

// Row-major nested arrays.
std::string matrix_json(const Matrix& m, const std::string& indent) {
  std::string out = "[";
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[static_cast<std::size_t>(c)] = m(r, c);
    out += r == 0 ? "\n" : ",\n";
    out += indent + "  " + number_array(row);
  }
  out += "\n" + indent + "]";
  return out;
}

// Emits "key": value pairs with commas and indentation handled.
class ObjectWriter {
 public:
  ObjectWriter(std::ostream& out, std::string indent) : out_(out), indent_(std::move(indent)) {
    out_ << "{";
  }
  void field(const std::string& key, const std::string& raw_value) {
    out_ << (first_ ? "\n" : ",\n") << indent_ << "  " << quote(key) << ": " << raw_value;
    first_ = false;
  }
  void close() { out_ << "\n" << indent_ << "}"; }
  std::string child_indent() const { return indent_ + "  "; }

 private:
  std::ostream& out_;
  std::string indent_;
  bool first_ = true;
};

const char* const kLayerKeys[] = {"w_fx", "w_ix", "w_gx", "w_ox", "w_fh", "w_ih",
                                  "w_gh", "w_oh", "b_f",  "b_i",  "b_g",  "b_o"};

std::string layer_json(const LstmLayerParams& layer, const std::string& indent) {
  std::ostringstream out;
  ObjectWriter obj(out, indent);
  const std::string inner = obj.child_indent();
  obj.field("input_size", std::to_string(layer.input_size()));
  obj.field("hidden_size", std::to_string(layer.hidden_size()));
  const Matrix* mats[] = {&layer.w_fx, &layer.w_ix, &layer.w_gx, &layer.w_ox,
                          &layer.w_fh, &layer.w_ih, &layer.w_gh, &layer.w_oh};
  for (std::size_t i = 0; i < 8; ++i) obj.field(kLayerKeys[i], matrix_json(*mats[i], inner));
  const Vector* vecs[] = {&layer.b_f, &layer.b_i, &layer.b_g, &layer.b_o};
  for (std::size_t i = 0; i < 4; ++i) obj.field(kLayerKeys[8 + i], vector_json(*vecs[i]));
  obj.close();
  return out.str();
}

std::string train_config_json(const TrainConfig& cfg, const std::string& indent) {
  std::ostringstream out;
  ObjectWriter obj(out, indent);
  obj.field("epochs", std::to_string(cfg.epochs));
  obj.field("batch_size", std::to_string(cfg.batch_size));
  obj.field("learning_rate", format_g17(cfg.learning_rate));
  obj.field("hidden_sizes", int_array(cfg.hidden_sizes));
  obj.field("validation_fraction", format_g17(cfg.validation_fraction));
  obj.field("seed", std::to_string(cfg.seed));
  obj.field("gradient_clip_norm", format_g17(cfg.gradient_clip_norm));
  obj.field("cell_variant", quote(to_string(cfg.cell_variant)));
  obj.close();
  return out.str();
}

std::string indicator_config_json(const IndicatorConfig& cfg, const std::string& indent) {
  std::ostringstream out;
  ObjectWriter obj(out, indent);
  obj.field("sma_periods", int_array(cfg.sma_periods));
  obj.field("wma_period", std::to_string(cfg.wma_period));
  obj.field("ema_alpha", format_g17(cfg.ema_alpha));
  obj.field("rsi_period", std::to_string(cfg.rsi_period));
  obj.field("cci_period", std::to_string(cfg.cci_period));
  obj.field("stoch_k_period", std::to_string(cfg.stoch_k_period));
  obj.field("stoch_d_period", std::to_string(cfg.stoch_d_period));
  obj.field("macd_fast", std::to_string(cfg.macd_fast));
  obj.field("macd_slow", std::to_string(cfg.macd_slow));
  obj.field("macd_signal", std::to_string(cfg.macd_signal));
  obj.close();
  return out.str();
}

// ---- loading ----

ModelError corrupt(const std::string& path, const std::string& why) {
  ModelError err(ModelError::Kind::CorruptModel, "corrupt model at " + path + ": " + why);
  err.path = path;
  return err;
}

const json& at(const json& doc, const std::string& path) {
  const json::json_pointer ptr(path);
  if (!doc.contains(ptr)) throw corrupt(path, "missing");
  return doc.at(ptr);
}

double get_double(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_number()) throw corrupt(path, "expected number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw corrupt(path, "non-finite number");
  return d;
}

long long get_int(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_number_integer()) throw corrupt(path, "expected integer");
  return v.get<long long>();
}

int get_positive_int(const json& doc, const std::string& path) {
  const long long v = get_int(doc, path);
  if (v < 1 || v > 1'000'000'000) throw corrupt(path, "expected positive integer");
  return static_cast<int>(v);
}

std::uint64_t get_u64(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw corrupt(path, "expected unsigned integer");
  }
  return v.get<std::uint64_t>();
}

std::string get_string(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_string()) throw corrupt(path, "expected string");
  return v.get<std::string>();
}

bool get_bool(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_boolean()) throw corrupt(path, "expected boolean");
  return v.get<bool>();
}

const json& get_array(const json& doc, const std::string& path) {
  const json& v = at(doc, path);
  if (!v.is_array()) throw corrupt(path, "expected array");
  return v;
}

std::vector<double> get_doubles(const json& doc, const std::string& path) {
  const json& arr = get_array(doc, path);
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(get_double(doc, path + "/" + std::to_string(i)));
  return out;
}

std::vector<int> get_positive_ints(const json& doc, const std::string& path) {
  const json& arr = get_array(doc, path);
  std::vector<int> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(get_positive_int(doc, path + "/" + std::to_string(i)));
  }
  return out;
}

std::vector<std::string> get_strings(const json& doc, const std::string& path) {
  const json& arr = get_array(doc, path);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(get_string(doc, path + "/" + std::to_string(i)));
  return out;
}

Matrix get_matrix(const json& doc, const std::string& path, std::size_t rows, std::size_t cols) {
  const json& arr = get_array(doc, path);
  if (arr.size() != rows) throw corrupt(path, "expected " + std::to_string(rows) + " rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string row_path = path + "/" + std::to_string(r);
    const auto row = get_doubles(doc, row_path);
    if (row.size() != cols) throw corrupt(row_path, "expected " + std::to_string(cols) + " columns");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

Vector get_vector(const json& doc, const std::string& path, std::size_t size) {
  const auto values = get_doubles(doc, path);
  if (values.size() != size) throw corrupt(path, "expected " + std::to_string(size) + " entries");
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(size));
}

}  // namespace

void save_model(const LstmModel& model, std::ostream& out) {
  model.check_shapes();
  ObjectWriter root(out, "");
  const std::string inner = root.child_indent();
  root.field("format_version", std::to_string(kModelFormatVersion));
  root.field("mode", quote(to_string(model.mode)));
  root.field("symbol", quote(model.symbol));
  root.field("feature_names", string_array(model.feature_names));
  root.field("lookback", std::to_string(model.lookback));
  root.field("hidden_sizes", int_array(model.hidden_sizes()));
  root.field("cell_variant", quote(to_string(model.cell_variant)));
  {
    std::ostringstream scaler;
    ObjectWriter obj(scaler, inner);
    obj.field("column_names", string_array(model.scaler.column_names));
    obj.field("mins", number_array(model.scaler.mins));
    obj.field("maxs", number_array(model.scaler.maxs));
    obj.close();
    root.field("scaler", scaler.str());
  }
  root.field("train_config", train_config_json(model.train_config, inner));
  root.field("rng_seed", std::to_string(model.rng_seed));
  root.field("column_set", quote(to_string(model.column_set)));
  root.field("indicator_config", indicator_config_json(model.indicator_config, inner));
  root.field("train_fraction", format_g17(model.train_fraction));
  root.field("clip_scaled", model.clip_scaled ? "true" : "false");
  {
    std::string layers = "[";
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
      layers += k == 0 ? "\n" : ",\n";
      layers += inner + "  " + layer_json(model.layers[k], inner + "  ");
    }
    layers += "\n" + inner + "]";
    root.field("layers", layers);
  }
  {
    std::ostringstream head;
    ObjectWriter obj(head, inner);
    obj.field("weights", vector_json(model.head_weights));
    obj.field("bias", format_g17(model.head_bias));
    obj.close();
    root.field("head", head.str());
  }
  root.close();
  out << "\n";
}

std::string save_model_string(const LstmModel& model) {
  std::ostringstream out;
  save_model(model, out);
  return out.str();
}

void save_model_file(const LstmModel& model, const std::string& path) {
  const std::string text = save_model_string(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write model file " + path);
  out << text;
}

LstmModel load_model_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw corrupt("", std::string("unparseable JSON (") + e.what() + ")");
  }
  if (!doc.is_object()) throw corrupt("", "document is not an object");
  const long long version = get_int(doc, "/format_version");
  if (version != kModelFormatVersion) {
    throw ModelError(ModelError::Kind::UnsupportedVersion,
                     "model format_version " + std::to_string(version) + " is not supported (expected " +
                         std::to_string(kModelFormatVersion) + ")");
  }

  LstmModel model;
  const auto mode = parse_model_mode(get_string(doc, "/mode"));
  if (!mode) throw corrupt("/mode", "unknown mode");
  model.mode = *mode;
  model.symbol = get_string(doc, "/symbol");
  model.feature_names = get_strings(doc, "/feature_names");
  if (model.feature_names.empty()) throw corrupt("/feature_names", "empty");
  model.lookback = static_cast<std::size_t>(get_positive_int(doc, "/lookback"));
  const auto hidden = get_positive_ints(doc, "/hidden_sizes");
  if (hidden.empty()) throw corrupt("/hidden_sizes", "empty");
  const auto variant = parse_cell_variant(get_string(doc, "/cell_variant"));
  if (!variant) throw corrupt("/cell_variant", "unknown cell variant");
  model.cell_variant = *variant;

  model.scaler.column_names = get_strings(doc, "/scaler/column_names");
  model.scaler.mins = get_doubles(doc, "/scaler/mins");
  model.scaler.maxs = get_doubles(doc, "/scaler/maxs");
  if (model.scaler.column_names != model.feature_names) {
    throw corrupt("/scaler/column_names", "does not match feature_names");
  }
  if (model.scaler.mins.size() != model.feature_names.size()) throw corrupt("/scaler/mins", "wrong length");
  if (model.scaler.maxs.size() != model.feature_names.size()) throw corrupt("/scaler/maxs", "wrong length");
  for (std::size_t i = 0; i < model.scaler.mins.size(); ++i) {
    if (model.scaler.mins[i] > model.scaler.maxs[i]) {
      throw corrupt("/scaler/mins/" + std::to_string(i), "min exceeds max");
    }
  }

  auto& tc = model.train_config;
  tc.epochs = get_positive_int(doc, "/train_config/epochs");
  tc.batch_size = get_positive_int(doc, "/train_config/batch_size");
  tc.learning_rate = get_double(doc, "/train_config/learning_rate");
  tc.hidden_sizes = get_positive_ints(doc, "/train_config/hidden_sizes");
  tc.validation_fraction = get_double(doc, "/train_config/validation_fraction");
  tc.seed = get_u64(doc, "/train_config/seed");
  tc.gradient_clip_norm = get_double(doc, "/train_config/gradient_clip_norm");
  const auto tc_variant = parse_cell_variant(get_string(doc, "/train_config/cell_variant"));
  if (!tc_variant) throw corrupt("/train_config/cell_variant", "unknown cell variant");
  tc.cell_variant = *tc_variant;
  model.rng_seed = get_u64(doc, "/rng_seed");

  const auto column_set = parse_column_set(get_string(doc, "/column_set"));
  if (!column_set) throw corrupt("/column_set", "unknown column set");
  model.column_set = *column_set;
  auto& ic = model.indicator_config;
  ic.sma_periods = get_positive_ints(doc, "/indicator_config/sma_periods");
  ic.wma_period = get_positive_int(doc, "/indicator_config/wma_period");
  ic.ema_alpha = get_double(doc, "/indicator_config/ema_alpha");
  ic.rsi_period = get_positive_int(doc, "/indicator_config/rsi_period");
  ic.cci_period = get_positive_int(doc, "/indicator_config/cci_period");
  ic.stoch_k_period = get_positive_int(doc, "/indicator_config/stoch_k_period");
  ic.stoch_d_period = get_positive_int(doc, "/indicator_config/stoch_d_period");
  ic.macd_fast = get_positive_int(doc, "/indicator_config/macd_fast");
  ic.macd_slow = get_positive_int(doc, "/indicator_config/macd_slow");
  ic.macd_signal = get_positive_int(doc, "/indicator_config/macd_signal");
  try {
    ic.validate();
  } catch (const std::invalid_argument& e) {
    throw corrupt("/indicator_config", e.what());
  }
  model.train_fraction = get_double(doc, "/train_fraction");
  model.clip_scaled = get_bool(doc, "/clip_scaled");

  const json& layers = get_array(doc, "/layers");
  if (layers.size() != hidden.size()) throw corrupt("/layers", "count does not match hidden_sizes");
  std::size_t in = model.feature_names.size();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const std::string base = "/layers/" + std::to_string(k);
    const auto h = static_cast<std::size_t>(hidden[k]);
    if (get_int(doc, base + "/input_size") != static_cast<long long>(in)) {
      throw corrupt(base + "/input_size", "does not chain with previous layer");
    }
    if (get_int(doc, base + "/hidden_size") != static_cast<long long>(h)) {
      throw corrupt(base + "/hidden_size", "does not match hidden_sizes");
    }
    LstmLayerParams layer;
    Matrix* mats[] = {&layer.w_fx, &layer.w_ix, &layer.w_gx, &layer.w_ox,
                      &layer.w_fh, &layer.w_ih, &layer.w_gh, &layer.w_oh};
    for (std::size_t i = 0; i < 8; ++i) {
      *mats[i] = get_matrix(doc, base + "/" + kLayerKeys[i], h, i < 4 ? in : h);
    }
    Vector* vecs[] = {&layer.b_f, &layer.b_i, &layer.b_g, &layer.b_o};
    for (std::size_t i = 0; i < 4; ++i) *vecs[i] = get_vector(doc, base + "/" + kLayerKeys[8 + i], h);
    model.layers.push_back(std::move(layer));
    in = h;
  }
  model.head_weights = get_vector(doc, "/head/weights", in);
  model.head_bias = get_double(doc, "/head/bias");
  model.check_shapes();
  return model;
}

LstmModel load_model(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_model_string(buffer.str());
}

LstmModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ModelError err(ModelError::Kind::CorruptModel, "cannot open model file " + path);
    throw err;
  }
  return load_model(in);
}

}  // namespace stockcast
