#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "stockcast/dataset.hpp"
#include "stockcast/indicators.hpp"
#include "stockcast/scaling.hpp"

namespace stockcast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ModelError : public std::runtime_error {
 public:
  enum class Kind {
    ShapeMismatch,
    NonFiniteInput,
    CacheMismatch,
    EmptyDataset,
    NonFiniteLoss,
    UnsupportedVersion,
    CorruptModel,
    InvalidConfig,
  };
  ModelError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

  int epoch = 0;
  std::size_t batch = 0;
  std::string path;  // JSON pointer into the model document for CorruptModel

 private:
  Kind kind_;
};

// Standard: c = f*c_prev + i*g.
// AsPrinted: the input gate and candidate are summed instead of multiplied,
// i = sigmoid(.) + tanh(.), c = f*c_prev + i.
enum class CellVariant { Standard, AsPrinted };

std::string to_string(CellVariant variant);
std::optional<CellVariant> parse_cell_variant(std::string_view text);

struct LstmLayerParams {
  Matrix w_fx, w_ix, w_gx, w_ox;  // hidden x input
  Matrix w_fh, w_ih, w_gh, w_oh;  // hidden x hidden
  Vector b_f, b_i, b_g, b_o;

  static LstmLayerParams zeros(std::size_t input_size, std::size_t hidden_size);
  std::size_t input_size() const { return static_cast<std::size_t>(w_fx.cols()); }
  std::size_t hidden_size() const { return static_cast<std::size_t>(w_fx.rows()); }

  // Every weight and bias block, in serialization order.
  std::vector<std::span<double>> blocks();
  std::vector<std::span<const double>> blocks() const;
};

// Columns of h and c are independent sequences (batch).
struct LstmState {
  Matrix h;
  Matrix c;
  static LstmState zeros(std::size_t hidden, std::size_t batch = 1);
};

// Activations of one time step, kept for backpropagation.
struct StepCache {
  Matrix x, h_prev, c_prev;
  Matrix f, i, g, o;
  Matrix c, tanh_c;
};

// x is input_size x batch.
std::pair<LstmState, StepCache> cell_forward(const LstmLayerParams& params, const Matrix& x,
                                             const LstmState& prev,
                                             CellVariant variant = CellVariant::Standard);

enum class ModelMode { Univariate, Multivariate };

std::string to_string(ModelMode mode);
std::optional<ModelMode> parse_model_mode(std::string_view text);

struct TrainConfig {
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::vector<int> hidden_sizes{50, 50};
  double validation_fraction = 0.1;
  std::uint64_t seed = 42;
  double gradient_clip_norm = 5.0;
  CellVariant cell_variant = CellVariant::Standard;

  void validate() const;
};

struct LstmModel {
  ModelMode mode = ModelMode::Univariate;
  CellVariant cell_variant = CellVariant::Standard;
  std::vector<LstmLayerParams> layers;
  Vector head_weights;
  double head_bias = 0.0;
  ScalerParams scaler;
  std::vector<std::string> feature_names;
  std::size_t lookback = 0;
  TrainConfig train_config;
  std::uint64_t rng_seed = 0;

  // Feature pipeline needed to rebuild inputs from raw bars.
  ColumnSet column_set = ColumnSet::Univariate;
  IndicatorConfig indicator_config;
  double train_fraction = 0.8;
  bool clip_scaled = false;
  std::string symbol;

  std::size_t num_features() const { return feature_names.size(); }
  std::vector<int> hidden_sizes() const;
  // Throws ShapeMismatch if layer sizes do not chain.
  void check_shapes() const;
};

// Parameter gradients, shaped like the model's trainable parameters.
struct Gradients {
  std::vector<LstmLayerParams> layers;
  Vector head_weights;
  double head_bias = 0.0;
};

struct ForwardCache {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<std::vector<StepCache>> layers;  // [layer][step]
};

// Uniform in [-1/sqrt(hidden), 1/sqrt(hidden)] from a SplitMix64 stream; b_f = 1,
// other biases 0.
LstmLayerParams init_weights(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed);

// Fresh model with layer k seeded from the k-th draw of a SplitMix64 stream
// started at cfg.seed and the head drawn after that.
LstmModel init_model(std::size_t num_features, std::size_t lookback, const TrainConfig& cfg);

// window is lookback x num_features, row-major.
std::pair<double, ForwardCache> forward(const LstmModel& model, std::span<const double> window);

// inputs holds `batch` consecutive windows.
std::pair<Vector, ForwardCache> forward_batch(const LstmModel& model, std::span<const double> inputs,
                                              std::size_t batch);

// Prediction only; no caches kept.
double predict(const LstmModel& model, std::span<const double> window);
Vector predict_batch(const LstmModel& model, std::span<const double> inputs, std::size_t batch);

// d_prediction has one entry per batch column. Gradients are summed over the batch.
Gradients backward(const LstmModel& model, const ForwardCache& cache, const Vector& d_prediction);

// Mean squared error over a dataset.
double dataset_mse(const LstmModel& model, const WindowedDataset& ds);

struct TrainHistory {
  std::vector<double> train_mse;
  std::vector<double> val_mse;
};

struct EpochReport {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

// Adam over chronological mini-batches of the leading (1 - validation_fraction)
// share of train_ds; the tail is held out for validation.
std::pair<LstmModel, TrainHistory> train(LstmModel model, const WindowedDataset& train_ds,
                                         const TrainConfig& cfg,
                                         const std::function<void(const EpochReport&)>& on_epoch = {});

inline constexpr int kModelFormatVersion = 1;

void save_model(const LstmModel& model, std::ostream& out);
std::string save_model_string(const LstmModel& model);
void save_model_file(const LstmModel& model, const std::string& path);
LstmModel load_model(std::istream& in);
LstmModel load_model_string(const std::string& text);
LstmModel load_model_file(const std::string& path);

}  // namespace stockcast
