#include "stockcast/lstm.hpp"

#include <algorithm>
#include <cmath>

namespace stockcast {

namespace {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [-bound, bound)
  double uniform(double bound) {
    const double unit = static_cast<double>(next() >> 11) * 0x1.0p-53;
    return (2.0 * unit - 1.0) * bound;
  }

 private:
  std::uint64_t state_;
};

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

Matrix tanh_of(const Matrix& z) { return z.array().tanh().matrix(); }

void fill_uniform(Matrix& m, SplitMix64& rng, double bound) {
  // Row-major draw order so the stream layout does not depend on Eigen's storage.
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(bound);
  }
}

ModelError shape_error(const std::string& what) {
  return ModelError(ModelError::Kind::ShapeMismatch, what);
}

}  // namespace

std::string to_string(CellVariant variant) {
  return variant == CellVariant::Standard ? "standard" : "as_printed";
}

std::optional<CellVariant> parse_cell_variant(std::string_view text) {
  if (text == "standard") return CellVariant::Standard;
  if (text == "as_printed") return CellVariant::AsPrinted;
  return std::nullopt;
}

std::string to_string(ModelMode mode) {
  return mode == ModelMode::Univariate ? "univariate" : "multivariate";
}

std::optional<ModelMode> parse_model_mode(std::string_view text) {
  if (text == "univariate") return ModelMode::Univariate;
  if (text == "multivariate") return ModelMode::Multivariate;
  return std::nullopt;
}

LstmLayerParams LstmLayerParams::zeros(std::size_t input_size, std::size_t hidden_size) {
  const auto in = static_cast<Eigen::Index>(input_size);
  const auto h = static_cast<Eigen::Index>(hidden_size);
  LstmLayerParams p;
  for (Matrix* m : {&p.w_fx, &p.w_ix, &p.w_gx, &p.w_ox}) *m = Matrix::Zero(h, in);
  for (Matrix* m : {&p.w_fh, &p.w_ih, &p.w_gh, &p.w_oh}) *m = Matrix::Zero(h, h);
  for (Vector* v : {&p.b_f, &p.b_i, &p.b_g, &p.b_o}) *v = Vector::Zero(h);
  return p;
}

std::vector<std::span<double>> LstmLayerParams::blocks() {
  std::vector<std::span<double>> out;
  for (Matrix* m : {&w_fx, &w_ix, &w_gx, &w_ox, &w_fh, &w_ih, &w_gh, &w_oh}) {
    out.emplace_back(m->data(), static_cast<std::size_t>(m->size()));
  }
  for (Vector* v : {&b_f, &b_i, &b_g, &b_o}) {
    out.emplace_back(v->data(), static_cast<std::size_t>(v->size()));
  }
  return out;
}

std::vector<std::span<const double>> LstmLayerParams::blocks() const {
  std::vector<std::span<const double>> out;
  for (auto block : const_cast<LstmLayerParams*>(this)->blocks()) out.emplace_back(block);
  return out;
}

LstmState LstmState::zeros(std::size_t hidden, std::size_t batch) {
  const auto h = static_cast<Eigen::Index>(hidden);
  const auto b = static_cast<Eigen::Index>(batch);
  return {Matrix::Zero(h, b), Matrix::Zero(h, b)};
}

std::pair<LstmState, StepCache> cell_forward(const LstmLayerParams& params, const Matrix& x,
                                             const LstmState& prev, CellVariant variant) {
  if (x.rows() != params.w_fx.cols() || prev.h.rows() != params.w_fh.cols() ||
      prev.c.rows() != params.w_fh.rows() || prev.h.cols() != x.cols() ||
      prev.c.cols() != x.cols()) {
    throw shape_error("cell_forward: input or state shape does not match layer");
  }
  StepCache cache;
  cache.x = x;
  cache.h_prev = prev.h;
  cache.c_prev = prev.c;

  Matrix zf = params.w_fx * x + params.w_fh * prev.h;
  Matrix zi = params.w_ix * x + params.w_ih * prev.h;
  Matrix zg = params.w_gx * x + params.w_gh * prev.h;
  Matrix zo = params.w_ox * x + params.w_oh * prev.h;
  zf.colwise() += params.b_f;
  zi.colwise() += params.b_i;
  zg.colwise() += params.b_g;
  zo.colwise() += params.b_o;

  cache.f = sigmoid(zf);
  cache.i = sigmoid(zi);
  cache.g = tanh_of(zg);
  cache.o = sigmoid(zo);

  if (variant == CellVariant::Standard) {
    cache.c = cache.f.cwiseProduct(prev.c) + cache.i.cwiseProduct(cache.g);
  } else {
    cache.c = cache.f.cwiseProduct(prev.c) + cache.i + cache.g;
  }
  cache.tanh_c = tanh_of(cache.c);

  LstmState next{cache.o.cwiseProduct(cache.tanh_c), cache.c};
  return {std::move(next), std::move(cache)};
}

void TrainConfig::validate() const {
  const auto bad = [](const std::string& what) {
    return ModelError(ModelError::Kind::InvalidConfig, what);
  };
  if (epochs < 1) throw bad("epochs must be >= 1");
  if (batch_size < 1) throw bad("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw bad("learning_rate must be > 0");
  if (hidden_sizes.empty()) throw bad("hidden_sizes must not be empty");
  for (int h : hidden_sizes) {
    if (h < 1) throw bad("hidden sizes must be >= 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw bad("validation_fraction must be in (0,1)");
  }
  if (!(gradient_clip_norm > 0.0)) throw bad("gradient_clip_norm must be > 0");
}

std::vector<int> LstmModel::hidden_sizes() const {
  std::vector<int> out;
  for (const auto& layer : layers) out.push_back(static_cast<int>(layer.hidden_size()));
  return out;
}

void LstmModel::check_shapes() const {
  if (layers.empty()) throw shape_error("model has no layers");
  std::size_t expected_in = num_features();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    const auto in = static_cast<Eigen::Index>(layer.input_size());
    const auto h = static_cast<Eigen::Index>(layer.hidden_size());
    if (layer.input_size() != expected_in) {
      throw shape_error("layer " + std::to_string(k) + " expects " + std::to_string(expected_in) +
                        " inputs, has " + std::to_string(layer.input_size()));
    }
    for (const Matrix* m : {&layer.w_fx, &layer.w_ix, &layer.w_gx, &layer.w_ox}) {
      if (m->rows() != h || m->cols() != in) throw shape_error("layer " + std::to_string(k) + " input weights");
    }
    for (const Matrix* m : {&layer.w_fh, &layer.w_ih, &layer.w_gh, &layer.w_oh}) {
      if (m->rows() != h || m->cols() != h) throw shape_error("layer " + std::to_string(k) + " recurrent weights");
    }
    for (const Vector* v : {&layer.b_f, &layer.b_i, &layer.b_g, &layer.b_o}) {
      if (v->size() != h) throw shape_error("layer " + std::to_string(k) + " biases");
    }
    expected_in = layer.hidden_size();
  }
  if (static_cast<std::size_t>(head_weights.size()) != expected_in) {
    throw shape_error("head expects " + std::to_string(expected_in) + " inputs");
  }
}

LstmLayerParams init_weights(std::size_t input_size, std::size_t hidden_size, std::uint64_t seed) {
  if (input_size == 0 || hidden_size == 0) throw shape_error("layer sizes must be >= 1");
  LstmLayerParams p = LstmLayerParams::zeros(input_size, hidden_size);
  SplitMix64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
  for (Matrix* m : {&p.w_fx, &p.w_ix, &p.w_gx, &p.w_ox, &p.w_fh, &p.w_ih, &p.w_gh, &p.w_oh}) {
    fill_uniform(*m, rng, bound);
  }
  p.b_f.setOnes();
  return p;
}

LstmModel init_model(std::size_t num_features, std::size_t lookback, const TrainConfig& cfg) {
  cfg.validate();
  if (num_features == 0 || lookback == 0) throw shape_error("features and lookback must be >= 1");
  LstmModel model;
  model.cell_variant = cfg.cell_variant;
  model.lookback = lookback;
  model.train_config = cfg;
  model.rng_seed = cfg.seed;
  model.feature_names.assign(num_features, "");
  SplitMix64 stream(cfg.seed);
  std::size_t in = num_features;
  for (int h : cfg.hidden_sizes) {
    const auto hidden = static_cast<std::size_t>(h);
    model.layers.push_back(init_weights(in, hidden, stream.next()));
    in = hidden;
  }
  SplitMix64 head_rng(stream.next());
  model.head_weights = Vector::Zero(static_cast<Eigen::Index>(in));
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (Eigen::Index r = 0; r < model.head_weights.size(); ++r) model.head_weights(r) = head_rng.uniform(bound);
  model.head_bias = 0.0;
  return model;
}

namespace {

// Gathers time step `step` of every window into a (features x batch) matrix.
std::vector<Matrix> split_steps(std::span<const double> inputs, std::size_t batch,
                                std::size_t steps, std::size_t features) {
  std::vector<Matrix> xs(steps, Matrix(static_cast<Eigen::Index>(features), static_cast<Eigen::Index>(batch)));
  for (std::size_t b = 0; b < batch; ++b) {
    const double* sample = inputs.data() + b * steps * features;
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t f = 0; f < features; ++f) {
        xs[t](static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = sample[t * features + f];
      }
    }
  }
  return xs;
}

void check_inputs(const LstmModel& model, std::span<const double> inputs, std::size_t batch) {
  const std::size_t expected = batch * model.lookback * model.num_features();
  if (batch == 0 || inputs.size() != expected) {
    throw shape_error("expected " + std::to_string(expected) + " input values (batch " +
                      std::to_string(batch) + " x lookback " + std::to_string(model.lookback) +
                      " x features " + std::to_string(model.num_features()) + "), got " +
                      std::to_string(inputs.size()));
  }
  if (!std::all_of(inputs.begin(), inputs.end(), [](double v) { return std::isfinite(v); })) {
    throw ModelError(ModelError::Kind::NonFiniteInput, "input window contains non-finite values");
  }
}

Vector run_layers(const LstmModel& model, std::span<const double> inputs, std::size_t batch,
                  ForwardCache* cache) {
  check_inputs(model, inputs, batch);
  if (model.layers.empty()) throw shape_error("model has no layers");
  std::vector<Matrix> seq = split_steps(inputs, batch, model.lookback, model.num_features());
  if (cache != nullptr) {
    cache->batch = batch;
    cache->steps = model.lookback;
    cache->layers.assign(model.layers.size(), {});
  }
  for (std::size_t k = 0; k < model.layers.size(); ++k) {
    const auto& layer = model.layers[k];
    LstmState state = LstmState::zeros(layer.hidden_size(), batch);
    if (cache != nullptr) cache->layers[k].reserve(seq.size());
    for (auto& x : seq) {
      auto [next, step] = cell_forward(layer, x, state, model.cell_variant);
      state = std::move(next);
      x = state.h;  // this layer's output feeds the next layer
      if (cache != nullptr) cache->layers[k].push_back(std::move(step));
    }
  }
  if (model.head_weights.size() != seq.back().rows()) throw shape_error("head size mismatch");
  Vector pred = seq.back().transpose() * model.head_weights;
  pred.array() += model.head_bias;
  return pred;
}

}  // namespace

std::pair<Vector, ForwardCache> forward_batch(const LstmModel& model, std::span<const double> inputs,
                                              std::size_t batch) {
  ForwardCache cache;
  Vector pred = run_layers(model, inputs, batch, &cache);
  return {std::move(pred), std::move(cache)};
}

std::pair<double, ForwardCache> forward(const LstmModel& model, std::span<const double> window) {
  auto [pred, cache] = forward_batch(model, window, 1);
  return {pred(0), std::move(cache)};
}

Vector predict_batch(const LstmModel& model, std::span<const double> inputs, std::size_t batch) {
  return run_layers(model, inputs, batch, nullptr);
}

double predict(const LstmModel& model, std::span<const double> window) {
  return run_layers(model, window, 1, nullptr)(0);
}

Gradients backward(const LstmModel& model, const ForwardCache& cache, const Vector& d_prediction) {
  const std::size_t batch = cache.batch;
  if (cache.layers.size() != model.layers.size() || cache.steps != model.lookback ||
      static_cast<std::size_t>(d_prediction.size()) != batch || batch == 0) {
    throw ModelError(ModelError::Kind::CacheMismatch, "forward cache does not match model or upstream gradient");
  }
  for (const auto& layer_cache : cache.layers) {
    if (layer_cache.size() != cache.steps) {
      throw ModelError(ModelError::Kind::CacheMismatch, "forward cache has wrong number of steps");
    }
  }

  Gradients grads;
  for (const auto& layer : model.layers) {
    grads.layers.push_back(LstmLayerParams::zeros(layer.input_size(), layer.hidden_size()));
  }
  const Eigen::Index b = static_cast<Eigen::Index>(batch);
  const StepCache& top = cache.layers.back().back();
  const Matrix h_last = top.o.cwiseProduct(top.tanh_c);
  grads.head_weights = h_last * d_prediction;
  grads.head_bias = d_prediction.sum();

  const std::size_t steps = cache.steps;
  std::vector<Matrix> d_out(steps, Matrix::Zero(h_last.rows(), b));
  d_out[steps - 1] = model.head_weights * d_prediction.transpose();

  for (std::size_t k = model.layers.size(); k-- > 0;) {
    const auto& p = model.layers[k];
    auto& g = grads.layers[k];
    const auto hidden = static_cast<Eigen::Index>(p.hidden_size());
    Matrix dh_next = Matrix::Zero(hidden, b);
    Matrix dc_next = Matrix::Zero(hidden, b);
    std::vector<Matrix> d_in(steps);

    for (std::size_t t = steps; t-- > 0;) {
      const StepCache& s = cache.layers[k][t];
      const Matrix dh = d_out[t] + dh_next;
      const Matrix d_o = dh.cwiseProduct(s.tanh_c);
      const Matrix dc =
          dc_next + dh.cwiseProduct(s.o).cwiseProduct((1.0 - s.tanh_c.array().square()).matrix());
      const Matrix df = dc.cwiseProduct(s.c_prev);
      Matrix di;
      Matrix dg;
      if (model.cell_variant == CellVariant::Standard) {
        di = dc.cwiseProduct(s.g);
        dg = dc.cwiseProduct(s.i);
      } else {
        di = dc;
        dg = dc;
      }
      const Matrix dzf = (df.array() * s.f.array() * (1.0 - s.f.array())).matrix();
      const Matrix dzi = (di.array() * s.i.array() * (1.0 - s.i.array())).matrix();
      const Matrix dzg = (dg.array() * (1.0 - s.g.array().square())).matrix();
      const Matrix dzo = (d_o.array() * s.o.array() * (1.0 - s.o.array())).matrix();

      g.w_fx.noalias() += dzf * s.x.transpose();
      g.w_ix.noalias() += dzi * s.x.transpose();
      g.w_gx.noalias() += dzg * s.x.transpose();
      g.w_ox.noalias() += dzo * s.x.transpose();
      g.w_fh.noalias() += dzf * s.h_prev.transpose();
      g.w_ih.noalias() += dzi * s.h_prev.transpose();
      g.w_gh.noalias() += dzg * s.h_prev.transpose();
      g.w_oh.noalias() += dzo * s.h_prev.transpose();
      g.b_f += dzf.rowwise().sum();
      g.b_i += dzi.rowwise().sum();
      g.b_g += dzg.rowwise().sum();
      g.b_o += dzo.rowwise().sum();

      if (k > 0) {
        d_in[t] = p.w_fx.transpose() * dzf + p.w_ix.transpose() * dzi + p.w_gx.transpose() * dzg +
                  p.w_ox.transpose() * dzo;
      }
      dh_next = p.w_fh.transpose() * dzf + p.w_ih.transpose() * dzi + p.w_gh.transpose() * dzg +
                p.w_oh.transpose() * dzo;
      dc_next = dc.cwiseProduct(s.f);
    }
    if (k > 0) d_out = std::move(d_in);
  }
  return grads;
}

double dataset_mse(const LstmModel& model, const WindowedDataset& ds) {
  if (ds.num_samples() == 0) throw ModelError(ModelError::Kind::EmptyDataset, "empty dataset");
  constexpr std::size_t kChunk = 256;
  const std::size_t stride = ds.lookback * ds.num_features();
  double sum = 0.0;
  for (std::size_t begin = 0; begin < ds.num_samples(); begin += kChunk) {
    const std::size_t n = std::min(kChunk, ds.num_samples() - begin);
    const Vector pred = predict_batch(model, std::span(ds.inputs).subspan(begin * stride, n * stride), n);
    for (std::size_t s = 0; s < n; ++s) {
      const double err = pred(static_cast<Eigen::Index>(s)) - ds.targets[begin + s];
      sum += err * err;
    }
  }
  return sum / static_cast<double>(ds.num_samples());
}

namespace {

std::vector<std::span<double>> parameter_blocks(std::vector<LstmLayerParams>& layers, Vector& head_w,
                                                double& head_b) {
  std::vector<std::span<double>> out;
  for (auto& layer : layers) {
    for (auto block : layer.blocks()) out.push_back(block);
  }
  out.emplace_back(head_w.data(), static_cast<std::size_t>(head_w.size()));
  out.emplace_back(&head_b, 1);
  return out;
}

class Adam {
 public:
  Adam(std::size_t size, double lr) : lr_(lr), m_(size, 0.0), v_(size, 0.0) {}

  void step(const std::vector<std::span<double>>& params, const std::vector<std::span<double>>& grads) {
    ++t_;
    const double correction1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    std::size_t idx = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
      for (std::size_t j = 0; j < params[b].size(); ++j, ++idx) {
        const double g = grads[b][j];
        m_[idx] = kBeta1 * m_[idx] + (1.0 - kBeta1) * g;
        v_[idx] = kBeta2 * v_[idx] + (1.0 - kBeta2) * g * g;
        const double m_hat = m_[idx] / correction1;
        const double v_hat = v_[idx] / correction2;
        params[b][j] -= lr_ * m_hat / (std::sqrt(v_hat) + kEpsilon);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;
  double lr_;
  std::int64_t t_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
};

}  // namespace

std::pair<LstmModel, TrainHistory> train(LstmModel model, const WindowedDataset& train_ds,
                                         const TrainConfig& cfg,
                                         const std::function<void(const EpochReport&)>& on_epoch) {
  cfg.validate();
  model.check_shapes();
  const std::size_t n = train_ds.num_samples();
  const auto val_count =
      static_cast<std::size_t>(std::ceil(cfg.validation_fraction * static_cast<double>(n)));
  if (n == 0 || val_count >= n) {
    throw ModelError(ModelError::Kind::EmptyDataset,
                     "need at least one fitting and one validation sample, have " + std::to_string(n));
  }
  if (train_ds.lookback != model.lookback || train_ds.num_features() != model.num_features()) {
    throw shape_error("dataset shape does not match model");
  }
  const std::size_t fit_count = n - val_count;
  const WindowedDataset val_ds = train_ds.slice(fit_count, n);
  const std::size_t stride = train_ds.lookback * train_ds.num_features();
  const auto batch_size = static_cast<std::size_t>(cfg.batch_size);

  std::size_t param_count = 0;
  for (auto block : parameter_blocks(model.layers, model.head_weights, model.head_bias)) {
    param_count += block.size();
  }
  Adam adam(param_count, cfg.learning_rate);
  TrainHistory history;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t begin = 0; begin < fit_count; begin += batch_size, ++batch_index) {
      const std::size_t count = std::min(batch_size, fit_count - begin);
      auto [pred, cache] =
          forward_batch(model, std::span(train_ds.inputs).subspan(begin * stride, count * stride), count);
      Vector residual(static_cast<Eigen::Index>(count));
      for (std::size_t s = 0; s < count; ++s) {
        residual(static_cast<Eigen::Index>(s)) = pred(static_cast<Eigen::Index>(s)) - train_ds.targets[begin + s];
      }
      const double loss = residual.squaredNorm() / static_cast<double>(count);
      Gradients grads = backward(model, cache, (2.0 / static_cast<double>(count)) * residual);
      auto grad_blocks = parameter_blocks(grads.layers, grads.head_weights, grads.head_bias);

      double norm_sq = 0.0;
      for (auto block : grad_blocks) {
        for (double g : block) norm_sq += g * g;
      }
      if (!std::isfinite(loss) || !std::isfinite(norm_sq)) {
        ModelError err(ModelError::Kind::NonFiniteLoss,
                       "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
        err.epoch = epoch;
        err.batch = batch_index;
        throw err;
      }
      const double norm = std::sqrt(norm_sq);
      if (norm > cfg.gradient_clip_norm) {
        const double scale = cfg.gradient_clip_norm / norm;
        for (auto block : grad_blocks) {
          for (double& g : block) g *= scale;
        }
      }
      adam.step(parameter_blocks(model.layers, model.head_weights, model.head_bias), grad_blocks);
      loss_sum += loss * static_cast<double>(count);
    }
    EpochReport report{epoch, loss_sum / static_cast<double>(fit_count), dataset_mse(model, val_ds)};
    if (!std::isfinite(report.val_mse)) {
      ModelError err(ModelError::Kind::NonFiniteLoss,
                     "non-finite validation loss at epoch " + std::to_string(epoch));
      err.epoch = epoch;
      throw err;
    }
    history.train_mse.push_back(report.train_mse);
    history.val_mse.push_back(report.val_mse);
    if (on_epoch) on_epoch(report);
  }
  model.train_config = cfg;
  model.rng_seed = cfg.seed;
  return {std::move(model), std::move(history)};
}

}  // namespace stockcast
