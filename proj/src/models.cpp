#include "screening/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "binary_io.hpp"
#include "screening/rng.hpp"

namespace screening {

namespace {

constexpr double kMinScale = 1e-9;
constexpr char kMagic[4] = {'S', 'C', 'R', 'M'};
constexpr std::uint64_t kFormatVersion = 1;

void check_dim(std::uint32_t model_dim, std::uint32_t input_dim) {
  if (model_dim != input_dim) {
    throw ModelError("dimension mismatch: model expects " + std::to_string(model_dim) + ", input has " +
                     std::to_string(input_dim));
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw ConfigError("l2 must be non-negative");
  if (hidden_dim < 1) throw ConfigError("hidden_dim must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be non-negative");
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(double logit, bool label) noexcept {
  // softplus(z) - y z
  const double softplus = std::max(logit, 0.0) + std::log1p(std::exp(-std::abs(logit)));
  return softplus - (label ? logit : 0.0);
}

// ---------------------------------------------------------------------------
// LinearModel

LinearModel::LinearModel(std::uint32_t dim) : weights_(dim, 0.0) {
  if (dim == 0) throw ModelError("linear model dimension must be positive");
}

void LinearModel::set_weight(std::uint32_t i, double v) { weights_.at(i) = v / scale_; }

double LinearModel::logit(const SparseInput& x) const {
  check_dim(dim(), x.dim);
  double z = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) z += weights_[x.indices[k]] * x.values[k];
  return scale_ * z + bias_;
}

double LinearModel::parameter(std::size_t i) const {
  if (i < weights_.size()) return scale_ * weights_[i];
  if (i == weights_.size()) return bias_;
  throw std::out_of_range("linear parameter index");
}

void LinearModel::set_parameter(std::size_t i, double v) {
  if (i < weights_.size()) {
    weights_[i] = v / scale_;
  } else if (i == weights_.size()) {
    bias_ = v;
  } else {
    throw std::out_of_range("linear parameter index");
  }
}

std::vector<std::size_t> LinearModel::active_parameters(const FeatureVector& x) const {
  std::vector<std::size_t> out(x.indices.begin(), x.indices.end());
  out.push_back(weights_.size());
  return out;
}

double LinearModel::loss(const FeatureVector& x, bool label, double l2) const {
  double penalty = 0.0;
  if (l2 > 0.0) {
    for (double w : weights_) penalty += w * w;
    penalty *= 0.5 * l2 * scale_ * scale_;
  }
  return logistic_loss(logit(x), label) + penalty;
}

std::vector<double> LinearModel::loss_gradient(const FeatureVector& x, bool label, double l2) const {
  const double dlogit = sigmoid(logit(x)) - (label ? 1.0 : 0.0);
  std::vector<double> g(parameter_count(), 0.0);
  if (l2 > 0.0) {
    for (std::size_t i = 0; i < weights_.size(); ++i) g[i] = l2 * scale_ * weights_[i];
  }
  for (std::size_t k = 0; k < x.indices.size(); ++k) g[x.indices[k]] += dlogit * x.values[k];
  g.back() = dlogit;
  return g;
}

void LinearModel::normalize() {
  if (scale_ == 1.0) return;
  for (auto& w : weights_) w *= scale_;
  scale_ = 1.0;
}

bool LinearModel::all_finite() const {
  return std::isfinite(bias_) && std::isfinite(scale_) &&
         std::all_of(weights_.begin(), weights_.end(), [](double w) { return std::isfinite(w); });
}

double LinearModel::sgd_step(std::span<const Example> batch, double learning_rate, double l2) {
  if (grad_buffer_.size() != weights_.size()) grad_buffer_.assign(weights_.size(), 0.0);
  touched_.clear();
  double loss_sum = 0.0;
  double bias_grad = 0.0;
  for (const auto& ex : batch) {
    const FeatureVector& x = ex.x.get();
    const double z = logit(x);
    loss_sum += logistic_loss(z, ex.label);
    const double dlogit = sigmoid(z) - (ex.label ? 1.0 : 0.0);
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      const auto i = x.indices[k];
      if (grad_buffer_[i] == 0.0) touched_.push_back(i);
      grad_buffer_[i] += dlogit * x.values[k];
    }
    bias_grad += dlogit;
  }
  const double n = static_cast<double>(batch.size());
  const double mean_loss = loss_sum / n;
  if (!std::isfinite(mean_loss)) return mean_loss;

  // Weight decay on every weight, applied through the shared scale.
  scale_ *= (1.0 - learning_rate * l2);
  if (scale_ < kMinScale) normalize();
  const double step = learning_rate / n / scale_;
  for (auto i : touched_) {
    weights_[i] -= step * grad_buffer_[i];
    grad_buffer_[i] = 0.0;
  }
  // An index can repeat in touched_; its second visit sees a zeroed entry.
  bias_ -= learning_rate * bias_grad / n;
  return mean_loss;
}

void LinearModel::save(std::ostream& out) const {
  binio::put_u64(out, weights_.size());
  for (double w : weights_) binio::put_f64(out, scale_ * w);
  binio::put_f64(out, bias_);
}

LinearModel LinearModel::load(std::istream& in) {
  const auto dim = binio::get_u64(in);
  if (dim == 0 || dim > (1ULL << 32)) throw IoError("model file: bad linear dimension");
  LinearModel m(static_cast<std::uint32_t>(dim));
  for (auto& w : m.weights_) w = binio::get_f64(in);
  m.bias_ = binio::get_f64(in);
  if (!m.all_finite()) throw IoError("model file: non-finite parameters");
  return m;
}

// ---------------------------------------------------------------------------
// MlpGradient

MlpGradient::MlpGradient(std::uint32_t input_dim, std::size_t hidden_dim)
    : hidden_bias(hidden_dim, 0.0),
      output_weights(hidden_dim, 0.0),
      hidden_dim_(hidden_dim),
      slot_of_row_(input_dim, -1) {}

std::span<double> MlpGradient::row(std::uint32_t input_index) {
  auto& slot = slot_of_row_.at(input_index);
  if (slot < 0) {
    slot = static_cast<std::int32_t>(touched_.size());
    touched_.push_back(input_index);
    rows_.resize(rows_.size() + hidden_dim_, 0.0);
  }
  return {rows_.data() + static_cast<std::size_t>(slot) * hidden_dim_, hidden_dim_};
}

std::span<const double> MlpGradient::row_values(std::size_t slot) const {
  return {rows_.data() + slot * hidden_dim_, hidden_dim_};
}

void MlpGradient::clear() {
  for (auto i : touched_) slot_of_row_[i] = -1;
  touched_.clear();
  rows_.clear();
  std::fill(hidden_bias.begin(), hidden_bias.end(), 0.0);
  std::fill(output_weights.begin(), output_weights.end(), 0.0);
  output_bias = 0.0;
}

// ---------------------------------------------------------------------------
// MlpModel

MlpModel::MlpModel(std::uint32_t input_dim, std::size_t hidden_dim, Activation activation, double init_scale,
                   std::uint64_t seed)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      activation_(activation),
      hidden_weights_(static_cast<std::size_t>(input_dim) * hidden_dim),
      hidden_bias_(hidden_dim, 0.0),
      output_weights_(hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw ModelError("MLP dimensions must be positive");
  Rng rng(derive_seed(seed, {0x4d4c50}));
  for (auto& w : hidden_weights_) w = rng.uniform(-init_scale, init_scale);
  const double limit = std::sqrt(6.0 / static_cast<double>(hidden_dim + 1));
  for (auto& w : output_weights_) w = rng.uniform(-limit, limit);
}

double MlpModel::activate(double z) const noexcept {
  return activation_ == Activation::Relu ? std::max(z, 0.0) : std::tanh(z);
}

double MlpModel::activate_derivative(double z, double a) const noexcept {
  return activation_ == Activation::Relu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - a * a;
}

MlpState MlpModel::forward(const SparseInput& x) const {
  check_dim(input_dim_, x.dim);
  MlpState s;
  s.pre.assign(hidden_dim_, 0.0);
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    const double v = x.values[k];
    const double* row = hidden_weights_.data() + static_cast<std::size_t>(x.indices[k]) * hidden_dim_;
    for (std::size_t j = 0; j < hidden_dim_; ++j) s.pre[j] += v * row[j];
  }
  s.hidden.resize(hidden_dim_);
  for (std::size_t j = 0; j < hidden_dim_; ++j) {
    s.pre[j] = hidden_scale_ * s.pre[j] + hidden_bias_[j];
    s.hidden[j] = activate(s.pre[j]);
  }
  s.logit = output_logit(s.hidden);
  s.proba = sigmoid(s.logit);
  return s;
}

double MlpModel::output_logit(std::span<const double> hidden) const {
  if (hidden.size() != hidden_dim_) throw ModelError("hidden vector has wrong length");
  double z = output_bias_;
  for (std::size_t j = 0; j < hidden_dim_; ++j) z += output_weights_[j] * hidden[j];
  return z;
}

std::vector<double> MlpModel::backward(const SparseInput& x, const MlpState& state, double dlogit,
                                       MlpGradient& grad) const {
  std::vector<double> dhidden(hidden_dim_);
  for (std::size_t j = 0; j < hidden_dim_; ++j) {
    grad.output_weights[j] += dlogit * state.hidden[j];
    dhidden[j] = dlogit * output_weights_[j];
  }
  grad.output_bias += dlogit;
  return backward_hidden(x, state, dhidden, grad);
}

std::vector<double> MlpModel::backward_hidden(const SparseInput& x, const MlpState& state,
                                              std::span<const double> dhidden, MlpGradient& grad) const {
  std::vector<double> dpre(hidden_dim_);
  for (std::size_t j = 0; j < hidden_dim_; ++j) {
    dpre[j] = dhidden[j] * activate_derivative(state.pre[j], state.hidden[j]);
    grad.hidden_bias[j] += dpre[j];
  }
  for (std::size_t k = 0; k < x.indices.size(); ++k) {
    auto row = grad.row(x.indices[k]);
    const double v = x.values[k];
    for (std::size_t j = 0; j < hidden_dim_; ++j) row[j] += v * dpre[j];
  }
  return dpre;
}

std::vector<double> MlpModel::input_gradient(std::span<const double> dpre) const {
  if (dpre.size() != hidden_dim_) throw ModelError("pre-activation gradient has wrong length");
  std::vector<double> dx(input_dim_, 0.0);
  for (std::size_t i = 0; i < input_dim_; ++i) {
    const double* row = hidden_weights_.data() + i * hidden_dim_;
    double s = 0.0;
    for (std::size_t j = 0; j < hidden_dim_; ++j) s += row[j] * dpre[j];
    dx[i] = hidden_scale_ * s;
  }
  return dx;
}

void MlpModel::apply(const MlpGradient& grad, double learning_rate, double l2, std::size_t batch_size) {
  const double n = static_cast<double>(batch_size);
  const double decay = 1.0 - learning_rate * l2;
  hidden_scale_ *= decay;
  if (hidden_scale_ < kMinScale) normalize();
  const double step = learning_rate / n / hidden_scale_;
  const auto rows = grad.touched_rows();
  for (std::size_t slot = 0; slot < rows.size(); ++slot) {
    double* w = hidden_weights_.data() + static_cast<std::size_t>(rows[slot]) * hidden_dim_;
    const auto g = grad.row_values(slot);
    for (std::size_t j = 0; j < hidden_dim_; ++j) w[j] -= step * g[j];
  }
  for (std::size_t j = 0; j < hidden_dim_; ++j) {
    hidden_bias_[j] -= learning_rate * grad.hidden_bias[j] / n;
    output_weights_[j] = decay * output_weights_[j] - learning_rate * grad.output_weights[j] / n;
  }
  output_bias_ -= learning_rate * grad.output_bias / n;
}

std::size_t MlpModel::parameter_count() const noexcept { return hidden_weights_.size() + 2 * hidden_dim_ + 1; }

double MlpModel::parameter(std::size_t i) const {
  const std::size_t nw = hidden_weights_.size();
  if (i < nw) return hidden_scale_ * hidden_weights_[i];
  i -= nw;
  if (i < hidden_dim_) return hidden_bias_[i];
  i -= hidden_dim_;
  if (i < hidden_dim_) return output_weights_[i];
  if (i == hidden_dim_) return output_bias_;
  throw std::out_of_range("mlp parameter index");
}

void MlpModel::set_parameter(std::size_t i, double v) {
  const std::size_t nw = hidden_weights_.size();
  if (i < nw) {
    hidden_weights_[i] = v / hidden_scale_;
    return;
  }
  i -= nw;
  if (i < hidden_dim_) {
    hidden_bias_[i] = v;
    return;
  }
  i -= hidden_dim_;
  if (i < hidden_dim_) {
    output_weights_[i] = v;
    return;
  }
  if (i == hidden_dim_) {
    output_bias_ = v;
    return;
  }
  throw std::out_of_range("mlp parameter index");
}

std::vector<std::size_t> MlpModel::active_parameters(const FeatureVector& x) const {
  std::vector<std::size_t> out;
  for (auto i : x.indices) {
    for (std::size_t j = 0; j < hidden_dim_; ++j) out.push_back(static_cast<std::size_t>(i) * hidden_dim_ + j);
  }
  for (std::size_t j = 0; j < 2 * hidden_dim_ + 1; ++j) out.push_back(hidden_weights_.size() + j);
  return out;
}

double MlpModel::half_squared_weight_norm() const {
  double hw = 0.0;
  for (double w : hidden_weights_) hw += w * w;
  double ow = 0.0;
  for (double w : output_weights_) ow += w * w;
  return 0.5 * (hidden_scale_ * hidden_scale_ * hw + ow);
}

double MlpModel::loss(const FeatureVector& x, bool label, double l2) const {
  const double penalty = l2 > 0.0 ? l2 * half_squared_weight_norm() : 0.0;
  return logistic_loss(forward(x).logit, label) + penalty;
}

std::vector<double> MlpModel::loss_gradient(const FeatureVector& x, bool label, double l2) const {
  const auto state = forward(x);
  MlpGradient g(input_dim_, hidden_dim_);
  backward(x, state, state.proba - (label ? 1.0 : 0.0), g);
  return flatten_gradient(g, l2);
}

std::vector<double> MlpModel::flatten_gradient(const MlpGradient& g, double l2) const {
  std::vector<double> flat(parameter_count(), 0.0);
  if (l2 > 0.0) {
    for (std::size_t i = 0; i < hidden_weights_.size(); ++i) flat[i] = l2 * hidden_scale_ * hidden_weights_[i];
  }
  const auto rows = g.touched_rows();
  for (std::size_t slot = 0; slot < rows.size(); ++slot) {
    const auto values = g.row_values(slot);
    double* dst = flat.data() + static_cast<std::size_t>(rows[slot]) * hidden_dim_;
    for (std::size_t j = 0; j < hidden_dim_; ++j) dst[j] += values[j];
  }
  const std::size_t nw = hidden_weights_.size();
  for (std::size_t j = 0; j < hidden_dim_; ++j) {
    flat[nw + j] = g.hidden_bias[j];
    flat[nw + hidden_dim_ + j] = g.output_weights[j] + l2 * output_weights_[j];
  }
  flat.back() = g.output_bias;
  return flat;
}

double MlpModel::sgd_step(std::span<const Example> batch, double learning_rate, double l2, MlpGradient& scratch) {
  scratch.clear();
  double loss_sum = 0.0;
  for (const auto& ex : batch) {
    const FeatureVector& x = ex.x.get();
    const auto state = forward(x);
    loss_sum += logistic_loss(state.logit, ex.label);
    backward(x, state, state.proba - (ex.label ? 1.0 : 0.0), scratch);
  }
  const double mean_loss = loss_sum / static_cast<double>(batch.size());
  if (std::isfinite(mean_loss)) apply(scratch, learning_rate, l2, batch.size());
  return mean_loss;
}

void MlpModel::normalize() {
  if (hidden_scale_ == 1.0) return;
  for (auto& w : hidden_weights_) w *= hidden_scale_;
  hidden_scale_ = 1.0;
}

bool MlpModel::all_finite() const {
  auto finite = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return finite(hidden_weights_) && finite(hidden_bias_) && finite(output_weights_) && std::isfinite(output_bias_) &&
         std::isfinite(hidden_scale_);
}

void MlpModel::save(std::ostream& out) const {
  binio::put_u64(out, input_dim_);
  binio::put_u64(out, hidden_dim_);
  binio::put_u64(out, static_cast<std::uint64_t>(activation_));
  binio::put_u64(out, hidden_weights_.size());
  for (double w : hidden_weights_) binio::put_f64(out, hidden_scale_ * w);
  binio::put_f64s(out, hidden_bias_);
  binio::put_f64s(out, output_weights_);
  binio::put_f64(out, output_bias_);
}

MlpModel MlpModel::load(std::istream& in) {
  MlpModel m;
  const auto input_dim = binio::get_u64(in);
  const auto hidden_dim = binio::get_u64(in);
  const auto activation = binio::get_u64(in);
  if (input_dim == 0 || input_dim > (1ULL << 32) || hidden_dim == 0 || hidden_dim > (1ULL << 16) || activation > 1) {
    throw IoError("model file: bad MLP header");
  }
  m.input_dim_ = static_cast<std::uint32_t>(input_dim);
  m.hidden_dim_ = hidden_dim;
  m.activation_ = static_cast<Activation>(activation);
  m.hidden_weights_ = binio::get_f64s(in, input_dim * hidden_dim);
  m.hidden_bias_ = binio::get_f64s(in, hidden_dim);
  m.output_weights_ = binio::get_f64s(in, hidden_dim);
  m.output_bias_ = binio::get_f64(in);
  if (!m.all_finite()) throw IoError("model file: non-finite parameters");
  return m;
}

// ---------------------------------------------------------------------------
// Free functions

ModelKind kind_of(const AnyModel& model) noexcept {
  return std::holds_alternative<LinearModel>(model) ? ModelKind::Linear : ModelKind::Mlp;
}

std::uint32_t input_dim(const AnyModel& model) noexcept {
  return std::visit(
      [](const auto& m) -> std::uint32_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, LinearModel>) {
          return m.dim();
        } else {
          return m.input_dim();
        }
      },
      model);
}

double predict_proba(const AnyModel& model, const FeatureVector& x) {
  return std::visit([&x](const auto& m) { return m.predict_proba(x); }, model);
}

bool predict(const AnyModel& model, const FeatureVector& x, double threshold) {
  return predict_proba(model, x) >= threshold;
}

std::vector<double> embed(const MlpModel& model, const FeatureVector& x) { return model.embed(x); }

namespace {

void check_data(std::span<const Example> data) {
  if (data.empty()) throw TrainingError("empty training set");
  const auto dim = data.front().x.get().dim;
  for (const auto& ex : data) {
    if (ex.x.get().dim != dim) throw TrainingError("training vectors disagree on dimension");
  }
}

template <typename Step>
void run_sgd(std::span<const Example> data, const TrainConfig& config, const StepCallback& on_step, Step&& step) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, {0x5344}));
  std::vector<Example> batch;
  batch.reserve(config.batch_size);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t k = start; k < stop; ++k) batch.push_back(data[order[k]]);
      const double loss = step(std::span<const Example>(batch));
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      if (on_step) on_step(StepInfo{epoch, batch_index, loss});
    }
  }
}

}  // namespace

LinearModel train_linear(std::span<const Example> data, const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  check_data(data);
  LinearModel model(data.front().x.get().dim);
  run_sgd(data, config, on_step, [&](std::span<const Example> batch) {
    return model.sgd_step(batch, config.learning_rate, config.l2);
  });
  model.normalize();
  if (!model.all_finite()) throw TrainingError("training produced non-finite parameters");
  return model;
}

void continue_training(MlpModel& model, std::span<const Example> data, const TrainConfig& config,
                       const StepCallback& on_step) {
  config.validate();
  check_data(data);
  check_dim(model.input_dim(), data.front().x.get().dim);
  MlpGradient scratch(model.input_dim(), model.hidden_dim());
  run_sgd(data, config, on_step, [&](std::span<const Example> batch) {
    return model.sgd_step(batch, config.learning_rate, config.l2, scratch);
  });
  model.normalize();
  if (!model.all_finite()) throw TrainingError("training produced non-finite parameters");
}

MlpModel train_mlp(std::span<const Example> data, const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  check_data(data);
  MlpModel model(data.front().x.get().dim, config.hidden_dim, config.activation, config.init_scale, config.seed);
  continue_training(model, data, config, on_step);
  return model;
}

AnyModel train(ModelKind kind, std::span<const Example> data, const TrainConfig& config, const StepCallback& on_step) {
  if (kind == ModelKind::Linear) return train_linear(data, config, on_step);
  return train_mlp(data, config, on_step);
}

void save_model(std::ostream& out, const AnyModel& model, const TrainConfig& config,
                std::uint64_t featurizer_fingerprint) {
  out.write(kMagic, 4);
  binio::put_u64(out, kFormatVersion);
  binio::put_u64(out, static_cast<std::uint64_t>(kind_of(model)));
  binio::put_u64(out, featurizer_fingerprint);
  binio::put_f64(out, config.learning_rate);
  binio::put_u64(out, static_cast<std::uint64_t>(config.epochs));
  binio::put_u64(out, config.batch_size);
  binio::put_f64(out, config.l2);
  binio::put_u64(out, config.seed);
  binio::put_u64(out, config.hidden_dim);
  binio::put_u64(out, static_cast<std::uint64_t>(config.activation));
  binio::put_f64(out, config.init_scale);
  std::visit([&out](const auto& m) { m.save(out); }, model);
  if (!out) throw IoError("failed writing model");
}

LoadedModel load_model(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) throw IoError("not a model file");
  const auto version = binio::get_u64(in);
  if (version != kFormatVersion) throw IoError("unsupported model file version " + std::to_string(version));
  const auto kind = binio::get_u64(in);
  if (kind > 1) throw IoError("model file: unknown model kind");
  const auto fingerprint = binio::get_u64(in);
  TrainConfig config;
  config.learning_rate = binio::get_f64(in);
  config.epochs = static_cast<int>(binio::get_u64(in));
  config.batch_size = binio::get_u64(in);
  config.l2 = binio::get_f64(in);
  config.seed = binio::get_u64(in);
  config.hidden_dim = binio::get_u64(in);
  const auto activation = binio::get_u64(in);
  if (activation > 1) throw IoError("model file: unknown activation");
  config.activation = static_cast<Activation>(activation);
  config.init_scale = binio::get_f64(in);
  if (static_cast<ModelKind>(kind) == ModelKind::Linear) {
    return {LinearModel::load(in), config, fingerprint};
  }
  return {MlpModel::load(in), config, fingerprint};
}

std::string_view model_kind_name(ModelKind k) noexcept { return k == ModelKind::Linear ? "linear" : "mlp"; }

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
  if (name == "linear") return ModelKind::Linear;
  if (name == "mlp") return ModelKind::Mlp;
  return std::nullopt;
}

std::string_view activation_name(Activation a) noexcept { return a == Activation::Relu ? "relu" : "tanh"; }

std::optional<Activation> parse_activation(std::string_view name) noexcept {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  return std::nullopt;
}

}  // namespace screening
