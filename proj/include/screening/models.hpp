#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "screening/error.hpp"
#include "screening/features.hpp"

namespace screening {

enum class ModelKind : std::uint8_t { Linear, Mlp };
enum class Activation : std::uint8_t { Relu, Tanh };

struct TrainConfig {
  double learning_rate = 0.1;
  int epochs = 10;
  std::size_t batch_size = 32;
  double l2 = 1e-6;
  std::uint64_t seed = 0;
  // MLP only.
  std::size_t hidden_dim = 32;
  Activation activation = Activation::Relu;
  double init_scale = 0.05;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Read-only sparse input. FeatureVector converts implicitly; dense inputs
/// (the ensemble combiner) pass an index ramp.
struct SparseInput {
  std::uint32_t dim = 0;
  std::span<const std::uint32_t> indices;
  std::span<const double> values;

  SparseInput() = default;
  SparseInput(std::uint32_t d, std::span<const std::uint32_t> i, std::span<const double> v)
      : dim(d), indices(i), values(v) {}
  SparseInput(const FeatureVector& fv)  // NOLINT(google-explicit-constructor)
      : dim(fv.dim), indices(fv.indices), values(fv.values) {}
};

struct Example {
  std::reference_wrapper<const FeatureVector> x;
  bool label;
};

struct StepInfo {
  int epoch;
  std::size_t batch;
  double mean_loss;  // batch loss before the update is applied
};
using StepCallback = std::function<void(const StepInfo&)>;

double sigmoid(double z) noexcept;
/// Binary cross-entropy of a logit, computed without overflow.
double logistic_loss(double logit, bool label) noexcept;

class LinearModel {
 public:
  LinearModel() = default;
  explicit LinearModel(std::uint32_t dim);

  std::uint32_t dim() const noexcept { return static_cast<std::uint32_t>(weights_.size()); }
  double weight(std::uint32_t i) const { return scale_ * weights_.at(i); }
  double bias() const noexcept { return bias_; }
  void set_weight(std::uint32_t i, double v);
  void set_bias(double v) noexcept { bias_ = v; }

  double logit(const SparseInput& x) const;
  double predict_proba(const SparseInput& x) const { return sigmoid(logit(x)); }

  // Flat parameter layout: weights[0..dim), bias.
  std::size_t parameter_count() const noexcept { return weights_.size() + 1; }
  double parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double v);
  std::vector<std::size_t> active_parameters(const FeatureVector& x) const;
  /// Per-sample BCE + (l2/2)||w||^2 and its dense gradient.
  double loss(const FeatureVector& x, bool label, double l2) const;
  std::vector<double> loss_gradient(const FeatureVector& x, bool label, double l2) const;

  /// Folds the lazy L2 scale back into the stored weights.
  void normalize();
  bool all_finite() const;

  /// One SGD step on a batch of mean BCE + (l2/2)||w||^2. Returns the batch
  /// mean BCE at the pre-update parameters.
  double sgd_step(std::span<const Example> batch, double learning_rate, double l2);

  void save(std::ostream& out) const;
  static LinearModel load(std::istream& in);

 private:
  std::vector<double> weights_;
  double scale_ = 1.0;
  double bias_ = 0.0;
  // scratch for sgd_step
  std::vector<double> grad_buffer_;
  std::vector<std::uint32_t> touched_;
};

/// Activations of one forward pass.
struct MlpState {
  std::vector<double> pre;     // hidden pre-activation
  std::vector<double> hidden;  // hidden activation (the embedding)
  double logit = 0.0;
  double proba = 0.5;
};

/// Sparse row-wise gradient of the input-to-hidden matrix plus dense parts.
class MlpGradient {
 public:
  MlpGradient(std::uint32_t input_dim, std::size_t hidden_dim);

  std::span<double> row(std::uint32_t input_index);
  std::span<const std::uint32_t> touched_rows() const noexcept { return touched_; }
  std::span<const double> row_values(std::size_t slot) const;

  std::vector<double> hidden_bias;
  std::vector<double> output_weights;
  double output_bias = 0.0;

  void clear();

 private:
  std::size_t hidden_dim_;
  std::vector<std::int32_t> slot_of_row_;
  std::vector<std::uint32_t> touched_;
  std::vector<double> rows_;
};

class MlpModel {
 public:
  MlpModel() = default;
  /// Hidden weights ~ U(-init_scale, init_scale); output weights Glorot-uniform;
  /// biases zero.
  MlpModel(std::uint32_t input_dim, std::size_t hidden_dim, Activation activation, double init_scale,
           std::uint64_t seed);

  std::uint32_t input_dim() const noexcept { return input_dim_; }
  std::size_t hidden_dim() const noexcept { return hidden_dim_; }
  Activation activation() const noexcept { return activation_; }

  MlpState forward(const SparseInput& x) const;
  double predict_proba(const SparseInput& x) const { return forward(x).proba; }
  std::vector<double> embed(const SparseInput& x) const { return forward(x).hidden; }
  /// Output layer applied to a hidden activation vector.
  double output_logit(std::span<const double> hidden) const;

  /// Accumulates d(loss)/d(params) for a sample whose output-logit gradient
  /// is `dlogit`; returns d(loss)/d(hidden pre-activation).
  std::vector<double> backward(const SparseInput& x, const MlpState& state, double dlogit, MlpGradient& grad) const;
  /// Backpropagates a gradient on the hidden activation into the first layer
  /// only (output layer untouched); returns d(loss)/d(hidden pre-activation).
  std::vector<double> backward_hidden(const SparseInput& x, const MlpState& state, std::span<const double> dhidden,
                                      MlpGradient& grad) const;
  /// Dense d(loss)/d(input) given d(loss)/d(hidden pre-activation).
  std::vector<double> input_gradient(std::span<const double> dpre) const;
  /// params -= lr * (grad / batch_size + l2 * weights); biases unregularized.
  void apply(const MlpGradient& grad, double learning_rate, double l2, std::size_t batch_size);

  // Flat layout: hidden weights (input-major), hidden bias, output weights, output bias.
  std::size_t parameter_count() const noexcept;
  double parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double v);
  std::vector<std::size_t> active_parameters(const FeatureVector& x) const;
  double loss(const FeatureVector& x, bool label, double l2) const;
  std::vector<double> loss_gradient(const FeatureVector& x, bool label, double l2) const;
  /// (1/2)||W_hidden||^2 + (1/2)||w_out||^2
  double half_squared_weight_norm() const;
  /// Flat gradient (parameter layout) of an accumulated MlpGradient plus the
  /// l2 term on every weight.
  std::vector<double> flatten_gradient(const MlpGradient& grad, double l2) const;

  double sgd_step(std::span<const Example> batch, double learning_rate, double l2, MlpGradient& scratch);

  void normalize();
  bool all_finite() const;

  void save(std::ostream& out) const;
  static MlpModel load(std::istream& in);

  // Raw access for composed networks.
  std::span<const double> hidden_bias() const noexcept { return hidden_bias_; }
  std::span<const double> output_weights() const noexcept { return output_weights_; }
  double output_bias() const noexcept { return output_bias_; }

 private:
  double activate(double z) const noexcept;
  double activate_derivative(double z, double a) const noexcept;

  std::uint32_t input_dim_ = 0;
  std::size_t hidden_dim_ = 0;
  Activation activation_ = Activation::Relu;
  std::vector<double> hidden_weights_;  // input_dim x hidden_dim, scaled by hidden_scale_
  double hidden_scale_ = 1.0;
  std::vector<double> hidden_bias_;
  std::vector<double> output_weights_;
  double output_bias_ = 0.0;
};

using AnyModel = std::variant<LinearModel, MlpModel>;

ModelKind kind_of(const AnyModel& model) noexcept;
std::uint32_t input_dim(const AnyModel& model) noexcept;

/// Throws ModelError on dimension mismatch.
double predict_proba(const AnyModel& model, const FeatureVector& x);
/// Positive iff predict_proba >= threshold.
bool predict(const AnyModel& model, const FeatureVector& x, double threshold = 0.5);
/// Hidden activation of an MLP. Throws ModelError on dimension mismatch.
std::vector<double> embed(const MlpModel& model, const FeatureVector& x);

/// Seeded mini-batch SGD on mean BCE + (l2/2)||w||^2 with a per-epoch
/// shuffle. Throws TrainingError on empty data or a non-finite loss.
LinearModel train_linear(std::span<const Example> data, const TrainConfig& config,
                         const StepCallback& on_step = {});
MlpModel train_mlp(std::span<const Example> data, const TrainConfig& config, const StepCallback& on_step = {});
AnyModel train(ModelKind kind, std::span<const Example> data, const TrainConfig& config,
               const StepCallback& on_step = {});

/// Continues SGD on an existing MLP (used for fine-tuning).
void continue_training(MlpModel& model, std::span<const Example> data, const TrainConfig& config,
                       const StepCallback& on_step = {});

/// Versioned little-endian binary format. The featurizer fingerprint is
/// stored alongside so a mismatched reload can be detected.
void save_model(std::ostream& out, const AnyModel& model, const TrainConfig& config, std::uint64_t featurizer_fingerprint);
struct LoadedModel {
  AnyModel model;
  TrainConfig config;
  std::uint64_t featurizer_fingerprint;
};
LoadedModel load_model(std::istream& in);

std::string_view model_kind_name(ModelKind k) noexcept;
std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;
std::string_view activation_name(Activation a) noexcept;
std::optional<Activation> parse_activation(std::string_view name) noexcept;

}  // namespace screening
