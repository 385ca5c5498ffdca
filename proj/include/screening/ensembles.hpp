#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "screening/corpus.hpp"
#include "screening/features.hpp"
#include "screening/models.hpp"
#include "screening/sampling.hpp"

namespace screening {

enum class ArchitectureKind : std::uint8_t { Itl, Cascade, Boolean, Ffn };

std::string_view architecture_name(ArchitectureKind k) noexcept;
std::optional<ArchitectureKind> parse_architecture(std::string_view name) noexcept;

/// One criterion gate: positive iff the article's rating is in `accept`.
struct Stage {
  Criterion criterion;
  RatingSet accept;

  bool positive(const CriterionRatings& r) const noexcept { return accept.contains(r.code(criterion)); }
  bool rated(const CriterionRatings& r) const noexcept { return r.is_rated(criterion); }
  /// e.g. "original" / "not original"
  std::string label_name(bool positive_label) const;
};

/// Ordered stages whose conjunction is the positive class.
class TaskSpec {
 public:
  static constexpr std::array<Criterion, 4> kDefaultOrder = kCriteria;

  /// Throws ConfigError unless the order names four distinct criteria.
  explicit TaskSpec(const PositiveClassSpec& spec, std::array<Criterion, 4> order = kDefaultOrder);
  /// Explicit stages; throws ConfigError unless they are four distinct
  /// criteria whose conjunction equals `spec`.
  TaskSpec(std::vector<Stage> stages, const PositiveClassSpec& spec);

  const std::vector<Stage>& stages() const noexcept { return stages_; }
  std::size_t size() const noexcept { return stages_.size(); }
  const Stage& operator[](std::size_t k) const { return stages_.at(k); }
  const PositiveClassSpec& spec() const noexcept { return spec_; }
  std::array<Criterion, 4> order() const noexcept;

  bool label(const CriterionRatings& r) const noexcept { return spec_.accept.matches(r); }

 private:
  std::vector<Stage> stages_;
  PositiveClassSpec spec_;
};

enum class CascadeTrainFilter : std::uint8_t { Gold, Predicted };

struct CombinerConfig {
  TrainConfig train = [] {
    TrainConfig t;
    t.hidden_dim = 32;
    t.activation = Activation::Relu;
    t.init_scale = 0.1;
    return t;
  }();
  /// Sampling of the final-label training set for joint training.
  SamplingPlan sampling = SamplingPlan::balanced();
};

struct ArchitectureConfig {
  ArchitectureKind kind = ArchitectureKind::Cascade;
  ModelKind model_kind = ModelKind::Linear;
  TrainConfig model;
  /// Per-stage overrides of `model` (empty, or one per stage).
  std::vector<TrainConfig> stage_models;
  /// ITL training-set plan.
  SamplingPlan itl_sampling = SamplingPlan::balanced();
  /// Per-stage plan for Cascade/Boolean/FFN stage models; the default keeps
  /// the minority class whole and matches the majority to it.
  SamplingPlan stage_sampling{SampleTarget::minority(), SampleTarget::minority(), 0};
  CascadeTrainFilter cascade_filter = CascadeTrainFilter::Gold;
  CombinerConfig combiner;

  const TrainConfig& stage_config(std::size_t k) const;
  void validate() const;
};

/// Training rows: indices into a corpus and its precomputed feature vectors.
struct TrainingView {
  const Corpus& corpus;
  std::span<const FeatureVector> features;
  std::span<const std::size_t> indices;
};

/// Stage MLPs whose hidden activations are concatenated and fed to a
/// combiner MLP; trained jointly end to end.
class FfnNetwork {
 public:
  FfnNetwork(std::vector<MlpModel> stages, MlpModel combiner);

  const std::vector<MlpModel>& stages() const noexcept { return stages_; }
  const MlpModel& combiner() const noexcept { return combiner_; }
  std::pair<std::vector<MlpModel>, MlpModel> release() && { return {std::move(stages_), std::move(combiner_)}; }

  /// Concatenated stage embeddings (length stages * h).
  std::vector<double> combined_input(const FeatureVector& x) const;
  double predict_proba(const FeatureVector& x) const;

  // Flat layout: each stage's parameters in order, then the combiner's.
  std::size_t parameter_count() const noexcept;
  double parameter(std::size_t i) const;
  void set_parameter(std::size_t i, double v);
  std::vector<std::size_t> active_parameters(const FeatureVector& x) const;
  /// BCE of the combiner output + (l2/2) * squared weights of every model.
  double loss(const FeatureVector& x, bool label, double l2) const;
  std::vector<double> loss_gradient(const FeatureVector& x, bool label, double l2) const;

  struct Scratch {
    std::vector<MlpGradient> stages;
    MlpGradient combiner;
  };
  Scratch make_scratch() const;
  /// Accumulates the gradient of one sample into `scratch`; returns its BCE.
  double accumulate(const FeatureVector& x, bool label, Scratch& scratch) const;
  double sgd_step(std::span<const Example> batch, double learning_rate, double l2, Scratch& scratch);

 private:
  struct Forward {
    std::vector<MlpState> stage_states;
    std::vector<double> input;
    MlpState combiner_state;
  };
  Forward run_forward(const FeatureVector& x) const;

  std::vector<MlpModel> stages_;
  MlpModel combiner_;
  std::vector<std::uint32_t> ramp_;
};

struct StageOutcome {
  bool evaluated = false;
  double probability = 0.0;
  bool decision = false;
};

struct Prediction {
  bool label = false;
  /// ITL and FFN only.
  std::optional<double> probability;
  /// Cascade and Boolean only; unevaluated cascade stages have evaluated=false.
  std::vector<StageOutcome> stages;

  std::size_t stages_evaluated() const noexcept;
};

class TrainedEnsemble {
 public:
  /// Installs fixed models. ITL takes one model, Cascade/Boolean one per
  /// stage; FFN one MLP per stage plus the combiner. Thresholds default 0.5.
  TrainedEnsemble(ArchitectureKind kind, TaskSpec task, FeaturizerConfig featurizer, std::vector<AnyModel> models,
                  std::optional<MlpModel> combiner = std::nullopt, std::vector<double> thresholds = {});

  ArchitectureKind kind() const noexcept { return kind_; }
  const TaskSpec& task() const noexcept { return task_; }
  const FeaturizerConfig& featurizer() const noexcept { return featurizer_; }
  const std::vector<AnyModel>& models() const noexcept { return models_; }
  const std::optional<MlpModel>& combiner() const noexcept { return combiner_; }
  /// One per model, then one for the combiner when present.
  const std::vector<double>& thresholds() const noexcept { return thresholds_; }
  void set_threshold(std::size_t k, double t);

  Prediction predict(const FeatureVector& x) const;
  Prediction predict(const Article& article) const;

  /// Bundle directory: manifest.json plus one binary file per model.
  void save(const std::filesystem::path& dir, const std::vector<TrainConfig>& configs = {}) const;
  static TrainedEnsemble load(const std::filesystem::path& dir);

 private:
  ArchitectureKind kind_;
  TaskSpec task_;
  FeaturizerConfig featurizer_;
  std::vector<AnyModel> models_;
  std::optional<MlpModel> combiner_;
  std::vector<double> thresholds_;
};

/// Stops at the first negative stage.
Prediction predict_cascade(const TrainedEnsemble& ensemble, const FeatureVector& x);
/// Evaluates every stage; label is the conjunction.
Prediction predict_boolean(const TrainedEnsemble& ensemble, const FeatureVector& x);

TrainedEnsemble train_itl(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                          const FeaturizerConfig& featurizer, std::uint64_t seed);
TrainedEnsemble train_cascade(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                              const FeaturizerConfig& featurizer, std::uint64_t seed);
TrainedEnsemble train_boolean(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                              const FeaturizerConfig& featurizer, std::uint64_t seed);
TrainedEnsemble train_ffn_ensemble(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                                   const FeaturizerConfig& featurizer, std::uint64_t seed);
/// Dispatches on config.kind.
TrainedEnsemble train_ensemble(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                               const FeaturizerConfig& featurizer, std::uint64_t seed);

/// Training pool of cascade stage k under the given filter. For the
/// predicted filter, `upstream` holds the already-trained stages 0..k-1.
std::vector<std::size_t> cascade_stage_pool(const TrainingView& data, const TaskSpec& task, std::size_t k,
                                            CascadeTrainFilter filter, std::span<const AnyModel> upstream = {},
                                            std::span<const double> thresholds = {});

}  // namespace screening
