#include "screening/ensembles.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "screening/json_io.hpp"
#include "screening/rng.hpp"

namespace screening {

namespace {

constexpr std::uint64_t kSamplingTag = 0x53414d50;
constexpr std::uint64_t kModelTag = 0x4d4f444c;
constexpr std::uint64_t kCombinerTag = 0x434f4d42;
constexpr int kBundleVersion = 1;

std::uint64_t sampling_seed(std::uint64_t seed, std::size_t stage, const SamplingPlan& plan) {
  return derive_seed(seed, {kSamplingTag, stage, plan.seed});
}

TrainConfig seeded(TrainConfig cfg, std::uint64_t seed, std::size_t stage) {
  cfg.seed = derive_seed(seed, {kModelTag, stage, cfg.seed});
  return cfg;
}

std::vector<Example> to_examples(const std::vector<Labeled<std::size_t>>& rows, std::span<const FeatureVector> features) {
  std::vector<Example> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({std::cref(features[r.item]), r.label});
  return out;
}

/// Splits `pool` by `label_of`, resamples, and returns SGD examples. Throws
/// TrainingError naming `what` if a class is missing.
template <typename LabelFn>
std::vector<Example> sampled_examples(const TrainingView& data, std::span<const std::size_t> pool, LabelFn label_of,
                                      SamplingPlan plan, const std::string& what) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (auto i : pool) (label_of(data.corpus[i]) ? pos : neg).push_back(i);
  if (pos.empty() || neg.empty()) {
    throw TrainingError(what + ": degenerate training pool (" + std::to_string(pos.size()) + " positive, " +
                        std::to_string(neg.size()) + " negative)");
  }
  return to_examples(resample<std::size_t>(pos, neg, plan), data.features);
}

double combined_proba(std::span<const AnyModel> stages, const MlpModel& combiner, const FeatureVector& x) {
  std::vector<double> input;
  for (const auto& m : stages) {
    const auto h = std::get<MlpModel>(m).embed(x);
    input.insert(input.end(), h.begin(), h.end());
  }
  std::vector<std::uint32_t> ramp(input.size());
  std::iota(ramp.begin(), ramp.end(), 0U);
  return combiner.predict_proba(SparseInput(static_cast<std::uint32_t>(input.size()), ramp, input));
}

}  // namespace

std::string_view architecture_name(ArchitectureKind k) noexcept {
  switch (k) {
    case ArchitectureKind::Itl:
      return "itl";
    case ArchitectureKind::Cascade:
      return "cascade";
    case ArchitectureKind::Boolean:
      return "boolean";
    case ArchitectureKind::Ffn:
      return "ffn";
  }
  return "?";
}

std::optional<ArchitectureKind> parse_architecture(std::string_view name) noexcept {
  for (auto k : {ArchitectureKind::Itl, ArchitectureKind::Cascade, ArchitectureKind::Boolean, ArchitectureKind::Ffn}) {
    if (architecture_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string Stage::label_name(bool positive_label) const {
  std::string names;
  for (int code = 0; code < value_count(criterion); ++code) {
    if (!accept.contains(code)) continue;
    if (!names.empty()) names += "|";
    names += value_name(criterion, code);
  }
  if (criterion == Criterion::Hhc || criterion == Criterion::Rigor) names = std::string(criterion_name(criterion)) + "=" + names;
  return positive_label ? names : "not " + names;
}

// ---------------------------------------------------------------------------
// TaskSpec

TaskSpec::TaskSpec(const PositiveClassSpec& spec, std::array<Criterion, 4> order) : spec_(spec) {
  spec.accept.validate("positive class");
  std::set<Criterion> seen(order.begin(), order.end());
  if (seen.size() != 4) throw ConfigError("task order must name four distinct criteria");
  for (auto c : order) stages_.push_back({c, spec.accept[c]});
}

TaskSpec::TaskSpec(std::vector<Stage> stages, const PositiveClassSpec& spec) : stages_(std::move(stages)), spec_(spec) {
  spec.accept.validate("positive class");
  if (stages_.size() != 4) throw ConfigError("task spec needs exactly four stages");
  std::set<Criterion> seen;
  for (const auto& s : stages_) {
    if (!seen.insert(s.criterion).second) throw ConfigError("task spec stages must be distinct criteria");
    if (!(s.accept == spec.accept[s.criterion])) {
      throw ConfigError("stage " + std::string(criterion_name(s.criterion)) +
                        " predicate disagrees with the positive class definition");
    }
  }
}

std::array<Criterion, 4> TaskSpec::order() const noexcept {
  std::array<Criterion, 4> o{};
  for (std::size_t k = 0; k < 4; ++k) o[k] = stages_[k].criterion;
  return o;
}

// ---------------------------------------------------------------------------
// ArchitectureConfig

const TrainConfig& ArchitectureConfig::stage_config(std::size_t k) const {
  return stage_models.empty() ? model : stage_models.at(k);
}

void ArchitectureConfig::validate() const {
  model.validate();
  if (!stage_models.empty() && stage_models.size() != 4) throw ConfigError("stage_models must list four configs");
  for (const auto& s : stage_models) s.validate();
  combiner.train.validate();
  if (kind == ArchitectureKind::Ffn && model_kind != ModelKind::Mlp) {
    throw ConfigError("the ffn architecture needs mlp stage models");
  }
}

// ---------------------------------------------------------------------------
// FfnNetwork

FfnNetwork::FfnNetwork(std::vector<MlpModel> stages, MlpModel combiner)
    : stages_(std::move(stages)), combiner_(std::move(combiner)) {
  if (stages_.empty()) throw ModelError("ffn network needs stage models");
  std::size_t width = 0;
  for (const auto& s : stages_) {
    if (s.input_dim() != stages_.front().input_dim()) throw ModelError("ffn stage models disagree on input dimension");
    width += s.hidden_dim();
  }
  if (combiner_.input_dim() != width) {
    throw ModelError("combiner input dimension " + std::to_string(combiner_.input_dim()) +
                     " != concatenated embedding width " + std::to_string(width));
  }
  ramp_.resize(width);
  std::iota(ramp_.begin(), ramp_.end(), 0U);
}

FfnNetwork::Forward FfnNetwork::run_forward(const FeatureVector& x) const {
  Forward f;
  f.stage_states.reserve(stages_.size());
  for (const auto& s : stages_) {
    f.stage_states.push_back(s.forward(x));
    const auto& h = f.stage_states.back().hidden;
    f.input.insert(f.input.end(), h.begin(), h.end());
  }
  f.combiner_state = combiner_.forward(SparseInput(combiner_.input_dim(), ramp_, f.input));
  return f;
}

std::vector<double> FfnNetwork::combined_input(const FeatureVector& x) const { return run_forward(x).input; }

double FfnNetwork::predict_proba(const FeatureVector& x) const { return run_forward(x).combiner_state.proba; }

std::size_t FfnNetwork::parameter_count() const noexcept {
  std::size_t n = combiner_.parameter_count();
  for (const auto& s : stages_) n += s.parameter_count();
  return n;
}

double FfnNetwork::parameter(std::size_t i) const {
  for (const auto& s : stages_) {
    if (i < s.parameter_count()) return s.parameter(i);
    i -= s.parameter_count();
  }
  return combiner_.parameter(i);
}

void FfnNetwork::set_parameter(std::size_t i, double v) {
  for (auto& s : stages_) {
    if (i < s.parameter_count()) {
      s.set_parameter(i, v);
      return;
    }
    i -= s.parameter_count();
  }
  combiner_.set_parameter(i, v);
}

std::vector<std::size_t> FfnNetwork::active_parameters(const FeatureVector& x) const {
  std::vector<std::size_t> out;
  std::size_t offset = 0;
  for (const auto& s : stages_) {
    for (auto i : s.active_parameters(x)) out.push_back(offset + i);
    offset += s.parameter_count();
  }
  for (std::size_t i = 0; i < combiner_.parameter_count(); ++i) out.push_back(offset + i);
  return out;
}

double FfnNetwork::loss(const FeatureVector& x, bool label, double l2) const {
  double penalty = 0.0;
  if (l2 > 0.0) {
    penalty = combiner_.half_squared_weight_norm();
    for (const auto& s : stages_) penalty += s.half_squared_weight_norm();
    penalty *= l2;
  }
  return logistic_loss(run_forward(x).combiner_state.logit, label) + penalty;
}

FfnNetwork::Scratch FfnNetwork::make_scratch() const {
  Scratch s{{}, MlpGradient(combiner_.input_dim(), combiner_.hidden_dim())};
  for (const auto& m : stages_) s.stages.emplace_back(m.input_dim(), m.hidden_dim());
  return s;
}

double FfnNetwork::accumulate(const FeatureVector& x, bool label, Scratch& scratch) const {
  const auto f = run_forward(x);
  const double dlogit = f.combiner_state.proba - (label ? 1.0 : 0.0);
  const auto dpre =
      combiner_.backward(SparseInput(combiner_.input_dim(), ramp_, f.input), f.combiner_state, dlogit, scratch.combiner);
  const auto dinput = combiner_.input_gradient(dpre);
  std::size_t offset = 0;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const auto h = stages_[s].hidden_dim();
    stages_[s].backward_hidden(x, f.stage_states[s], std::span<const double>(dinput).subspan(offset, h),
                               scratch.stages[s]);
    offset += h;
  }
  return logistic_loss(f.combiner_state.logit, label);
}

std::vector<double> FfnNetwork::loss_gradient(const FeatureVector& x, bool label, double l2) const {
  auto scratch = make_scratch();
  accumulate(x, label, scratch);
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const auto g = stages_[s].flatten_gradient(scratch.stages[s], l2);
    flat.insert(flat.end(), g.begin(), g.end());
  }
  const auto g = combiner_.flatten_gradient(scratch.combiner, l2);
  flat.insert(flat.end(), g.begin(), g.end());
  return flat;
}

double FfnNetwork::sgd_step(std::span<const Example> batch, double learning_rate, double l2, Scratch& scratch) {
  for (auto& g : scratch.stages) g.clear();
  scratch.combiner.clear();
  double loss_sum = 0.0;
  for (const auto& ex : batch) loss_sum += accumulate(ex.x.get(), ex.label, scratch);
  const double mean_loss = loss_sum / static_cast<double>(batch.size());
  if (!std::isfinite(mean_loss)) return mean_loss;
  for (std::size_t s = 0; s < stages_.size(); ++s) stages_[s].apply(scratch.stages[s], learning_rate, l2, batch.size());
  combiner_.apply(scratch.combiner, learning_rate, l2, batch.size());
  return mean_loss;
}

// ---------------------------------------------------------------------------
// Prediction

std::size_t Prediction::stages_evaluated() const noexcept {
  return static_cast<std::size_t>(std::count_if(stages.begin(), stages.end(), [](const StageOutcome& s) { return s.evaluated; }));
}

TrainedEnsemble::TrainedEnsemble(ArchitectureKind kind, TaskSpec task, FeaturizerConfig featurizer,
                                 std::vector<AnyModel> models, std::optional<MlpModel> combiner,
                                 std::vector<double> thresholds)
    : kind_(kind),
      task_(std::move(task)),
      featurizer_(std::move(featurizer)),
      models_(std::move(models)),
      combiner_(std::move(combiner)),
      thresholds_(std::move(thresholds)) {
  const std::size_t expected_models = kind_ == ArchitectureKind::Itl ? 1 : task_.size();
  if (models_.size() != expected_models) {
    throw ModelError(std::string(architecture_name(kind_)) + " ensemble needs " + std::to_string(expected_models) +
                     " models, got " + std::to_string(models_.size()));
  }
  if (kind_ == ArchitectureKind::Ffn) {
    if (!combiner_) throw ModelError("ffn ensemble needs a combiner");
    for (const auto& m : models_) {
      if (!std::holds_alternative<MlpModel>(m)) throw ModelError("ffn ensemble stage models must be MLPs");
    }
  } else if (combiner_) {
    throw ModelError("only the ffn ensemble carries a combiner");
  }
  for (const auto& m : models_) {
    if (input_dim(m) != featurizer_.hash_dim) throw ModelError("model dimension disagrees with the featurizer");
  }
  const std::size_t expected_thresholds = models_.size() + (combiner_ ? 1 : 0);
  if (thresholds_.empty()) thresholds_.assign(expected_thresholds, 0.5);
  if (thresholds_.size() != expected_thresholds) throw ModelError("wrong number of thresholds");
}

void TrainedEnsemble::set_threshold(std::size_t k, double t) { thresholds_.at(k) = t; }

Prediction predict_cascade(const TrainedEnsemble& e, const FeatureVector& x) {
  Prediction p;
  p.stages.resize(e.models().size());
  p.label = true;
  for (std::size_t k = 0; k < e.models().size(); ++k) {
    auto& s = p.stages[k];
    s.evaluated = true;
    s.probability = predict_proba(e.models()[k], x);
    s.decision = s.probability >= e.thresholds()[k];
    if (!s.decision) {
      p.label = false;
      break;
    }
  }
  return p;
}

Prediction predict_boolean(const TrainedEnsemble& e, const FeatureVector& x) {
  Prediction p;
  p.label = true;
  for (std::size_t k = 0; k < e.models().size(); ++k) {
    StageOutcome s;
    s.evaluated = true;
    s.probability = predict_proba(e.models()[k], x);
    s.decision = s.probability >= e.thresholds()[k];
    p.label = p.label && s.decision;
    p.stages.push_back(s);
  }
  return p;
}

Prediction TrainedEnsemble::predict(const FeatureVector& x) const {
  switch (kind_) {
    case ArchitectureKind::Cascade:
      return predict_cascade(*this, x);
    case ArchitectureKind::Boolean:
      return predict_boolean(*this, x);
    case ArchitectureKind::Itl: {
      Prediction p;
      p.probability = screening::predict_proba(models_.front(), x);
      p.label = *p.probability >= thresholds_.front();
      return p;
    }
    case ArchitectureKind::Ffn: {
      Prediction p;
      p.probability = combined_proba(models_, *combiner_, x);
      p.label = *p.probability >= thresholds_.back();
      return p;
    }
  }
  return {};
}

Prediction TrainedEnsemble::predict(const Article& article) const {
  const auto tokens = build_text(article, featurizer_);
  return predict(featurize(tokens, featurizer_));
}

void TrainedEnsemble::save(const std::filesystem::path& dir, const std::vector<TrainConfig>& configs) const {
  std::filesystem::create_directories(dir);
  const auto fingerprint = featurizer_.fingerprint();
  json_io::Json manifest;
  manifest["bundle_version"] = kBundleVersion;
  manifest["kind"] = std::string(architecture_name(kind_));
  manifest["positive_class"] = json_io::to_json(task_.spec().accept);
  manifest["task"] = json_io::to_json(task_);
  manifest["featurizer"] = json_io::to_json(featurizer_);
  manifest["featurizer_fingerprint"] = fingerprint;
  manifest["thresholds"] = thresholds_;
  json_io::Json files = json_io::Json::array();
  auto write = [&](const std::string& name, const AnyModel& m, std::size_t k) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    save_model(out, m, k < configs.size() ? configs[k] : TrainConfig{}, fingerprint);
  };
  for (std::size_t k = 0; k < models_.size(); ++k) {
    const auto name = "model_" + std::to_string(k) + ".bin";
    write(name, models_[k], k);
    files.push_back(name);
  }
  manifest["models"] = files;
  if (combiner_) {
    write("combiner.bin", *combiner_, models_.size());
    manifest["combiner"] = "combiner.bin";
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << '\n';
  if (!out) throw IoError("cannot write manifest in " + dir.string());
}

TrainedEnsemble TrainedEnsemble::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("cannot open " + (dir / "manifest.json").string());
  json_io::Json manifest;
  try {
    manifest = json_io::Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
  try {
    if (manifest.at("bundle_version").get<int>() != kBundleVersion) throw IoError("unsupported bundle version");
    const auto kind = parse_architecture(manifest.at("kind").get<std::string>());
    if (!kind) throw IoError("manifest: unknown architecture");
    PositiveClassSpec spec{json_io::accept_sets_from_json(manifest.at("positive_class"), AcceptSets::everything())};
    std::array<Criterion, 4> order{};
    const auto& task = manifest.at("task");
    if (!task.is_array() || task.size() != 4) throw IoError("manifest: task must list four stages");
    for (std::size_t k = 0; k < 4; ++k) {
      auto c = parse_criterion(task[k].at("criterion").get<std::string>());
      if (!c) throw IoError("manifest: unknown criterion");
      order[k] = *c;
    }
    const auto featurizer = json_io::featurizer_from_json(manifest.at("featurizer"));
    const auto fingerprint = featurizer.fingerprint();
    auto read = [&](const std::string& name) {
      std::ifstream f(dir / name, std::ios::binary);
      if (!f) throw IoError("cannot open " + (dir / name).string());
      auto loaded = load_model(f);
      if (loaded.featurizer_fingerprint != fingerprint) throw IoError(name + ": featurizer fingerprint mismatch");
      return std::move(loaded.model);
    };
    std::vector<AnyModel> models;
    for (const auto& name : manifest.at("models")) models.push_back(read(name.get<std::string>()));
    std::optional<MlpModel> combiner;
    if (manifest.contains("combiner")) {
      auto m = read(manifest.at("combiner").get<std::string>());
      if (!std::holds_alternative<MlpModel>(m)) throw IoError("combiner must be an MLP");
      combiner = std::get<MlpModel>(std::move(m));
    }
    return TrainedEnsemble(*kind, TaskSpec(spec, order), featurizer, std::move(models), std::move(combiner),
                           manifest.at("thresholds").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("invalid manifest: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training

TrainedEnsemble train_itl(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                          const FeaturizerConfig& featurizer, std::uint64_t seed) {
  config.validate();
  SamplingPlan plan = config.itl_sampling;
  plan.seed = sampling_seed(seed, 0, plan);
  const auto examples =
      sampled_examples(data, data.indices, [&](const Article& a) { return task.label(a.ratings); }, plan, "itl");
  auto model = train(config.model_kind, examples, seeded(config.model, seed, 0));
  std::vector<AnyModel> models;
  models.push_back(std::move(model));
  return TrainedEnsemble(ArchitectureKind::Itl, task, featurizer, std::move(models));
}

std::vector<std::size_t> cascade_stage_pool(const TrainingView& data, const TaskSpec& task, std::size_t k,
                                            CascadeTrainFilter filter, std::span<const AnyModel> upstream,
                                            std::span<const double> thresholds) {
  std::vector<std::size_t> pool;
  if (filter == CascadeTrainFilter::Predicted && upstream.size() < k) {
    throw TrainingError("predicted cascade filter needs the upstream stage models");
  }
  for (auto i : data.indices) {
    bool passes = true;
    for (std::size_t j = 0; j < k && passes; ++j) {
      if (filter == CascadeTrainFilter::Gold) {
        passes = task[j].positive(data.corpus[i].ratings);
      } else {
        const double t = j < thresholds.size() ? thresholds[j] : 0.5;
        passes = predict(upstream[j], data.features[i], t);
      }
    }
    if (passes) pool.push_back(i);
  }
  return pool;
}

TrainedEnsemble train_cascade(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                              const FeaturizerConfig& featurizer, std::uint64_t seed) {
  config.validate();
  std::vector<AnyModel> models;
  for (std::size_t k = 0; k < task.size(); ++k) {
    const auto pool = cascade_stage_pool(data, task, k, config.cascade_filter, models);
    SamplingPlan plan = config.stage_sampling;
    plan.seed = sampling_seed(seed, k, plan);
    const auto& stage = task[k];
    const auto examples = sampled_examples(
        data, pool, [&](const Article& a) { return stage.positive(a.ratings); }, plan,
        "cascade stage " + std::to_string(k + 1) + " (" + std::string(criterion_name(stage.criterion)) + ")");
    models.push_back(train(config.model_kind, examples, seeded(config.stage_config(k), seed, k)));
  }
  return TrainedEnsemble(ArchitectureKind::Cascade, task, featurizer, std::move(models));
}

namespace {

// Stage models trained on every article with a rated value for the stage's
// criterion (Boolean ensemble and FFN phase one).
std::vector<AnyModel> train_independent_stages(const ArchitectureConfig& config, const TrainingView& data,
                                               const TaskSpec& task, std::uint64_t seed, const std::string& what) {
  std::vector<AnyModel> models;
  for (std::size_t k = 0; k < task.size(); ++k) {
    const auto& stage = task[k];
    std::vector<std::size_t> pool;
    for (auto i : data.indices) {
      if (stage.rated(data.corpus[i].ratings)) pool.push_back(i);
    }
    SamplingPlan plan = config.stage_sampling;
    plan.seed = sampling_seed(seed, k, plan);
    const auto examples = sampled_examples(
        data, pool, [&](const Article& a) { return stage.positive(a.ratings); }, plan,
        what + " stage " + std::to_string(k + 1) + " (" + std::string(criterion_name(stage.criterion)) + ")");
    models.push_back(train(config.model_kind, examples, seeded(config.stage_config(k), seed, k)));
  }
  return models;
}

}  // namespace

TrainedEnsemble train_boolean(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                              const FeaturizerConfig& featurizer, std::uint64_t seed) {
  config.validate();
  auto models = train_independent_stages(config, data, task, seed, "boolean");
  return TrainedEnsemble(ArchitectureKind::Boolean, task, featurizer, std::move(models));
}

TrainedEnsemble train_ffn_ensemble(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                                   const FeaturizerConfig& featurizer, std::uint64_t seed) {
  config.validate();
  // Phase one: each stage fine-tuned on its own label.
  auto phase_one = train_independent_stages(config, data, task, seed, "ffn");
  std::vector<MlpModel> stages;
  std::size_t width = 0;
  for (auto& m : phase_one) {
    stages.push_back(std::get<MlpModel>(std::move(m)));
    width += stages.back().hidden_dim();
  }

  // Phase two: combiner over concatenated embeddings, trained jointly.
  TrainConfig joint = config.combiner.train;
  joint.seed = derive_seed(seed, {kCombinerTag, joint.seed});
  SamplingPlan plan = config.combiner.sampling;
  plan.seed = sampling_seed(seed, task.size(), plan);
  const auto examples =
      sampled_examples(data, data.indices, [&](const Article& a) { return task.label(a.ratings); }, plan, "ffn combiner");

  MlpModel combiner(static_cast<std::uint32_t>(width), joint.hidden_dim, joint.activation, joint.init_scale, joint.seed);
  FfnNetwork net(std::move(stages), std::move(combiner));
  auto scratch = net.make_scratch();

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(joint.seed, {0x5344}));
  std::vector<Example> batch;
  for (int epoch = 0; epoch < joint.epochs; ++epoch) {
    rng.shuffle(std::span(order));
    std::size_t b = 0;
    for (std::size_t start = 0; start < order.size(); start += joint.batch_size, ++b) {
      batch.clear();
      for (std::size_t k = start; k < std::min(order.size(), start + joint.batch_size); ++k) batch.push_back(examples[order[k]]);
      const double loss = net.sgd_step(batch, joint.learning_rate, joint.l2, scratch);
      if (!std::isfinite(loss)) {
        throw TrainingError("ffn joint training: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(b));
      }
    }
  }

  auto [trained_stages, trained_combiner] = std::move(net).release();
  std::vector<AnyModel> models;
  for (auto& s : trained_stages) {
    s.normalize();
    if (!s.all_finite()) throw TrainingError("ffn training produced non-finite parameters");
    models.emplace_back(std::move(s));
  }
  trained_combiner.normalize();
  if (!trained_combiner.all_finite()) throw TrainingError("ffn training produced non-finite parameters");
  return TrainedEnsemble(ArchitectureKind::Ffn, task, featurizer, std::move(models), std::move(trained_combiner));
}

TrainedEnsemble train_ensemble(const ArchitectureConfig& config, const TrainingView& data, const TaskSpec& task,
                               const FeaturizerConfig& featurizer, std::uint64_t seed) {
  switch (config.kind) {
    case ArchitectureKind::Itl:
      return train_itl(config, data, task, featurizer, seed);
    case ArchitectureKind::Cascade:
      return train_cascade(config, data, task, featurizer, seed);
    case ArchitectureKind::Boolean:
      return train_boolean(config, data, task, featurizer, seed);
    case ArchitectureKind::Ffn:
      return train_ffn_ensemble(config, data, task, featurizer, seed);
  }
  throw ConfigError("unknown architecture");
}

}  // namespace screening
