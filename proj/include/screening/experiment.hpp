#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "screening/corpus.hpp"
#include "screening/ensembles.hpp"
#include "screening/evaluation.hpp"
#include "screening/features.hpp"
#include "screening/json_io.hpp"

namespace screening {

/// One cross-validation run. Either `corpus_path` or `synthetic` names the
/// data.
struct ExperimentConfig {
  std::string name = "experiment";
  std::optional<std::filesystem::path> corpus_path;
  std::optional<SyntheticConfig> synthetic;
  StopRule stop_rule = StopRule::clinical_hedges();
  PositiveClassSpec positive = PositiveClassSpec::scientifically_sound_treatment();
  std::optional<SubsetConstraint> subset;
  std::array<Criterion, 4> stage_order = TaskSpec::kDefaultOrder;
  ArchitectureConfig architecture;
  FeaturizerConfig featurizer;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::vector<double> recall_targets;
  StagePool stage_pool = StagePool::Reached;

  /// Throws ConfigError on inconsistent settings or a missing corpus file.
  void validate() const;
};

Json to_json(const SyntheticConfig& c);
SyntheticConfig synthetic_from_json(const Json& j, SyntheticConfig base = {});

Json to_json(const ExperimentConfig& c);
/// Relative paths resolve against `base_dir`. "seed" is required.
ExperimentConfig experiment_from_json(const Json& j, const std::filesystem::path& base_dir);

/// A config file: a single experiment, or a base plus an "experiments" list
/// of JSON merge patches (or an "architectures" list of kinds).
struct ExperimentPlan {
  std::vector<ExperimentConfig> experiments;
  bool grid = false;
  std::filesystem::path output_dir;
};

struct PlanOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;
};

ExperimentPlan load_experiment_plan(const std::filesystem::path& config_file, const PlanOverrides& overrides = {});
ExperimentPlan experiment_plan_from_json(const Json& j, const std::filesystem::path& base_dir,
                                         const PlanOverrides& overrides = {});

/// Loads or generates the corpus and applies the subset constraint.
Corpus load_experiment_corpus(const ExperimentConfig& config);

/// e.g. "Balanced, 256, PT tag, linear".
std::string configuration_summary(const ExperimentConfig& config);

EvalReport run_experiment(const ExperimentConfig& config, std::size_t jobs = 1);
EvalReport run_experiment(const ExperimentConfig& config, const Corpus& corpus, std::size_t jobs = 1);

/// Writes report_<name>.json (with a generated_at field), report_<name>.txt
/// and folds_<name>.csv into `dir`.
void write_report_files(const EvalReport& report, const std::filesystem::path& dir, const std::string& generated_at);

/// UTC, ISO 8601.
std::string utc_timestamp();

}  // namespace screening
