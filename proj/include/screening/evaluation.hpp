#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "screening/corpus.hpp"
#include "screening/ensembles.hpp"
#include "screening/features.hpp"
#include "screening/json_io.hpp"

namespace screening {

using json_io::Json;

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  void add(bool predicted, bool gold) noexcept;
  /// Counts from the point of view of the other label.
  ConfusionCounts swapped() const noexcept { return {tn, fn, fp, tp}; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) noexcept;
  bool operator==(const ConfusionCounts&) const = default;
};

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

/// Zero denominators give 0.
Prf prf(const ConfusionCounts& counts) noexcept;
/// Harmonic mean of precision and recall, 0 when both are 0.
double f_measure(double precision, double recall) noexcept;
/// (f_new - f_base) / (1 - f_base); throws EvaluationError if f_base >= 1.
double error_rate_reduction(double f_base, double f_new);

struct ScoredLabel {
  double score;
  bool label;
};

struct OperatingPoint {
  double target_recall = 0.0;
  double threshold = 0.0;
  double recall = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
};

/// Largest threshold t (positive iff score >= t) among the distinct scores
/// whose recall reaches `target`. Throws EvaluationError without positives or
/// for a target outside (0, 1].
OperatingPoint fix_recall(std::span<const ScoredLabel> scores, double target_recall);

/// Test folds as sorted sample indices. Each class is shuffled separately and
/// dealt round-robin; negatives continue where the positives stopped so total
/// fold sizes also stay within one. Throws EvaluationError if a class has
/// fewer than k members or k < 2.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const bool> labels, std::size_t k, std::uint64_t seed);

/// Which test articles count toward a cascade stage's metrics.
enum class StagePool : std::uint8_t {
  /// Articles the cascade actually evaluated at that stage.
  Reached,
  /// Articles whose gold ratings pass every earlier stage.
  GoldFiltered,
};

std::string_view stage_pool_name(StagePool p) noexcept;
std::optional<StagePool> parse_stage_pool(std::string_view name) noexcept;

/// Stage-k decisions against the stage's gold predicate, counted from the
/// positive label's point of view. An Unrated gold value counts as the
/// negative label.
struct StageCounts {
  std::size_t stage = 0;
  Criterion criterion = Criterion::Format;
  std::string positive_label;
  std::string negative_label;
  ConfusionCounts counts;
};

/// Adds one article's stage decisions into `acc` (sized to the task).
/// Cascade: articles in `pool`. Boolean: articles rated for the criterion.
/// Other architectures contribute nothing.
void accumulate_stage_counts(const TrainedEnsemble& ensemble, const FeatureVector& x, const CriterionRatings& gold,
                             StagePool pool, std::vector<StageCounts>& acc);
std::vector<StageCounts> empty_stage_counts(const TaskSpec& task);

/// Per-stage counts over the given test rows.
std::vector<StageCounts> per_stage_report(const TrainedEnsemble& ensemble, const Corpus& corpus,
                                          std::span<const FeatureVector> features,
                                          std::span<const std::size_t> indices, StagePool pool = StagePool::Reached);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
  ConfusionCounts counts;
  std::uint64_t stage_evaluations = 0;
};

struct SamplePrediction {
  std::size_t index;
  std::size_t fold;
  bool predicted;
  bool gold;
  std::optional<double> score;
};

struct EvalReport {
  std::string name;
  ArchitectureKind kind = ArchitectureKind::Itl;
  /// One-line description of the configuration.
  std::string configuration;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::size_t k = 0;
  std::size_t corpus_size = 0;
  std::size_t positives = 0;
  ConfusionCounts pooled;
  Prf metrics;
  std::vector<FoldResult> folds;
  StagePool stage_pool = StagePool::Reached;
  std::vector<StageCounts> stages;
  std::vector<OperatingPoint> operating_points;
  /// Stage model evaluations over all test articles.
  std::uint64_t stage_evaluations = 0;
  /// Not serialized; filled when requested.
  std::vector<SamplePrediction> predictions;
};

struct CvOptions {
  std::size_t jobs = 1;
  /// Operating points computed from pooled scores (ITL and FFN only).
  std::vector<double> recall_targets;
  StagePool stage_pool = StagePool::Reached;
  bool keep_predictions = false;
};

/// k-fold cross-validation: each fold is predicted in full by an ensemble
/// trained on the other folds (sampling applies to training rows only).
/// Counts are pooled across folds. Training failures propagate with the
/// fold number prefixed.
EvalReport cross_validate(const ArchitectureConfig& config, const FeaturizerConfig& featurizer, const Corpus& corpus,
                          const TaskSpec& task, std::size_t k, std::uint64_t seed, const CvOptions& options = {});

Json report_to_json(const EvalReport& report);
/// Reads the fields needed for comparisons; throws EvaluationError if
/// malformed.
EvalReport report_from_json(const Json& j);

/// Summary, per-fold and per-stage tables.
std::string render_report_text(const EvalReport& report);
/// fold,train_size,test_size,tp,fp,fn,tn,precision,recall,f_measure
std::string render_folds_csv(const EvalReport& report);
/// Model | Configuration | Precision | Recall | F Measure, one row per report.
std::string render_comparison_table(std::span<const EvalReport> reports);

struct Baseline {
  std::string name;
  std::string details;
  double precision;
  double recall;
};

std::vector<Baseline> baselines_from_json(const Json& j);

struct ComparisonRow {
  std::string name;
  std::string details;
  bool is_baseline;
  Prf metrics;
  /// Against each baseline in order; only for report rows.
  std::vector<double> error_rate_reductions;
};

std::vector<ComparisonRow> compare_reports(std::span<const EvalReport> reports, std::span<const Baseline> baselines);
std::string render_comparison_rows(std::span<const ComparisonRow> rows, std::span<const Baseline> baselines);
Json comparison_to_json(std::span<const ComparisonRow> rows, std::span<const Baseline> baselines);

}  // namespace screening
