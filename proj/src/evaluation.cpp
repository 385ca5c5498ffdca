#include "screening/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "screening/rng.hpp"

namespace screening {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) noexcept {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fixed(double v, int precision = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(precision) << v;
  return out.str();
}

std::string percent(double v) { return fixed(100.0 * v, 1) + "%"; }

// Left-aligned first column, right-aligned rest.
std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (std::size_t c = 0; c < width.size(); ++c) {
      const std::string cell = c < cells.size() ? cells[c] : "";
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) text += "  ";
      text += c == 0 ? cell + pad : pad + cell;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out << text << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return out.str();
}

Json counts_json(const ConfusionCounts& c) {
  Json j;
  j["tp"] = c.tp;
  j["fp"] = c.fp;
  j["fn"] = c.fn;
  j["tn"] = c.tn;
  return j;
}

ConfusionCounts counts_from_json(const Json& j) {
  return {j.at("tp").get<std::uint64_t>(), j.at("fp").get<std::uint64_t>(), j.at("fn").get<std::uint64_t>(),
          j.at("tn").get<std::uint64_t>()};
}

Json prf_json(const Prf& m) {
  Json j;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f_measure"] = m.f_measure;
  return j;
}

}  // namespace

void ConfusionCounts::add(bool predicted, bool gold) noexcept {
  if (predicted && gold) ++tp;
  else if (predicted) ++fp;
  else if (gold) ++fn;
  else ++tn;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) noexcept {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

Prf prf(const ConfusionCounts& c) noexcept {
  Prf m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f_measure = f_measure(m.precision, m.recall);
  return m;
}

double f_measure(double precision, double recall) noexcept {
  const double s = precision + recall;
  return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

double error_rate_reduction(double f_base, double f_new) {
  if (!(f_base < 1.0)) throw EvaluationError("error rate reduction needs a baseline F below 1");
  return (f_new - f_base) / (1.0 - f_base);
}

OperatingPoint fix_recall(std::span<const ScoredLabel> scores, double target_recall) {
  if (!(target_recall > 0.0 && target_recall <= 1.0))
    throw EvaluationError("target recall must be in (0, 1], got " + std::to_string(target_recall));
  const auto positives =
      static_cast<std::uint64_t>(std::count_if(scores.begin(), scores.end(), [](const auto& s) { return s.label; }));
  if (positives == 0) throw EvaluationError("fix_recall needs at least one positive");

  std::vector<ScoredLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });

  // Walk thresholds downward; recall only grows, so the first hit is the
  // largest qualifying threshold.
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) (sorted[i].label ? tp : fp) += 1;
    const double recall = ratio(tp, positives);
    if (recall >= target_recall) {
      OperatingPoint op;
      op.target_recall = target_recall;
      op.threshold = t;
      op.recall = recall;
      op.precision = ratio(tp, tp + fp);
      op.f_measure = f_measure(op.precision, op.recall);
      return op;
    }
  }
  // Unreachable: the smallest score already labels every positive.
  throw EvaluationError("fix_recall found no threshold");
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const bool> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw EvaluationError("k must be at least 2");
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] ? pos : neg).push_back(i);
  if (pos.size() < k || neg.size() < k)
    throw EvaluationError("each class needs at least k=" + std::to_string(k) + " members (positives " +
                          std::to_string(pos.size()) + ", negatives " + std::to_string(neg.size()) + ")");
  Rng pos_rng(derive_seed(seed, {0x504f53}));
  Rng neg_rng(derive_seed(seed, {0x4e4547}));
  pos_rng.shuffle(std::span<std::size_t>(pos));
  neg_rng.shuffle(std::span<std::size_t>(neg));

  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < pos.size(); ++i) folds[i % k].push_back(pos[i]);
  const std::size_t offset = pos.size() % k;
  for (std::size_t i = 0; i < neg.size(); ++i) folds[(offset + i) % k].push_back(neg[i]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

std::string_view stage_pool_name(StagePool p) noexcept {
  return p == StagePool::Reached ? "reached" : "gold_filtered";
}

std::optional<StagePool> parse_stage_pool(std::string_view name) noexcept {
  if (name == "reached") return StagePool::Reached;
  if (name == "gold_filtered") return StagePool::GoldFiltered;
  return std::nullopt;
}

std::vector<StageCounts> empty_stage_counts(const TaskSpec& task) {
  std::vector<StageCounts> out;
  for (std::size_t k = 0; k < task.size(); ++k) {
    StageCounts s;
    s.stage = k;
    s.criterion = task[k].criterion;
    s.positive_label = task[k].label_name(true);
    s.negative_label = task[k].label_name(false);
    out.push_back(std::move(s));
  }
  return out;
}

void accumulate_stage_counts(const TrainedEnsemble& ensemble, const FeatureVector& x, const CriterionRatings& gold,
                             StagePool pool, std::vector<StageCounts>& acc) {
  const auto& task = ensemble.task();
  switch (ensemble.kind()) {
    case ArchitectureKind::Cascade: {
      if (pool == StagePool::Reached) {
        const auto p = predict_cascade(ensemble, x);
        for (std::size_t k = 0; k < task.size(); ++k) {
          if (!p.stages[k].evaluated) break;
          acc[k].counts.add(p.stages[k].decision, task[k].positive(gold));
        }
      } else {
        const auto p = predict_boolean(ensemble, x);
        for (std::size_t k = 0; k < task.size(); ++k) {
          acc[k].counts.add(p.stages[k].decision, task[k].positive(gold));
          if (!task[k].positive(gold)) break;
        }
      }
      return;
    }
    case ArchitectureKind::Boolean: {
      const auto p = predict_boolean(ensemble, x);
      for (std::size_t k = 0; k < task.size(); ++k)
        if (task[k].rated(gold)) acc[k].counts.add(p.stages[k].decision, task[k].positive(gold));
      return;
    }
    case ArchitectureKind::Itl:
    case ArchitectureKind::Ffn:
      return;
  }
}

std::vector<StageCounts> per_stage_report(const TrainedEnsemble& ensemble, const Corpus& corpus,
                                          std::span<const FeatureVector> features,
                                          std::span<const std::size_t> indices, StagePool pool) {
  auto acc = empty_stage_counts(ensemble.task());
  for (auto i : indices) accumulate_stage_counts(ensemble, features[i], corpus[i].ratings, pool, acc);
  return acc;
}

namespace {

struct FoldOutput {
  FoldResult result;
  std::vector<StageCounts> stages;
  std::vector<SamplePrediction> predictions;
};

std::uint64_t model_evaluations(ArchitectureKind kind, const Prediction& p, std::size_t stages) {
  switch (kind) {
    case ArchitectureKind::Cascade:
    case ArchitectureKind::Boolean:
      return p.stages_evaluated();
    case ArchitectureKind::Itl:
      return 1;
    case ArchitectureKind::Ffn:
      return stages;
  }
  return 0;
}

}  // namespace

EvalReport cross_validate(const ArchitectureConfig& config, const FeaturizerConfig& featurizer, const Corpus& corpus,
                          const TaskSpec& task, std::size_t k, std::uint64_t seed, const CvOptions& options) {
  config.validate();
  featurizer.validate();
  const auto labels = std::make_unique<bool[]>(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) labels[i] = task.label(corpus[i].ratings);
  const std::span<const bool> label_span(labels.get(), corpus.size());
  const auto folds = stratified_kfold(label_span, k, seed);
  const auto features = Featurizer(featurizer).transform(corpus);

  std::vector<FoldOutput> outputs(k);
  std::vector<std::exception_ptr> errors(k);
  std::vector<std::size_t> fold_of(corpus.size());
  for (std::size_t f = 0; f < k; ++f)
    for (auto i : folds[f]) fold_of[i] = f;

  auto run_fold = [&](std::size_t f) {
    std::vector<std::size_t> train;
    train.reserve(corpus.size() - folds[f].size());
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (fold_of[i] != f) train.push_back(i);
    const TrainingView view{corpus, features, train};
    TrainedEnsemble ensemble = [&] {
      try {
        return train_ensemble(config, view, task, featurizer, derive_seed(seed, {0x464f4c44, f}));
      } catch (const Error& e) {
        rethrow_with_context(e, "fold " + std::to_string(f));
      }
    }();
    FoldOutput out;
    out.result.fold = f;
    out.result.train_size = train.size();
    out.result.test_size = folds[f].size();
    out.stages = empty_stage_counts(task);
    for (auto i : folds[f]) {
      const auto p = ensemble.predict(features[i]);
      const bool gold = labels[i];
      out.result.counts.add(p.label, gold);
      out.result.stage_evaluations += model_evaluations(config.kind, p, task.size());
      accumulate_stage_counts(ensemble, features[i], corpus[i].ratings, options.stage_pool, out.stages);
      if (options.keep_predictions || (!options.recall_targets.empty() && p.probability))
        out.predictions.push_back({i, f, p.label, gold, p.probability});
    }
    outputs[f] = std::move(out);
  };

  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, k);
  if (jobs == 1) {
    for (std::size_t f = 0; f < k; ++f) run_fold(f);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t f = next++; f < k; f = next++) {
          try {
            run_fold(f);
          } catch (...) {
            errors[f] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  EvalReport report;
  report.kind = config.kind;
  report.name = std::string(architecture_name(config.kind));
  report.config["architecture"] = json_io::to_json(config);
  report.config["featurizer"] = json_io::to_json(featurizer);
  report.config["task"] = json_io::to_json(task);
  report.seed = seed;
  report.k = k;
  report.corpus_size = corpus.size();
  report.positives = static_cast<std::size_t>(std::count(label_span.begin(), label_span.end(), true));
  report.stage_pool = options.stage_pool;
  report.stages = empty_stage_counts(task);
  if (config.kind != ArchitectureKind::Cascade && config.kind != ArchitectureKind::Boolean) report.stages.clear();
  std::vector<ScoredLabel> scored;
  for (auto& out : outputs) {
    report.pooled += out.result.counts;
    report.stage_evaluations += out.result.stage_evaluations;
    for (std::size_t s = 0; s < report.stages.size(); ++s) report.stages[s].counts += out.stages[s].counts;
    for (const auto& p : out.predictions)
      if (p.score) scored.push_back({*p.score, p.gold});
    report.folds.push_back(out.result);
    if (options.keep_predictions)
      report.predictions.insert(report.predictions.end(), out.predictions.begin(), out.predictions.end());
  }
  report.metrics = prf(report.pooled);
  if (!scored.empty())
    for (double target : options.recall_targets) report.operating_points.push_back(fix_recall(scored, target));
  return report;
}

// ---------------------------------------------------------------------------
// Serialization and rendering

Json report_to_json(const EvalReport& r) {
  Json j;
  j["name"] = r.name;
  j["architecture"] = std::string(architecture_name(r.kind));
  j["configuration"] = r.configuration;
  j["seed"] = r.seed;
  j["k"] = r.k;
  j["corpus_size"] = r.corpus_size;
  j["positives"] = r.positives;
  j["pooled"] = counts_json(r.pooled);
  j["metrics"] = prf_json(r.metrics);
  j["stage_evaluations"] = r.stage_evaluations;
  Json folds = Json::array();
  for (const auto& f : r.folds) {
    Json fj;
    fj["fold"] = f.fold;
    fj["train_size"] = f.train_size;
    fj["test_size"] = f.test_size;
    fj["counts"] = counts_json(f.counts);
    fj["metrics"] = prf_json(prf(f.counts));
    fj["stage_evaluations"] = f.stage_evaluations;
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  j["stage_pool"] = std::string(stage_pool_name(r.stage_pool));
  Json stages = Json::array();
  for (const auto& s : r.stages) {
    Json sj;
    sj["stage"] = s.stage;
    sj["criterion"] = std::string(criterion_name(s.criterion));
    sj["samples"] = s.counts.total();
    sj["counts"] = counts_json(s.counts);
    Json labels = Json::array();
    for (bool positive : {false, true}) {
      Json lj;
      lj["label"] = positive ? s.positive_label : s.negative_label;
      lj["metrics"] = prf_json(prf(positive ? s.counts : s.counts.swapped()));
      labels.push_back(std::move(lj));
    }
    sj["labels"] = std::move(labels);
    stages.push_back(std::move(sj));
  }
  j["stages"] = std::move(stages);
  Json ops = Json::array();
  for (const auto& op : r.operating_points) {
    Json oj;
    oj["target_recall"] = op.target_recall;
    oj["threshold"] = op.threshold;
    oj["precision"] = op.precision;
    oj["recall"] = op.recall;
    oj["f_measure"] = op.f_measure;
    ops.push_back(std::move(oj));
  }
  j["operating_points"] = std::move(ops);
  j["config"] = r.config;
  return j;
}

EvalReport report_from_json(const Json& j) {
  try {
    EvalReport r;
    r.name = j.at("name").get<std::string>();
    const auto kind = parse_architecture(j.at("architecture").get<std::string>());
    if (!kind) throw EvaluationError("unknown architecture in report");
    r.kind = *kind;
    r.configuration = j.value("configuration", std::string());
    r.seed = j.value("seed", std::uint64_t{0});
    r.k = j.value("k", std::size_t{0});
    r.corpus_size = j.value("corpus_size", std::size_t{0});
    r.positives = j.value("positives", std::size_t{0});
    r.pooled = counts_from_json(j.at("pooled"));
    r.metrics = prf(r.pooled);
    r.stage_evaluations = j.value("stage_evaluations", std::uint64_t{0});
    if (j.contains("folds"))
      for (const auto& fj : j.at("folds")) {
        FoldResult f;
        f.fold = fj.at("fold").get<std::size_t>();
        f.train_size = fj.at("train_size").get<std::size_t>();
        f.test_size = fj.at("test_size").get<std::size_t>();
        f.counts = counts_from_json(fj.at("counts"));
        f.stage_evaluations = fj.value("stage_evaluations", std::uint64_t{0});
        r.folds.push_back(f);
      }
    if (j.contains("operating_points"))
      for (const auto& oj : j.at("operating_points"))
        r.operating_points.push_back({oj.at("target_recall").get<double>(), oj.at("threshold").get<double>(),
                                      oj.at("recall").get<double>(), oj.at("precision").get<double>(),
                                      oj.at("f_measure").get<double>()});
    if (j.contains("config")) r.config = j.at("config");
    return r;
  } catch (const Json::exception& e) {
    throw EvaluationError(std::string("malformed report: ") + e.what());
  }
}

std::string render_report_text(const EvalReport& r) {
  std::ostringstream out;
  out << "Model: " << r.name << " (" << architecture_name(r.kind) << ")\n";
  if (!r.configuration.empty()) out << "Configuration: " << r.configuration << '\n';
  out << "Corpus: " << r.corpus_size << " articles, " << r.positives << " positive; " << r.k << "-fold, seed " << r.seed
      << "\n\n";
  out << render_table({"Model", "Precision", "Recall", "F Measure"},
                      {{r.name, fixed(r.metrics.precision), fixed(r.metrics.recall), fixed(r.metrics.f_measure)}});
  out << '\n';
  std::vector<std::vector<std::string>> fold_rows;
  for (const auto& f : r.folds) {
    const auto m = prf(f.counts);
    fold_rows.push_back({std::to_string(f.fold), std::to_string(f.test_size), std::to_string(f.counts.tp),
                         std::to_string(f.counts.fp), std::to_string(f.counts.fn), std::to_string(f.counts.tn),
                         fixed(m.precision), fixed(m.recall), fixed(m.f_measure)});
  }
  fold_rows.push_back({"pooled", std::to_string(r.pooled.total()), std::to_string(r.pooled.tp),
                       std::to_string(r.pooled.fp), std::to_string(r.pooled.fn), std::to_string(r.pooled.tn),
                       fixed(r.metrics.precision), fixed(r.metrics.recall), fixed(r.metrics.f_measure)});
  out << render_table({"Fold", "Test", "TP", "FP", "FN", "TN", "P", "R", "F"}, fold_rows);
  if (!r.stages.empty()) {
    out << "\nPer-stage (" << stage_pool_name(r.stage_pool) << ")\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& s : r.stages) {
      for (bool positive : {false, true}) {
        const auto m = prf(positive ? s.counts : s.counts.swapped());
        rows.push_back({positive ? "" : "Task " + std::to_string(s.stage + 1) + " - " +
                                            std::string(criterion_name(s.criterion)),
                        positive ? s.positive_label : s.negative_label, std::to_string(s.counts.total()),
                        fixed(m.precision), fixed(m.recall), fixed(m.f_measure)});
      }
    }
    out << render_table({"Task", "Label", "Samples", "P", "R", "F"}, rows);
  }
  if (!r.operating_points.empty()) {
    out << "\nOperating points\n";
    std::vector<std::vector<std::string>> rows;
    for (const auto& op : r.operating_points)
      rows.push_back({fixed(op.target_recall), fixed(op.threshold, 6), fixed(op.precision), fixed(op.recall),
                      fixed(op.f_measure)});
    out << render_table({"Target recall", "Threshold", "P", "R", "F"}, rows);
  }
  out << "\nStage model evaluations: " << r.stage_evaluations << '\n';
  return out.str();
}

std::string render_folds_csv(const EvalReport& r) {
  std::ostringstream out;
  out << "fold,train_size,test_size,tp,fp,fn,tn,precision,recall,f_measure\n";
  out << std::setprecision(10);
  for (const auto& f : r.folds) {
    const auto m = prf(f.counts);
    out << f.fold << ',' << f.train_size << ',' << f.test_size << ',' << f.counts.tp << ',' << f.counts.fp << ','
        << f.counts.fn << ',' << f.counts.tn << ',' << m.precision << ',' << m.recall << ',' << m.f_measure << '\n';
  }
  return out.str();
}

std::string render_comparison_table(std::span<const EvalReport> reports) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports)
    rows.push_back({r.name, r.configuration, fixed(r.metrics.precision), fixed(r.metrics.recall),
                    fixed(r.metrics.f_measure)});
  return render_table({"Model", "Configuration", "Precision", "Recall", "F Measure"}, rows);
}

std::vector<Baseline> baselines_from_json(const Json& j) {
  try {
    const Json& list = j.is_object() ? j.at("baselines") : j;
    std::vector<Baseline> out;
    for (const auto& b : list) {
      Baseline base{b.at("name").get<std::string>(), b.value("details", std::string()),
                    b.at("precision").get<double>(), b.at("recall").get<double>()};
      if (base.precision < 0 || base.precision > 1 || base.recall < 0 || base.recall > 1)
        throw EvaluationError("baseline " + base.name + " has precision or recall outside [0, 1]");
      out.push_back(std::move(base));
    }
    return out;
  } catch (const Json::exception& e) {
    throw EvaluationError(std::string("malformed baselines: ") + e.what());
  }
}

std::vector<ComparisonRow> compare_reports(std::span<const EvalReport> reports, std::span<const Baseline> baselines) {
  if (reports.empty()) throw EvaluationError("compare needs at least one report");
  std::vector<ComparisonRow> rows;
  for (const auto& b : baselines) {
    Prf m{b.precision, b.recall, f_measure(b.precision, b.recall)};
    rows.push_back({b.name, b.details, true, m, {}});
  }
  for (const auto& r : reports) {
    ComparisonRow row{r.name, r.configuration, false, r.metrics, {}};
    for (const auto& b : rows) {
      if (!b.is_baseline) break;
      row.error_rate_reductions.push_back(error_rate_reduction(b.metrics.f_measure, r.metrics.f_measure));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string render_comparison_rows(std::span<const ComparisonRow> rows, std::span<const Baseline> baselines) {
  std::vector<std::string> header{"Model", "Details", "P", "R", "F"};
  for (const auto& b : baselines) header.push_back("ERR vs " + b.name);
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    std::vector<std::string> line{r.name, r.details, fixed(r.metrics.precision), fixed(r.metrics.recall),
                                  fixed(r.metrics.f_measure)};
    for (std::size_t b = 0; b < baselines.size(); ++b)
      line.push_back(r.is_baseline ? "" : percent(r.error_rate_reductions.at(b)));
    cells.push_back(std::move(line));
  }
  return render_table(header, cells);
}

Json comparison_to_json(std::span<const ComparisonRow> rows, std::span<const Baseline> baselines) {
  Json j;
  Json names = Json::array();
  for (const auto& b : baselines) names.push_back(b.name);
  j["baselines"] = std::move(names);
  Json list = Json::array();
  for (const auto& r : rows) {
    Json rj;
    rj["name"] = r.name;
    rj["details"] = r.details;
    rj["baseline"] = r.is_baseline;
    rj["metrics"] = prf_json(r.metrics);
    if (!r.is_baseline) rj["error_rate_reduction"] = r.error_rate_reductions;
    list.push_back(std::move(rj));
  }
  j["rows"] = std::move(list);
  return j;
}

}  // namespace screening
