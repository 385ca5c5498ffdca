#include "screening/experiment.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace screening {

namespace {

namespace fs = std::filesystem;
using json_io::require_known_keys;

template <typename T>
T get_field(const Json& j, const char* key, std::string_view where) {
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string(where) + "." + key + ": wrong type");
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) { return p.is_absolute() ? p : base / p; }

std::string sampling_summary(const SamplingPlan& p) {
  if (p == SamplingPlan::balanced(p.seed)) return "Balanced";
  return p.pos_target.to_string() + "-" + p.neg_target.to_string();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("experiment name is empty");
  for (char c : name)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      throw ConfigError("experiment name \"" + name + "\" may only use letters, digits, '_', '-' and '.'");
  if (corpus_path.has_value() == synthetic.has_value())
    throw ConfigError("experiment " + name + ": give exactly one of \"corpus\" and \"synthetic\"");
  if (corpus_path && !fs::exists(*corpus_path))
    throw ConfigError("experiment " + name + ": corpus file " + corpus_path->string() + " does not exist");
  if (k < 2) throw ConfigError("experiment " + name + ": k must be at least 2");
  positive.accept.validate("positive_class");
  if (subset) subset->accept.validate("subset");
  architecture.validate();
  featurizer.validate();
  for (double t : recall_targets)
    if (!(t > 0.0 && t <= 1.0)) throw ConfigError("experiment " + name + ": recall targets must be in (0, 1]");
  TaskSpec(positive, stage_order);
}

Json to_json(const SyntheticConfig& c) {
  Json j;
  j["size"] = c.size;
  j["negatives_per_positive"] = c.negatives_per_positive;
  j["signal_strength"] = c.signal_strength;
  j["seed"] = c.seed;
  j["cue_tokens"] = c.cue_tokens;
  j["abstract_min_tokens"] = c.abstract_min_tokens;
  j["abstract_max_tokens"] = c.abstract_max_tokens;
  j["cue_window"] = c.cue_window;
  j["pt_tag_rate"] = c.pt_tag_rate;
  return j;
}

SyntheticConfig synthetic_from_json(const Json& j, SyntheticConfig c) {
  constexpr std::string_view where = "synthetic";
  require_known_keys(j,
                     {"size", "negatives_per_positive", "signal_strength", "seed", "cue_tokens",
                      "abstract_min_tokens", "abstract_max_tokens", "cue_window", "pt_tag_rate"},
                     where);
  if (j.contains("size")) c.size = get_field<std::size_t>(j, "size", where);
  if (j.contains("negatives_per_positive"))
    c.negatives_per_positive = get_field<double>(j, "negatives_per_positive", where);
  if (j.contains("signal_strength")) {
    const auto& s = j.at("signal_strength");
    if (s.is_number()) {
      c.signal_strength.fill(s.get<double>());
    } else if (s.is_array() && s.size() == 4) {
      for (std::size_t k = 0; k < 4; ++k) {
        if (!s[k].is_number()) throw ConfigError("synthetic.signal_strength: entries must be numbers");
        c.signal_strength[k] = s[k].get<double>();
      }
    } else if (s.is_object()) {
      for (const auto& [key, value] : s.items()) {
        const auto crit = parse_criterion(key);
        if (!crit || !value.is_number()) throw ConfigError("synthetic.signal_strength: bad entry \"" + key + "\"");
        c.signal_strength[static_cast<std::size_t>(*crit)] = value.get<double>();
      }
    } else {
      throw ConfigError("synthetic.signal_strength: expected a number, four numbers, or an object");
    }
  }
  if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", where);
  if (j.contains("cue_tokens")) c.cue_tokens = get_field<int>(j, "cue_tokens", where);
  if (j.contains("abstract_min_tokens")) c.abstract_min_tokens = get_field<int>(j, "abstract_min_tokens", where);
  if (j.contains("abstract_max_tokens")) c.abstract_max_tokens = get_field<int>(j, "abstract_max_tokens", where);
  if (j.contains("cue_window")) c.cue_window = get_field<int>(j, "cue_window", where);
  if (j.contains("pt_tag_rate")) c.pt_tag_rate = get_field<double>(j, "pt_tag_rate", where);
  return c;
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["name"] = c.name;
  if (c.corpus_path) j["corpus"] = c.corpus_path->generic_string();
  if (c.synthetic) j["synthetic"] = to_json(*c.synthetic);
  j["stop_rule"] = json_io::to_json(c.stop_rule);
  j["positive_class"] = json_io::to_json(c.positive.accept);
  if (c.subset) j["subset"] = json_io::to_json(c.subset->accept);
  Json order = Json::array();
  for (auto crit : c.stage_order) order.push_back(std::string(criterion_name(crit)));
  j["stage_order"] = order;
  j["architecture"] = json_io::to_json(c.architecture);
  j["featurizer"] = json_io::to_json(c.featurizer);
  j["k"] = c.k;
  j["seed"] = c.seed;
  j["recall_targets"] = c.recall_targets;
  j["stage_pool"] = std::string(stage_pool_name(c.stage_pool));
  return j;
}

ExperimentConfig experiment_from_json(const Json& j, const fs::path& base_dir) {
  constexpr std::string_view where = "experiment";
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  require_known_keys(j,
                     {"name", "corpus", "synthetic", "stop_rule", "positive_class", "subset", "stage_order",
                      "architecture", "featurizer", "k", "seed", "output_dir", "recall_targets", "stage_pool"},
                     where);
  ExperimentConfig c;
  if (j.contains("name")) c.name = get_field<std::string>(j, "name", where);
  if (j.contains("corpus")) c.corpus_path = resolve(get_field<std::string>(j, "corpus", where), base_dir);
  if (j.contains("stop_rule")) c.stop_rule = json_io::stop_rule_from_json(j.at("stop_rule"));
  if (j.contains("synthetic")) {
    c.synthetic = synthetic_from_json(j.at("synthetic"));
    c.synthetic->stop_rule = c.stop_rule;
  }
  if (j.contains("positive_class")) {
    const auto& p = j.at("positive_class");
    if (p.is_string()) {
      if (p.get<std::string>() != "scientifically_sound_treatment")
        throw ConfigError("positive_class: unknown preset \"" + p.get<std::string>() + "\"");
    } else {
      c.positive.accept = json_io::accept_sets_from_json(p, AcceptSets::everything());
    }
  }
  if (c.synthetic) c.synthetic->positive = c.positive;
  if (j.contains("subset")) {
    const auto& s = j.at("subset");
    if (s.is_string()) {
      const auto name = s.get<std::string>();
      if (name == "del_fiol") c.subset = SubsetConstraint::del_fiol();
      else if (name != "none" && name != "all") throw ConfigError("subset: expected \"del_fiol\", \"none\" or an object");
    } else {
      c.subset = SubsetConstraint{json_io::accept_sets_from_json(s, AcceptSets::everything())};
    }
  }
  if (j.contains("stage_order")) c.stage_order = json_io::stage_order_from_json(j.at("stage_order"));
  if (j.contains("architecture")) c.architecture = json_io::architecture_from_json(j.at("architecture"));
  if (j.contains("featurizer")) c.featurizer = json_io::featurizer_from_json(j.at("featurizer"));
  if (j.contains("k")) c.k = get_field<std::size_t>(j, "k", where);
  if (!j.contains("seed")) throw ConfigError("experiment " + c.name + ": \"seed\" is required");
  c.seed = get_field<std::uint64_t>(j, "seed", where);
  if (j.contains("output_dir")) c.output_dir = resolve(get_field<std::string>(j, "output_dir", where), base_dir);
  else c.output_dir = base_dir / "out";
  if (j.contains("recall_targets")) c.recall_targets = get_field<std::vector<double>>(j, "recall_targets", where);
  if (j.contains("stage_pool")) {
    const auto pool = parse_stage_pool(get_field<std::string>(j, "stage_pool", where));
    if (!pool) throw ConfigError("stage_pool: expected \"reached\" or \"gold_filtered\"");
    c.stage_pool = *pool;
  }
  return c;
}

ExperimentPlan experiment_plan_from_json(const Json& j, const fs::path& base_dir, const PlanOverrides& overrides) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Json base = j;
  std::optional<Json> experiments;
  if (base.contains("experiments")) {
    experiments = base["experiments"];
    base.erase("experiments");
  }
  if (base.contains("architectures")) {
    if (experiments) throw ConfigError("give either \"experiments\" or \"architectures\", not both");
    const Json kinds = base["architectures"];
    base.erase("architectures");
    if (!kinds.is_array()) throw ConfigError("architectures: expected a list of kinds");
    experiments = Json::array();
    for (const auto& kind : kinds) {
      if (!kind.is_string()) throw ConfigError("architectures: entries must be strings");
      Json patch;
      patch["name"] = kind;
      patch["architecture"]["kind"] = kind;
      // The FFN combines stage hidden layers, so its stages must be MLPs.
      if (kind == "ffn") patch["architecture"]["model_kind"] = "mlp";
      experiments->push_back(std::move(patch));
    }
  }
  if (overrides.seed) base["seed"] = *overrides.seed;

  ExperimentPlan plan;
  auto finish = [&](Json cfg) {
    if (overrides.seed) cfg["seed"] = *overrides.seed;
    auto e = experiment_from_json(cfg, base_dir);
    if (overrides.output_dir) e.output_dir = *overrides.output_dir;
    e.validate();
    return e;
  };
  if (!experiments) {
    plan.experiments.push_back(finish(base));
  } else {
    if (!experiments->is_array() || experiments->empty())
      throw ConfigError("experiments: expected a non-empty list of objects");
    plan.grid = true;
    std::set<std::string> names;
    for (const auto& patch : *experiments) {
      if (!patch.is_object()) throw ConfigError("experiments: entries must be objects");
      if (!patch.contains("name")) throw ConfigError("experiments: every entry needs a \"name\"");
      Json cfg = base;
      cfg.merge_patch(patch);
      auto e = finish(cfg);
      if (!names.insert(e.name).second) throw ConfigError("experiments: duplicate name \"" + e.name + "\"");
      plan.experiments.push_back(std::move(e));
    }
  }
  plan.output_dir = plan.experiments.front().output_dir;
  for (const auto& e : plan.experiments)
    if (e.output_dir != plan.output_dir) throw ConfigError("experiments in one grid must share output_dir");
  return plan;
}

ExperimentPlan load_experiment_plan(const fs::path& config_file, const PlanOverrides& overrides) {
  std::ifstream in(config_file);
  if (!in) throw ConfigError("cannot read config " + config_file.string());
  Json j;
  try {
    j = Json::parse(in, nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config " + config_file.string() + ": " + e.what());
  }
  return experiment_plan_from_json(j, config_file.parent_path(), overrides);
}

Corpus load_experiment_corpus(const ExperimentConfig& config) {
  Corpus corpus = config.corpus_path ? load_corpus(*config.corpus_path, config.stop_rule)
                                     : generate_synthetic(*config.synthetic);
  if (config.subset) corpus = filter_subset(corpus, *config.subset);
  return corpus;
}

std::string configuration_summary(const ExperimentConfig& c) {
  const auto& a = c.architecture;
  std::string s = a.kind == ArchitectureKind::Itl ? sampling_summary(a.itl_sampling) : sampling_summary(a.stage_sampling);
  s += ", " + std::to_string(c.featurizer.max_seq_len);
  if (c.featurizer.use_pt_tag) s += ", PT tag";
  s += ", ";
  s += model_kind_name(a.model_kind);
  return s;
}

EvalReport run_experiment(const ExperimentConfig& config, std::size_t jobs) {
  config.validate();
  return run_experiment(config, load_experiment_corpus(config), jobs);
}

EvalReport run_experiment(const ExperimentConfig& config, const Corpus& corpus, std::size_t jobs) {
  CvOptions options;
  options.jobs = jobs;
  options.recall_targets = config.recall_targets;
  options.stage_pool = config.stage_pool;
  const TaskSpec task(config.positive, config.stage_order);
  EvalReport report = cross_validate(config.architecture, config.featurizer, corpus, task, config.k, config.seed, options);
  report.name = config.name;
  report.configuration = configuration_summary(config);
  report.config = to_json(config);
  return report;
}

void write_report_files(const EvalReport& report, const fs::path& dir, const std::string& generated_at) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  auto write = [&](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
  };
  Json j;
  j["generated_at"] = generated_at;
  const Json body = report_to_json(report);
  for (const auto& [key, value] : body.items()) j[key] = value;
  write(dir / ("report_" + report.name + ".json"), j.dump(2) + "\n");
  write(dir / ("report_" + report.name + ".txt"), render_report_text(report));
  write(dir / ("folds_" + report.name + ".csv"), render_folds_csv(report));
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace screening
