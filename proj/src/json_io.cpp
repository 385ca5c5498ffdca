#include "screening/json_io.hpp"

#include <algorithm>

namespace screening::json_io {

namespace {

template <typename T>
T get_as(const Json& j, std::string_view key, std::string_view where) {
  try {
    return j.at(std::string(key)).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string(where) + "." + std::string(key) + ": " + e.what());
  }
}

SampleTarget target_from_json(const Json& j, std::string_view where) {
  if (j.is_number_unsigned() && j.get<std::uint64_t>() > 0) return SampleTarget::count(j.get<std::size_t>());
  if (j.is_string()) {
    if (auto t = SampleTarget::parse(j.get<std::string>())) return *t;
  }
  throw ConfigError(std::string(where) + ": expected a positive integer, \"all\" or \"minority\"");
}

Json target_to_json(const SampleTarget& t) {
  if (t.kind() == SampleTarget::Kind::Count) return t.value();
  return t.to_string();
}

RatingSet rating_set_from_json(Criterion c, const Json& j, std::string_view where) {
  if (j.is_string() && j.get<std::string>() == "any") return RatingSet::all(c);
  if (!j.is_array()) throw ConfigError(std::string(where) + ": expected a list of values or \"any\"");
  RatingSet s;
  for (const auto& v : j) {
    if (!v.is_string()) throw ConfigError(std::string(where) + ": values must be strings");
    auto code = parse_value(c, v.get<std::string>());
    if (!code) throw ConfigError(std::string(where) + ": unknown value \"" + v.get<std::string>() + "\"");
    s.insert(*code);
  }
  return s;
}

Json rating_set_to_json(Criterion c, const RatingSet& s) {
  Json arr = Json::array();
  for (int code = 0; code < value_count(c); ++code) {
    if (s.contains(code)) arr.push_back(std::string(value_name(c, code)));
  }
  return arr;
}

}  // namespace

void require_known_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key \"" + key + "\"");
    }
  }
}

Json to_json(const FeaturizerConfig& c) {
  Json j;
  j["max_seq_len"] = c.max_seq_len;
  j["use_pt_tag"] = c.use_pt_tag;
  j["ngram_orders"] = c.ngram_orders;
  j["hash_dim"] = c.hash_dim;
  j["tf_scaling"] = c.tf_scaling == TfScaling::Raw ? "raw" : "log1p";
  return j;
}

FeaturizerConfig featurizer_from_json(const Json& j, FeaturizerConfig c) {
  constexpr std::string_view where = "featurizer";
  require_known_keys(j, {"max_seq_len", "use_pt_tag", "ngram_orders", "hash_dim", "tf_scaling"}, where);
  if (j.contains("max_seq_len")) c.max_seq_len = get_as<std::size_t>(j, "max_seq_len", where);
  if (j.contains("use_pt_tag")) c.use_pt_tag = get_as<bool>(j, "use_pt_tag", where);
  if (j.contains("ngram_orders")) c.ngram_orders = get_as<std::vector<int>>(j, "ngram_orders", where);
  if (j.contains("hash_dim")) c.hash_dim = get_as<std::uint32_t>(j, "hash_dim", where);
  if (j.contains("tf_scaling")) {
    const auto s = get_as<std::string>(j, "tf_scaling", where);
    if (s == "raw") {
      c.tf_scaling = TfScaling::Raw;
    } else if (s == "log1p") {
      c.tf_scaling = TfScaling::Log1p;
    } else {
      throw ConfigError("featurizer.tf_scaling: expected \"raw\" or \"log1p\"");
    }
  }
  c.validate();
  return c;
}

Json to_json(const TrainConfig& c) {
  Json j;
  j["learning_rate"] = c.learning_rate;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["l2"] = c.l2;
  j["seed"] = c.seed;
  j["hidden_dim"] = c.hidden_dim;
  j["activation"] = std::string(activation_name(c.activation));
  j["init_scale"] = c.init_scale;
  return j;
}

TrainConfig train_config_from_json(const Json& j, TrainConfig c) {
  constexpr std::string_view where = "train";
  require_known_keys(j, {"learning_rate", "epochs", "batch_size", "l2", "seed", "hidden_dim", "activation", "init_scale"},
                     where);
  if (j.contains("learning_rate")) c.learning_rate = get_as<double>(j, "learning_rate", where);
  if (j.contains("epochs")) c.epochs = get_as<int>(j, "epochs", where);
  if (j.contains("batch_size")) c.batch_size = get_as<std::size_t>(j, "batch_size", where);
  if (j.contains("l2")) c.l2 = get_as<double>(j, "l2", where);
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed", where);
  if (j.contains("hidden_dim")) c.hidden_dim = get_as<std::size_t>(j, "hidden_dim", where);
  if (j.contains("activation")) {
    auto a = parse_activation(get_as<std::string>(j, "activation", where));
    if (!a) throw ConfigError("train.activation: expected \"relu\" or \"tanh\"");
    c.activation = *a;
  }
  if (j.contains("init_scale")) c.init_scale = get_as<double>(j, "init_scale", where);
  c.validate();
  return c;
}

Json to_json(const SamplingPlan& p) {
  Json j;
  j["pos_target"] = target_to_json(p.pos_target);
  j["neg_target"] = target_to_json(p.neg_target);
  j["seed"] = p.seed;
  return j;
}

SamplingPlan sampling_plan_from_json(const Json& j, SamplingPlan p) {
  constexpr std::string_view where = "sampling";
  require_known_keys(j, {"pos_target", "neg_target", "seed"}, where);
  if (j.contains("pos_target")) p.pos_target = target_from_json(j.at("pos_target"), "sampling.pos_target");
  if (j.contains("neg_target")) p.neg_target = target_from_json(j.at("neg_target"), "sampling.neg_target");
  if (j.contains("seed")) p.seed = get_as<std::uint64_t>(j, "seed", where);
  return p;
}

Json to_json(const AcceptSets& a) {
  Json j;
  for (auto c : kCriteria) j[std::string(criterion_name(c))] = rating_set_to_json(c, a[c]);
  return j;
}

AcceptSets accept_sets_from_json(const Json& j, const AcceptSets& base) {
  require_known_keys(j, {"format", "hhc", "purpose", "rigor"}, "accept-sets");
  AcceptSets a = base;
  for (auto c : kCriteria) {
    const std::string key(criterion_name(c));
    if (j.contains(key)) a[c] = rating_set_from_json(c, j.at(key), key);
  }
  return a;
}

Json to_json(const StopRule& r) {
  Json j;
  for (int k = 0; k < 3; ++k) j[std::string(criterion_name(kCriteria[k]))] = rating_set_to_json(kCriteria[k], r.stop_values[k]);
  j["unrated_stops"] = r.unrated_stops;
  return j;
}

StopRule stop_rule_from_json(const Json& j) {
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "clinical_hedges") return StopRule::clinical_hedges();
    if (name == "none") return StopRule::none();
    throw ConfigError("stop_rule: expected \"clinical_hedges\", \"none\" or an object");
  }
  require_known_keys(j, {"format", "hhc", "purpose", "unrated_stops"}, "stop_rule");
  StopRule r = StopRule::none();
  for (int k = 0; k < 3; ++k) {
    const std::string key(criterion_name(kCriteria[k]));
    if (j.contains(key)) r.stop_values[k] = rating_set_from_json(kCriteria[k], j.at(key), "stop_rule." + key);
  }
  if (j.contains("unrated_stops")) r.unrated_stops = get_as<bool>(j, "unrated_stops", "stop_rule");
  return r;
}

Json to_json(const TaskSpec& t) {
  Json arr = Json::array();
  for (const auto& s : t.stages()) {
    Json st;
    st["criterion"] = std::string(criterion_name(s.criterion));
    st["accept"] = rating_set_to_json(s.criterion, s.accept);
    arr.push_back(st);
  }
  return arr;
}

std::array<Criterion, 4> stage_order_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 4) throw ConfigError("task_order: expected a list of four criteria");
  std::array<Criterion, 4> order{};
  for (std::size_t k = 0; k < 4; ++k) {
    if (!j[k].is_string()) throw ConfigError("task_order: entries must be strings");
    auto c = parse_criterion(j[k].get<std::string>());
    if (!c) throw ConfigError("task_order: unknown criterion \"" + j[k].get<std::string>() + "\"");
    order[k] = *c;
  }
  return order;
}

Json to_json(const ArchitectureConfig& c) {
  Json j;
  j["kind"] = std::string(architecture_name(c.kind));
  j["model_kind"] = std::string(model_kind_name(c.model_kind));
  j["model"] = to_json(c.model);
  if (!c.stage_models.empty()) {
    Json arr = Json::array();
    for (const auto& s : c.stage_models) arr.push_back(to_json(s));
    j["stage_models"] = arr;
  }
  j["itl_sampling"] = to_json(c.itl_sampling);
  j["stage_sampling"] = to_json(c.stage_sampling);
  j["cascade_filter"] = c.cascade_filter == CascadeTrainFilter::Gold ? "gold" : "predicted";
  Json comb;
  comb["train"] = to_json(c.combiner.train);
  comb["sampling"] = to_json(c.combiner.sampling);
  j["combiner"] = comb;
  return j;
}

ArchitectureConfig architecture_from_json(const Json& j, ArchitectureConfig c) {
  constexpr std::string_view where = "architecture";
  require_known_keys(j,
                     {"kind", "model_kind", "model", "stage_models", "itl_sampling", "stage_sampling",
                      "cascade_filter", "combiner"},
                     where);
  if (j.contains("kind")) {
    auto k = parse_architecture(get_as<std::string>(j, "kind", where));
    if (!k) throw ConfigError("architecture.kind: expected itl, cascade, boolean or ffn");
    c.kind = *k;
  }
  if (j.contains("model_kind")) {
    auto k = parse_model_kind(get_as<std::string>(j, "model_kind", where));
    if (!k) throw ConfigError("architecture.model_kind: expected linear or mlp");
    c.model_kind = *k;
  }
  if (j.contains("model")) c.model = train_config_from_json(j.at("model"), c.model);
  if (j.contains("stage_models")) {
    c.stage_models.clear();
    for (const auto& s : j.at("stage_models")) c.stage_models.push_back(train_config_from_json(s, c.model));
  }
  if (j.contains("itl_sampling")) c.itl_sampling = sampling_plan_from_json(j.at("itl_sampling"), c.itl_sampling);
  if (j.contains("stage_sampling")) c.stage_sampling = sampling_plan_from_json(j.at("stage_sampling"), c.stage_sampling);
  if (j.contains("cascade_filter")) {
    const auto f = get_as<std::string>(j, "cascade_filter", where);
    if (f == "gold") {
      c.cascade_filter = CascadeTrainFilter::Gold;
    } else if (f == "predicted") {
      c.cascade_filter = CascadeTrainFilter::Predicted;
    } else {
      throw ConfigError("architecture.cascade_filter: expected \"gold\" or \"predicted\"");
    }
  }
  if (j.contains("combiner")) {
    const auto& cj = j.at("combiner");
    require_known_keys(cj, {"train", "sampling"}, "combiner");
    if (cj.contains("train")) c.combiner.train = train_config_from_json(cj.at("train"), c.combiner.train);
    if (cj.contains("sampling")) c.combiner.sampling = sampling_plan_from_json(cj.at("sampling"), c.combiner.sampling);
  }
  c.validate();
  return c;
}

}  // namespace screening::json_io
