#pragma once

#include <nlohmann/json.hpp>

#include "screening/corpus.hpp"
#include "screening/ensembles.hpp"
#include "screening/features.hpp"
#include "screening/models.hpp"
#include "screening/sampling.hpp"

// JSON forms of configuration types, shared by experiment configs and saved
// bundles. Readers reject unknown keys and throw ConfigError.
namespace screening::json_io {

using Json = nlohmann::ordered_json;

Json to_json(const FeaturizerConfig& c);
FeaturizerConfig featurizer_from_json(const Json& j, FeaturizerConfig base = {});

Json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const Json& j, TrainConfig base = {});

Json to_json(const SamplingPlan& p);
SamplingPlan sampling_plan_from_json(const Json& j, SamplingPlan base = {});

/// {"format": ["original"], ...}; a criterion may be "any".
Json to_json(const AcceptSets& a);
AcceptSets accept_sets_from_json(const Json& j, const AcceptSets& base);

Json to_json(const StopRule& r);
StopRule stop_rule_from_json(const Json& j);

Json to_json(const TaskSpec& t);
std::array<Criterion, 4> stage_order_from_json(const Json& j);

Json to_json(const ArchitectureConfig& c);
ArchitectureConfig architecture_from_json(const Json& j, ArchitectureConfig base = {});

/// Throws ConfigError naming the first key of `j` not in `allowed`.
void require_known_keys(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view where);

}  // namespace screening::json_io
