#pragma once
#include <string>

#include "stm/core.hpp"
#include "stm/discretize.hpp"
#include "stm/distances.hpp"
#include "stm/embed.hpp"
#include "stm/models.hpp"

#include <nlohmann/json.hpp>

namespace stm::io {

using json = nlohmann::json;

// tms-v1: points [{id, tau}], dist as row-major strict upper triangle.
// Readers reject NaN/Inf anywhere in the payload.
json to_json(const TimedMetricSpace& space);
TimedMetricSpace space_from_json(const json& j);

// model-v1
json to_json(const models::SpacetimeModel& m);
models::SpacetimeModel model_from_json(const json& j);

// cgraph-v1: nodes [{id, t, x[], tau}], edges [{from, to, w_null, w_proper}].
json to_json(const discretize::CausalGraph& g);

// Model and node coordinates back from a cgraph-v1 document (enough to
// re-evaluate analytic predicates against a sampled space).
std::pair<models::SpacetimeModel, std::vector<models::ModelPoint>> graph_nodes_from_json(
    const json& j);

// cloud-v1
json to_json(const embed::EmbeddedCloud& c);
embed::EmbeddedCloud cloud_from_json(const json& j);

// bound-v1: {op, lower, upper, method, witness_pairs, seed, evals, inputs}.
// +inf serializes as the string "inf" (JSON has no Infinity literal).
json bound_to_json(const dist::DistanceBound& b, const std::string& op,
                   const std::string& hash_x, const std::string& hash_y);
dist::DistanceBound bound_from_json(const json& j);

// FNV-1a over the defining payload; identifies inputs in bound-v1 reports.
std::string content_hash(const TimedMetricSpace& space);

json load_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j, bool force);
void write_text_file(const std::string& path, const std::string& text, bool force);

} // namespace stm::io
