#pragma once

#include <json.hpp>

#include "satenq/mlp.hpp"
#include "satenq/replay.hpp"

namespace satenq {

// Parameter checkpoint document: {schema_version, layer_sizes, activations,
// row-major weight arrays, bias arrays}. Doubles survive the round-trip
// bit-exactly (shortest round-trip decimal serialization).
nlohmann::json mlp_to_json(const MlpParams& p);
MlpParams mlp_from_json(const nlohmann::json& j);

nlohmann::json adam_to_json(const AdamState& s);
AdamState adam_from_json(const nlohmann::json& j, const MlpParams& shaped_like);

nlohmann::json transition_to_json(const Transition& t);
Transition transition_from_json(const nlohmann::json& j);

// Debug-only buffer dump (oldest first); not part of the training path.
nlohmann::json buffer_to_json(const ReplayBuffer& b);

}  // namespace satenq
