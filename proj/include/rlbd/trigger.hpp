#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "rlbd/mdp.hpp"

namespace rlbd {

// Describes when a state counts as triggered (the region predicate) and how
// deployment forces a state into the region (the override). The trigger never
// touches rewards or dynamics; it acts only on the observation/initialization
// path.
struct TriggerSpec {
    // Region predicate on vector states: features[coord] > threshold (strict).
    int coord = 0;
    double threshold = 0.5;

    // Region predicate on tabular states: member[s] != 0.
    std::vector<std::uint8_t> tabular_member;

    // Deployment override: at step override_step, set features[override_coord]
    // to override_value.
    int override_coord = 0;
    double override_value = 0.6;
    int override_step = 0;

    nlohmann::json to_json() const;
    static TriggerSpec from_json(const nlohmann::json& j);
};

bool is_triggered(const State& s, const TriggerSpec& spec);

}  // namespace rlbd
