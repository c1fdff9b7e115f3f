#pragma once

#include <random>

#include "rlbd/attacker.hpp"
#include "rlbd/mdp.hpp"

namespace rlbd {

// Comparison attackers: fixed per-transition reward rules. All three are
// identity maps on non-triggered states.

// Fixed penalty on non-target actions in triggered states.
double neighbourhood_poison(const Transition& t, const TargetPolicy& tp, double penalty);

// Maximal reward for the target action, minimal for everything else, in
// triggered states.
double minmax_poison(const Transition& t, const TargetPolicy& tp, double r_max, double r_min);

// Bounded uniform bonus for the target action, bounded uniform penalty for
// other actions, in triggered states.
double random_poison(const Transition& t, const TargetPolicy& tp, double bound,
                     std::mt19937_64& rng);

struct BaselineParams {
    double neighbourhood_penalty = 2.0;
    double minmax_r_max = 1.0;
    double minmax_r_min = -1.0;
    double random_bound = 2.0;

    nlohmann::json to_json() const;
    static BaselineParams from_json(const nlohmann::json& j);
};

}  // namespace rlbd
