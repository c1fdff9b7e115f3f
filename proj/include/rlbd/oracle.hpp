#pragma once

#include <json.hpp>

#include "rlbd/mdp.hpp"

namespace rlbd {

struct GridSearchResult {
    double best_objective = 0.0;
    QTable best_qbar;
    double coarse_objective = 0.0;  // before the refinement pass
    long evaluations = 0;
};

// Exhaustive lattice search over Qbar in [-bounds, bounds]^{S*A} at the given
// resolution, then one refinement pass around the best cell at 10x finer
// resolution. Implemented independently of the descent solver: it shares no
// numerical kernels with it. Throws std::invalid_argument when
// n_states * n_actions > 6.
GridSearchResult grid_search_solve(const TabularMdp& mdp, const DeterministicPolicy& target,
                                   double epsilon, double rho, double bounds, double resolution);

struct BackdoorReport {
    bool greedy_matches = false;
    std::vector<int> mismatched_states;
    double min_margin = 0.0;
    double max_bellman_residual = 0.0;
    int worst_state = -1;
    int worst_action = -1;
    double delta_sq_norm = 0.0;
    bool margins_pass = false;    // min_margin >= epsilon - 1e-3
    bool residual_pass = false;   // max_bellman_residual <= 1e-4
    bool pass = false;

    nlohmann::json to_json() const;
};

// Pure report over a candidate solution: greedy match against the target
// policy, minimum margin, worst Bellman residual of Qbar under r + Delta, and
// the squared distortion norm. Never mutates its inputs.
BackdoorReport verify_backdoor(const QTable& qbar, const DeterministicPolicy& target,
                               double epsilon, const TabularMdp& mdp, const QTable& delta);

}  // namespace rlbd
