#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace rlbd {

// A state is either a tabular index (chain MDPs) or a feature vector
// (CartPole). Both fulfil the same Transition contract.
using State = std::variant<int, std::vector<double>>;

inline bool is_tabular_state(const State& s) { return std::holds_alternative<int>(s); }
inline int state_index(const State& s) { return std::get<int>(s); }
inline const std::vector<double>& state_features(const State& s) {
    return std::get<std::vector<double>>(s);
}

// One experience record; the unit the attacker poisons.
struct Transition {
    State state;
    int action = 0;
    double reward = 0.0;
    State next_state;
    bool done = false;
};

bool same_state(const State& a, const State& b);

// Q[s][a], row-major.
struct QTable {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> q;

    QTable() = default;
    QTable(int s, int a, double fill = 0.0) : n_states(s), n_actions(a), q(s * a, fill) {}

    double& at(int s, int a) { return q[s * n_actions + a]; }
    double at(int s, int a) const { return q[s * n_actions + a]; }
};

// Total map state-index -> action-index.
struct DeterministicPolicy {
    std::vector<int> action_of;

    int operator()(int s) const { return action_of[s]; }
    int size() const { return static_cast<int>(action_of.size()); }
};

// Finite MDP with explicit transition tensor P[s][a][s'] and reward table
// r[s][a].
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.0;
    std::vector<double> transition;  // [s][a][s'], row-major
    std::vector<double> reward;      // [s][a]

    double p(int s, int a, int s2) const {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double& p(int s, int a, int s2) {
        return transition[(s * n_actions + a) * n_states + s2];
    }
    double r(int s, int a) const { return reward[s * n_actions + a]; }
    double& r(int s, int a) { return reward[s * n_actions + a]; }

    // Throws std::invalid_argument when row sums stray from 1 beyond 1e-9,
    // probabilities leave [0,1], or gamma is not strictly inside (0,1).
    void validate() const;

    nlohmann::json to_json() const;
    static TabularMdp from_json(const nlohmann::json& j);
};

// Iterated Bellman backup until the residual
// max_{s,a} |Q(s,a) - r(s,a) - gamma * sum_{s'} P(s'|s,a) Q(s', pi(s'))|
// drops to tol. Throws std::runtime_error past the iteration cap.
QTable policy_evaluation(const TabularMdp& mdp, const DeterministicPolicy& policy, double tol);

// argmax_a Q(s,a), ties broken by lowest action index.
DeterministicPolicy greedy_policy(const QTable& q);

struct MarginReport {
    std::vector<double> margins;  // m(s) = Q(s, pi_s) - max_{a != pi_s} Q(s,a)
    double min_margin = 0.0;
    bool all_satisfied = false;  // min_margin >= epsilon
};

MarginReport margin_check(const QTable& q, const DeterministicPolicy& policy, double epsilon);

}  // namespace rlbd
