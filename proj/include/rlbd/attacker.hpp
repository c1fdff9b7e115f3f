#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlbd/mdp.hpp"
#include "rlbd/mlp.hpp"
#include "rlbd/trigger.hpp"

namespace rlbd {

// Hinge: x when positive, else 0. Its square is the penalty on violated
// margin constraints.
inline double phi(double x) { return x > 0.0 ? x : 0.0; }

// Backdoor target policy: the pretrained normal policy on non-triggered
// states, the bad action on triggered states.
struct TargetPolicy {
    std::function<int(const State&)> normal_action;
    int bad_action = 0;
    TriggerSpec trigger;

    int operator()(const State& s) const {
        return is_triggered(s, trigger) ? bad_action : normal_action(s);
    }
};

int target_action(const TargetPolicy& tp, const State& s);

// Tabular projection of a TargetPolicy: one action per state index.
DeterministicPolicy make_target_policy_table(const DeterministicPolicy& normal,
                                             const TriggerSpec& trigger, int bad_action);

struct RhoSchedule {
    double rho0 = 20.0;
    double growth = 1.0;  // 1.0 = constant schedule
    double rho_max = 20.0;

    double at(long k) const;
    nlohmann::json to_json() const;
    static RhoSchedule from_json(const nlohmann::json& j);
};

struct AttackConfig {
    double epsilon = 0.5;          // required Q-advantage of the target action
    RhoSchedule rho;               // penalty schedule rho_k
    double alpha = 1e-4;           // delta-network step size
    double beta = 1e-5;            // qbar-network step size
    double gamma = 0.99;           // discount used in the attacker's targets
    double trigger_injection_rate = 0.0;
    OptimizerKind optimizer = OptimizerKind::adam;
    // Open switch: evaluate the delta term of the Q targets at the updated
    // theta instead of the frozen round-k value.
    bool use_updated_delta_in_q_targets = false;
    std::vector<int> hidden = {64, 64};

    void validate() const;
    nlohmann::json to_json() const;
    static AttackConfig from_json(const nlohmann::json& j);
};

// Maps a (state, action) pair to the shared input encoding of the delta and
// qbar networks: feature vector (or one-hot state index) followed by a
// one-hot action.
struct StateActionEncoder {
    int n_state_inputs = 0;  // feature dim, or n_states for tabular one-hot
    int n_actions = 0;
    bool tabular = false;

    int input_size() const { return n_state_inputs + n_actions; }
    void encode(const State& s, int action, std::vector<double>& out) const;
};

// The attacker's two networks plus round bookkeeping.
class AttackerState {
  public:
    AttackerState(const AttackConfig& cfg, StateActionEncoder enc, std::uint64_t seed);

    double delta(const State& s, int a);  // Delta(s,a; theta)
    double qbar(const State& s, int a);   // Qbar(s,a; lambda)

    Mlp& delta_net() { return delta_net_; }
    Mlp& qbar_net() { return qbar_net_; }
    const StateActionEncoder& encoder() const { return enc_; }
    long round() const { return round_; }

    nlohmann::json checkpoint() const;
    static AttackerState restore(const nlohmann::json& j);

    friend std::vector<Transition> poison_round(AttackerState&, const TargetPolicy&,
                                                const AttackConfig&,
                                                const std::vector<Transition>&);

  private:
    StateActionEncoder enc_;
    Mlp delta_net_, qbar_net_;
    Optimizer delta_opt_, qbar_opt_;
    long round_ = 0;
    std::vector<double> scratch_;
};

// Bellman residual target for the reward perturbation:
//   Qbar(s,a) - r - gamma * (1 - done) * Qbar(s', pi_target(s')),
// evaluated at the current (frozen) network values.
double delta_target(const Transition& t, AttackerState& attacker, const TargetPolicy& tp,
                    double gamma);

// Targets for the qbar update: the first for (s,a), the second for
// (s', pi_target(s')). All right-hand sides use the frozen round values.
std::pair<double, double> qbar_targets(const Transition& t, AttackerState& attacker,
                                       const TargetPolicy& tp, const AttackConfig& cfg);

// One attack round over a freshly collected batch:
//  1. compute per-transition delta targets (frozen lambda);
//  2. compute qbar targets (frozen theta, lambda, rho_k);
//  3. one gradient step on theta toward the delta targets;
//  4. emit the batch with rewards r + Delta(s,a; updated theta);
//  5. one gradient step on lambda toward the qbar targets;
//  6. advance the round counter.
// Only reward fields of the output differ from the input.
std::vector<Transition> poison_round(AttackerState& attacker, const TargetPolicy& tp,
                                     const AttackConfig& cfg,
                                     const std::vector<Transition>& batch);

}  // namespace rlbd
