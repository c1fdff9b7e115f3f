#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlbd/attacker.hpp"
#include "rlbd/baselines.hpp"
#include "rlbd/dqn.hpp"
#include "rlbd/trigger.hpp"

namespace rlbd {

// One tabular verification instance for the exact-solver/oracle comparison.
struct TabularInstance {
    int n_states = 2;
    double slip = 0.0;
    double gamma = 0.9;
    std::vector<int> trigger_states = {1};
    int bad_action = 0;
    double epsilon = 0.5;
    double rho = 200.0;
    double solver_tol = 1e-6;
    double grid_bounds = 0.0;       // 0 = auto: 1.5 * max |Q*| of the clean MDP
    double grid_resolution = 0.25;

    nlohmann::json to_json() const;
    static TabularInstance from_json(const nlohmann::json& j);
};

struct AttackRunConfig {
    AttackConfig core;
    long warmup_env_steps = 20000;   // clean-policy env steps collected for warmup
    long warmup_rounds = 6000;       // attacker-only rounds before victim training
    int warmup_batch = 32;
    double warmup_exploration = 0.3; // epsilon of the warmup behavior policy
    int chunk = 32;                  // env steps per attack round during training

    nlohmann::json to_json() const;
    static AttackRunConfig from_json(const nlohmann::json& j);
};

struct EvalConfig {
    int episodes = 5;
    int intensity_samples = 4000;
    int intensity_reference_n = 1000;
    std::vector<double> global_lo = {-2.4, -3.0, -0.2094, -3.0};
    std::vector<double> global_hi = {2.4, 3.0, 0.2094, 3.0};

    nlohmann::json to_json() const;
    static EvalConfig from_json(const nlohmann::json& j);
};

struct ExperimentConfig {
    std::string name = "cartpole";
    std::string env_kind = "cartpole";  // "cartpole" | "chain"
    int chain_n_states = 5;
    double chain_slip = 0.0;
    double chain_gamma = 0.9;
    int chain_horizon = 40;

    TriggerSpec trigger;
    int bad_action = 1;  // CartPole: push right

    DqnConfig dqn;
    AttackRunConfig attack;
    BaselineParams baselines;
    EvalConfig eval;
    std::vector<TabularInstance> tabular;

    std::string out_dir = "runs";
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

    void validate() const;
    nlohmann::json to_json() const;

    // Strict parse: unknown keys anywhere raise std::invalid_argument naming
    // the offending key path.
    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load_file(const std::string& path);

    // FNV-1a over the canonical serialized form.
    std::uint64_t config_hash() const;
};

}  // namespace rlbd
