#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <json.hpp>

#include "rlbd/cartpole.hpp"
#include "rlbd/chain.hpp"
#include "rlbd/mlp.hpp"
#include "rlbd/replay.hpp"
#include "rlbd/trigger.hpp"

namespace rlbd {

struct DqnConfig {
    std::size_t buffer_capacity = 50000;
    int batch_size = 64;
    double learning_rate = 1e-3;
    int target_sync_period = 500;   // updates between target-network syncs
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    int epsilon_decay_steps = 10000;
    long training_steps = 100000;   // env-step budget
    double gamma = 0.99;
    std::vector<int> hidden = {64, 64};
    long learn_start = 1000;        // env steps before updates begin
    long eval_every = 2000;         // env steps between progress evaluations
    int eval_episodes = 5;
    double stop_return = 475.0;     // early stop once progress eval reaches this

    void validate() const;
    nlohmann::json to_json() const;
    static DqnConfig from_json(const nlohmann::json& j);
};

// Victim agent: deep Q-learning over CartPole observations.
class DqnAgent {
  public:
    DqnAgent(const DqnConfig& cfg, int obs_dim, int n_actions, std::uint64_t seed);

    int greedy_action(std::span<const double> obs);
    int act(std::span<const double> obs, std::mt19937_64& rng);  // epsilon-greedy

    double epsilon() const;  // current schedule value
    void note_env_step() { ++env_steps_; }
    long env_steps() const { return env_steps_; }

    // One gradient step on mean squared TD error with the target network.
    double update(const std::vector<Transition>& batch);
    long updates_done() const { return updates_; }

    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    const Mlp& target_net() const { return target_; }
    const DqnConfig& config() const { return cfg_; }

    nlohmann::json checkpoint() const;
    static DqnAgent restore(const nlohmann::json& j);

  private:
    DqnConfig cfg_;
    int n_actions_;
    Mlp net_, target_;
    Optimizer opt_;
    long env_steps_ = 0;
    long updates_ = 0;
};

struct CollectOptions {
    // Probability that an episode reset is forced into the trigger region
    // (cart position drawn uniformly from inject_lo..inject_hi). Applied on
    // the initialization path only; stored transitions are genuine.
    double trigger_injection_rate = 0.0;
    double inject_lo = 0.55;
    double inject_hi = 1.0;
};

// Runs `steps` epsilon-greedy env steps, resetting on episode end. Returns
// the transitions in collection order.
std::vector<Transition> collect(DqnAgent& agent, CartPoleEnv& env, int steps,
                                std::mt19937_64& rng, const CollectOptions& opts = {});

struct EvalResult {
    double mean_return = 0.0;
    std::vector<double> episode_returns;
};

enum class TriggerMode { inactive, activated };

// Greedy policy rollouts; `activated` applies the TriggerSpec override at its
// configured step. Throws std::invalid_argument for episodes < 1.
EvalResult evaluate(const std::function<int(std::span<const double>)>& policy, CartPoleEnv& env,
                    const TriggerSpec& trigger, TriggerMode mode, int episodes);

// Tabular Q-learning victim for chain MDPs.
class TabularQAgent {
  public:
    TabularQAgent(int n_states, int n_actions, double lr, double gamma,
                  double eps_start, double eps_end, long eps_decay_steps)
        : q_(n_states, n_actions, 0.0), lr_(lr), gamma_(gamma), eps_start_(eps_start),
          eps_end_(eps_end), eps_decay_(eps_decay_steps) {}

    int act(int s, std::mt19937_64& rng);
    void update(const std::vector<Transition>& batch);
    double epsilon() const;

    const QTable& q() const { return q_; }
    long env_steps() const { return env_steps_; }
    void note_env_step() { ++env_steps_; }

  private:
    QTable q_;
    double lr_, gamma_, eps_start_, eps_end_;
    long eps_decay_;
    long env_steps_ = 0;
};

}  // namespace rlbd
