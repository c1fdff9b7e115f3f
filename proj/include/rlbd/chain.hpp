#pragma once

#include <cstdint>
#include <random>

#include "rlbd/mdp.hpp"

namespace rlbd {

// Parametric chain MDP: two actions {0 = left, 1 = right}. Right advances
// with probability 1 - slip, else stays; left steps back deterministically
// (saturating at state 0). Reward 1 on every action taken from the
// terminal-most state, which is absorbing under right.
TabularMdp make_chain_mdp(int n_states, double slip, double gamma);

// Sampling wrapper over a TabularMdp for agent training. The chain is a
// continuing task: episodes are truncated at a horizon but the returned
// transitions are never marked done, so discounted bootstrapping matches the
// infinite-horizon tables.
class ChainEnv {
  public:
    ChainEnv(TabularMdp mdp, std::uint64_t seed, int horizon = 40)
        : mdp_(std::move(mdp)), rng_(seed), horizon_(horizon) {}

    int reset() {
        state_ = 0;
        steps_ = 0;
        return state_;
    }

    struct StepResult {
        int next_state;
        double reward;
        bool truncated;
    };

    StepResult step(int action);

    int state() const { return state_; }
    const TabularMdp& mdp() const { return mdp_; }

  private:
    TabularMdp mdp_;
    std::mt19937_64 rng_;
    int horizon_;
    int state_ = 0;
    int steps_ = 0;
};

}  // namespace rlbd
