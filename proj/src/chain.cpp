#include "rlbd/chain.hpp"

#include <stdexcept>

namespace rlbd {

TabularMdp make_chain_mdp(int n_states, double slip, double gamma) {
    if (n_states < 2) throw std::invalid_argument("make_chain_mdp: need at least 2 states");
    if (slip < 0.0 || slip >= 1.0) throw std::invalid_argument("make_chain_mdp: slip must be in [0,1)");

    TabularMdp m;
    m.n_states = n_states;
    m.n_actions = 2;
    m.gamma = gamma;
    m.transition.assign(static_cast<std::size_t>(n_states) * 2 * n_states, 0.0);
    m.reward.assign(static_cast<std::size_t>(n_states) * 2, 0.0);

    const int last = n_states - 1;
    for (int s = 0; s < n_states; ++s) {
        // left: deterministic step back
        m.p(s, 0, std::max(s - 1, 0)) = 1.0;
        // right: advance with probability 1 - slip, else stay
        int fwd = std::min(s + 1, last);
        m.p(s, 1, fwd) += 1.0 - slip;
        m.p(s, 1, s) += slip;
        if (s == last) {
            m.r(s, 0) = 1.0;
            m.r(s, 1) = 1.0;
        }
    }
    m.validate();
    return m;
}

ChainEnv::StepResult ChainEnv::step(int action) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    int next = mdp_.n_states - 1;
    double acc = 0.0;
    for (int s2 = 0; s2 < mdp_.n_states; ++s2) {
        acc += mdp_.p(state_, action, s2);
        if (u <= acc) {
            next = s2;
            break;
        }
    }
    double reward = mdp_.r(state_, action);
    state_ = next;
    ++steps_;
    bool truncated = steps_ >= horizon_;
    if (truncated) {
        state_ = 0;
        steps_ = 0;
    }
    return {next, reward, truncated};
}

}  // namespace rlbd
