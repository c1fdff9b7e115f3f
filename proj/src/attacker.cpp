#include "rlbd/attacker.hpp"

#include <cmath>
#include <stdexcept>

namespace rlbd {

int target_action(const TargetPolicy& tp, const State& s) { return tp(s); }

DeterministicPolicy make_target_policy_table(const DeterministicPolicy& normal,
                                             const TriggerSpec& trigger, int bad_action) {
    DeterministicPolicy pi;
    pi.action_of.resize(normal.size());
    for (int s = 0; s < normal.size(); ++s) {
        pi.action_of[s] = is_triggered(State{s}, trigger) ? bad_action : normal(s);
    }
    return pi;
}

double RhoSchedule::at(long k) const {
    if (growth == 1.0) return rho0;
    return std::min(rho_max, rho0 * std::pow(growth, static_cast<double>(k)));
}

nlohmann::json RhoSchedule::to_json() const {
    return nlohmann::json{{"rho0", rho0}, {"growth", growth}, {"rho_max", rho_max}};
}

RhoSchedule RhoSchedule::from_json(const nlohmann::json& j) {
    RhoSchedule r;
    r.rho0 = j.value("rho0", r.rho0);
    r.growth = j.value("growth", r.growth);
    r.rho_max = j.value("rho_max", r.rho_max);
    return r;
}

void AttackConfig::validate() const {
    if (epsilon <= 0) throw std::invalid_argument("attack: epsilon must be positive");
    if (rho.rho0 <= 0 || rho.rho_max <= 0 || rho.growth < 1.0) {
        throw std::invalid_argument("attack: rho schedule must stay positive and non-decreasing");
    }
    if (alpha < 0 || beta < 0) throw std::invalid_argument("attack: step sizes must be non-negative");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("attack: gamma must lie in (0,1)");
    if (trigger_injection_rate < 0 || trigger_injection_rate > 1) {
        throw std::invalid_argument("attack: trigger_injection_rate must lie in [0,1]");
    }
}

nlohmann::json AttackConfig::to_json() const {
    return nlohmann::json{{"epsilon", epsilon},
                          {"rho", rho.to_json()},
                          {"alpha", alpha},
                          {"beta", beta},
                          {"gamma", gamma},
                          {"trigger_injection_rate", trigger_injection_rate},
                          {"optimizer", to_string(optimizer)},
                          {"use_updated_delta_in_q_targets", use_updated_delta_in_q_targets},
                          {"hidden", hidden}};
}

AttackConfig AttackConfig::from_json(const nlohmann::json& j) {
    AttackConfig c;
    c.epsilon = j.value("epsilon", c.epsilon);
    if (j.contains("rho")) c.rho = RhoSchedule::from_json(j.at("rho"));
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.gamma = j.value("gamma", c.gamma);
    c.trigger_injection_rate = j.value("trigger_injection_rate", c.trigger_injection_rate);
    if (j.contains("optimizer")) {
        c.optimizer = optimizer_kind_from_string(j.at("optimizer").get<std::string>());
    }
    c.use_updated_delta_in_q_targets =
        j.value("use_updated_delta_in_q_targets", c.use_updated_delta_in_q_targets);
    c.hidden = j.value("hidden", c.hidden);
    c.validate();
    return c;
}

void StateActionEncoder::encode(const State& s, int action, std::vector<double>& out) const {
    out.assign(input_size(), 0.0);
    if (tabular) {
        const int idx = state_index(s);
        if (idx < 0 || idx >= n_state_inputs) {
            throw std::out_of_range("StateActionEncoder: state index out of range");
        }
        out[idx] = 1.0;
    } else {
        const auto& f = state_features(s);
        if (static_cast<int>(f.size()) != n_state_inputs) {
            throw std::invalid_argument("StateActionEncoder: feature length mismatch");
        }
        std::copy(f.begin(), f.end(), out.begin());
    }
    if (action < 0 || action >= n_actions) {
        throw std::out_of_range("StateActionEncoder: action index out of range");
    }
    out[n_state_inputs + action] = 1.0;
}

static std::vector<int> attacker_layers(const AttackConfig& cfg, const StateActionEncoder& enc) {
    std::vector<int> sizes{enc.input_size()};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(1);
    return sizes;
}

AttackerState::AttackerState(const AttackConfig& cfg, StateActionEncoder enc, std::uint64_t seed)
    : enc_(enc),
      delta_net_(Mlp::make(attacker_layers(cfg, enc), seed ^ 0xd3a1u)),
      qbar_net_(Mlp::make(attacker_layers(cfg, enc), seed ^ 0x9ba2u)) {
    cfg.validate();
    delta_opt_.kind = cfg.optimizer;
    delta_opt_.lr = cfg.alpha;
    qbar_opt_.kind = cfg.optimizer;
    qbar_opt_.lr = cfg.beta;
}

double AttackerState::delta(const State& s, int a) {
    enc_.encode(s, a, scratch_);
    return delta_net_.forward_scalar(scratch_);
}

double AttackerState::qbar(const State& s, int a) {
    enc_.encode(s, a, scratch_);
    return qbar_net_.forward_scalar(scratch_);
}

nlohmann::json AttackerState::checkpoint() const {
    return nlohmann::json{{"encoder",
                           {{"n_state_inputs", enc_.n_state_inputs},
                            {"n_actions", enc_.n_actions},
                            {"tabular", enc_.tabular}}},
                          {"delta_net", delta_net_.to_json()},
                          {"qbar_net", qbar_net_.to_json()},
                          {"delta_opt", delta_opt_.to_json()},
                          {"qbar_opt", qbar_opt_.to_json()},
                          {"round", round_}};
}

AttackerState AttackerState::restore(const nlohmann::json& j) {
    StateActionEncoder enc;
    enc.n_state_inputs = j.at("encoder").at("n_state_inputs").get<int>();
    enc.n_actions = j.at("encoder").at("n_actions").get<int>();
    enc.tabular = j.at("encoder").at("tabular").get<bool>();
    AttackConfig cfg;  // nets are replaced below; defaults suffice for shape
    AttackerState st(cfg, enc, 0);
    st.delta_net_ = Mlp::from_json(j.at("delta_net"));
    st.qbar_net_ = Mlp::from_json(j.at("qbar_net"));
    st.delta_opt_ = Optimizer::from_json(j.at("delta_opt"));
    st.qbar_opt_ = Optimizer::from_json(j.at("qbar_opt"));
    st.round_ = j.at("round").get<long>();
    return st;
}

double delta_target(const Transition& t, AttackerState& attacker, const TargetPolicy& tp,
                    double gamma) {
    double value = attacker.qbar(t.state, t.action) - t.reward;
    if (!t.done) {
        const int a_next = tp(t.next_state);
        value -= gamma * attacker.qbar(t.next_state, a_next);
    }
    return value;
}

// The lambda-only part of the first q target: the penalty bracket of the
// stochastic gradient at (s,a), without the delta term.
static double penalty_bracket(const Transition& t, AttackerState& attacker, const TargetPolicy& tp,
                              double epsilon, double rho) {
    const int pi_s = tp(t.state);
    const int n_actions = attacker.encoder().n_actions;
    const double q_sa = attacker.qbar(t.state, t.action);
    if (t.action != pi_s) {
        const double q_pi = attacker.qbar(t.state, pi_s);
        return rho * phi(q_sa + epsilon - q_pi);
    }
    double sum = 0.0;
    for (int a = 0; a < n_actions; ++a) {
        if (a == t.action) continue;
        sum += phi(attacker.qbar(t.state, a) + epsilon - q_sa);
    }
    return -rho * sum;
}

std::pair<double, double> qbar_targets(const Transition& t, AttackerState& attacker,
                                       const TargetPolicy& tp, const AttackConfig& cfg) {
    const double rho = cfg.rho.at(attacker.round());
    const double d = attacker.delta(t.state, t.action);
    const double first =
        attacker.qbar(t.state, t.action) - (d + penalty_bracket(t, attacker, tp, cfg.epsilon, rho));
    const int a_next = tp(t.next_state);
    const double second =
        attacker.qbar(t.next_state, a_next) + (t.done ? 0.0 : cfg.gamma * d);
    return {first, second};
}

std::vector<Transition> poison_round(AttackerState& attacker, const TargetPolicy& tp,
                                     const AttackConfig& cfg,
                                     const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("poison_round: empty batch");
    const std::size_t n = batch.size();
    const double rho = cfg.rho.at(attacker.round_);

    // Freeze every right-hand side at the round-k parameters.
    std::vector<double> d_targets(n), q_sa(n), q_next(n), bracket(n), d_frozen(n);
    std::vector<int> a_next(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Transition& t = batch[i];
        d_targets[i] = delta_target(t, attacker, tp, cfg.gamma);
        q_sa[i] = attacker.qbar(t.state, t.action);
        a_next[i] = tp(t.next_state);
        q_next[i] = attacker.qbar(t.next_state, a_next[i]);
        bracket[i] = penalty_bracket(t, attacker, tp, cfg.epsilon, rho);
        d_frozen[i] = attacker.delta(t.state, t.action);
    }

    // Gradient step on theta: 1/2 sum_i (Delta(s_i,a_i;theta) - target_i)^2.
    std::vector<double> enc;
    attacker.delta_net_.zero_grads();
    for (std::size_t i = 0; i < n; ++i) {
        attacker.enc_.encode(batch[i].state, batch[i].action, enc);
        const double v = attacker.delta_net_.forward_scalar(enc);
        const double g[1] = {v - d_targets[i]};
        attacker.delta_net_.backward(g);
    }
    attacker.delta_opt_.step(attacker.delta_net_);

    // Inject the updated perturbation into the rewards.
    std::vector<Transition> poisoned = batch;
    std::vector<double> d_updated(n);
    for (std::size_t i = 0; i < n; ++i) {
        d_updated[i] = attacker.delta(batch[i].state, batch[i].action);
        poisoned[i].reward = batch[i].reward + d_updated[i];
    }

    // Gradient step on lambda toward the frozen q targets.
    const double* d_for_targets =
        cfg.use_updated_delta_in_q_targets ? d_updated.data() : d_frozen.data();
    attacker.qbar_net_.zero_grads();
    for (std::size_t i = 0; i < n; ++i) {
        const Transition& t = batch[i];
        const double first_target = q_sa[i] - (d_for_targets[i] + bracket[i]);
        const double second_target =
            q_next[i] + (t.done ? 0.0 : cfg.gamma * d_for_targets[i]);

        attacker.enc_.encode(t.state, t.action, enc);
        double v = attacker.qbar_net_.forward_scalar(enc);
        double g[1] = {v - first_target};
        attacker.qbar_net_.backward(g);

        attacker.enc_.encode(t.next_state, a_next[i], enc);
        v = attacker.qbar_net_.forward_scalar(enc);
        g[0] = v - second_target;
        attacker.qbar_net_.backward(g);
    }
    attacker.qbar_opt_.step(attacker.qbar_net_);

    ++attacker.round_;
    return poisoned;
}

}  // namespace rlbd
