#include "rlbd/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rlbd/rng.hpp"

namespace rlbd {

void DqnConfig::validate() const {
    if (buffer_capacity == 0) throw std::invalid_argument("dqn: buffer_capacity must be positive");
    if (batch_size <= 0) throw std::invalid_argument("dqn: batch_size must be positive");
    if (learning_rate <= 0) throw std::invalid_argument("dqn: learning_rate must be positive");
    if (target_sync_period <= 0) throw std::invalid_argument("dqn: target_sync_period must be positive");
    if (epsilon_start < 0 || epsilon_start > 1 || epsilon_end < 0 || epsilon_end > 1) {
        throw std::invalid_argument("dqn: epsilon schedule must stay within [0,1]");
    }
    if (epsilon_decay_steps <= 0) throw std::invalid_argument("dqn: epsilon_decay_steps must be positive");
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("dqn: gamma must lie in (0,1)");
    if (training_steps <= 0) throw std::invalid_argument("dqn: training_steps must be positive");
    for (int h : hidden) {
        if (h <= 0) throw std::invalid_argument("dqn: hidden sizes must be positive");
    }
}

nlohmann::json DqnConfig::to_json() const {
    return nlohmann::json{{"buffer_capacity", buffer_capacity},
                          {"batch_size", batch_size},
                          {"learning_rate", learning_rate},
                          {"target_sync_period", target_sync_period},
                          {"epsilon_start", epsilon_start},
                          {"epsilon_end", epsilon_end},
                          {"epsilon_decay_steps", epsilon_decay_steps},
                          {"training_steps", training_steps},
                          {"gamma", gamma},
                          {"hidden", hidden},
                          {"learn_start", learn_start},
                          {"eval_every", eval_every},
                          {"eval_episodes", eval_episodes},
                          {"stop_return", stop_return}};
}

DqnConfig DqnConfig::from_json(const nlohmann::json& j) {
    DqnConfig c;
    c.buffer_capacity = j.value("buffer_capacity", c.buffer_capacity);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.target_sync_period = j.value("target_sync_period", c.target_sync_period);
    c.epsilon_start = j.value("epsilon_start", c.epsilon_start);
    c.epsilon_end = j.value("epsilon_end", c.epsilon_end);
    c.epsilon_decay_steps = j.value("epsilon_decay_steps", c.epsilon_decay_steps);
    c.training_steps = j.value("training_steps", c.training_steps);
    c.gamma = j.value("gamma", c.gamma);
    c.hidden = j.value("hidden", c.hidden);
    c.learn_start = j.value("learn_start", c.learn_start);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.eval_episodes = j.value("eval_episodes", c.eval_episodes);
    c.stop_return = j.value("stop_return", c.stop_return);
    c.validate();
    return c;
}

static std::vector<int> dqn_layers(const DqnConfig& cfg, int obs_dim, int n_actions) {
    std::vector<int> sizes{obs_dim};
    sizes.insert(sizes.end(), cfg.hidden.begin(), cfg.hidden.end());
    sizes.push_back(n_actions);
    return sizes;
}

DqnAgent::DqnAgent(const DqnConfig& cfg, int obs_dim, int n_actions, std::uint64_t seed)
    : cfg_(cfg), n_actions_(n_actions),
      net_(Mlp::make(dqn_layers(cfg, obs_dim, n_actions), seed)),
      target_(net_) {
    cfg_.validate();
    opt_.kind = OptimizerKind::adam;
    opt_.lr = cfg_.learning_rate;
}

int DqnAgent::greedy_action(std::span<const double> obs) {
    const auto& q = net_.forward(obs);
    int best = 0;
    for (int a = 1; a < n_actions_; ++a) {
        if (q[a] > q[best]) best = a;
    }
    return best;
}

double DqnAgent::epsilon() const {
    const double frac =
        std::min(1.0, static_cast<double>(env_steps_) / static_cast<double>(cfg_.epsilon_decay_steps));
    return cfg_.epsilon_start + frac * (cfg_.epsilon_end - cfg_.epsilon_start);
}

int DqnAgent::act(std::span<const double> obs, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon()) {
        return std::uniform_int_distribution<int>(0, n_actions_ - 1)(rng);
    }
    return greedy_action(obs);
}

double DqnAgent::update(const std::vector<Transition>& batch) {
    if (batch.empty()) throw std::invalid_argument("dqn update: empty batch");
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    net_.zero_grads();
    double loss = 0.0;
    std::vector<double> out_grad(n_actions_, 0.0);
    for (const Transition& t : batch) {
        double target = t.reward;
        if (!t.done) {
            const auto& qn = target_.forward(state_features(t.next_state));
            double best = qn[0];
            for (int a = 1; a < n_actions_; ++a) best = std::max(best, qn[a]);
            target += cfg_.gamma * best;
        }
        const auto& q = net_.forward(state_features(t.state));
        const double td = q[t.action] - target;
        loss += td * td * inv_n;
        std::fill(out_grad.begin(), out_grad.end(), 0.0);
        out_grad[t.action] = 2.0 * td * inv_n;
        net_.backward(out_grad);
    }
    opt_.step(net_);
    ++updates_;
    if (updates_ % cfg_.target_sync_period == 0) target_ = net_;
    return loss;
}

nlohmann::json DqnAgent::checkpoint() const {
    return nlohmann::json{{"config", cfg_.to_json()},
                          {"n_actions", n_actions_},
                          {"net", net_.to_json()},
                          {"target", target_.to_json()},
                          {"optimizer", opt_.to_json()},
                          {"env_steps", env_steps_},
                          {"updates", updates_}};
}

DqnAgent DqnAgent::restore(const nlohmann::json& j) {
    DqnConfig cfg = DqnConfig::from_json(j.at("config"));
    Mlp net = Mlp::from_json(j.at("net"));
    DqnAgent agent(cfg, net.input_size(), j.at("n_actions").get<int>(), 0);
    agent.net_ = std::move(net);
    agent.target_ = Mlp::from_json(j.at("target"));
    agent.opt_ = Optimizer::from_json(j.at("optimizer"));
    agent.env_steps_ = j.at("env_steps").get<long>();
    agent.updates_ = j.at("updates").get<long>();
    return agent;
}

std::vector<Transition> collect(DqnAgent& agent, CartPoleEnv& env, int steps,
                                std::mt19937_64& rng, const CollectOptions& opts) {
    std::vector<Transition> out;
    out.reserve(steps);
    auto maybe_injected_reset = [&]() {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        if (opts.trigger_injection_rate > 0.0 && u(rng) < opts.trigger_injection_rate) {
            std::uniform_real_distribution<double> pos(opts.inject_lo, opts.inject_hi);
            env.reset(CoordinateOverride{0, pos(rng)});
        } else {
            env.reset();
        }
    };
    if (env.done()) maybe_injected_reset();
    for (int i = 0; i < steps; ++i) {
        std::vector<double> obs = env.state().to_vector();
        int action = agent.act(obs, rng);
        CartPoleStepResult r = env.step(action);
        agent.note_env_step();
        out.push_back(Transition{State{obs}, action, r.reward, State{r.state.to_vector()}, r.done});
        if (r.done) maybe_injected_reset();
    }
    return out;
}

EvalResult evaluate(const std::function<int(std::span<const double>)>& policy, CartPoleEnv& env,
                    const TriggerSpec& trigger, TriggerMode mode, int episodes) {
    if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
    if (mode == TriggerMode::activated && trigger.override_step != 0) {
        // CartPole deployment triggers fire at the initial time step only.
        throw std::logic_error("evaluate: mid-episode overrides are not supported for CartPole");
    }
    EvalResult res;
    res.episode_returns.reserve(episodes);
    for (int ep = 0; ep < episodes; ++ep) {
        if (mode == TriggerMode::activated) {
            env.reset(CoordinateOverride{trigger.override_coord, trigger.override_value});
        } else {
            env.reset();
        }
        double ret = 0.0;
        bool done = false;
        while (!done) {
            int a = policy(env.state().to_vector());
            CartPoleStepResult r = env.step(a);
            ret += r.reward;
            done = r.done;
        }
        res.episode_returns.push_back(ret);
        res.mean_return += ret;
    }
    res.mean_return /= static_cast<double>(episodes);
    return res;
}

int TabularQAgent::act(int s, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < epsilon()) {
        return std::uniform_int_distribution<int>(0, q_.n_actions - 1)(rng);
    }
    int best = 0;
    for (int a = 1; a < q_.n_actions; ++a) {
        if (q_.at(s, a) > q_.at(s, best)) best = a;
    }
    return best;
}

double TabularQAgent::epsilon() const {
    const double frac =
        std::min(1.0, static_cast<double>(env_steps_) / static_cast<double>(eps_decay_));
    return eps_start_ + frac * (eps_end_ - eps_start_);
}

void TabularQAgent::update(const std::vector<Transition>& batch) {
    for (const Transition& t : batch) {
        const int s = state_index(t.state);
        const int s2 = state_index(t.next_state);
        double best = 0.0;
        if (!t.done) {
            best = q_.at(s2, 0);
            for (int a = 1; a < q_.n_actions; ++a) best = std::max(best, q_.at(s2, a));
        }
        const double target = t.reward + gamma_ * (t.done ? 0.0 : best);
        q_.at(s, t.action) += lr_ * (target - q_.at(s, t.action));
    }
}

}  // namespace rlbd
