#include "rlbd/config.hpp"

#include <fstream>
#include <stdexcept>

namespace rlbd {

namespace {

void reject_unknown(const nlohmann::json& j, const std::vector<std::string>& known,
                    const std::string& path) {
    if (!j.is_object()) throw std::invalid_argument("config: expected object at " + path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const auto& k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::invalid_argument("config: unknown key '" + path + it.key() + "'");
    }
}

}  // namespace

nlohmann::json TabularInstance::to_json() const {
    return nlohmann::json{{"n_states", n_states},
                          {"slip", slip},
                          {"gamma", gamma},
                          {"trigger_states", trigger_states},
                          {"bad_action", bad_action},
                          {"epsilon", epsilon},
                          {"rho", rho},
                          {"solver_tol", solver_tol},
                          {"grid_bounds", grid_bounds},
                          {"grid_resolution", grid_resolution}};
}

TabularInstance TabularInstance::from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"n_states", "slip", "gamma", "trigger_states", "bad_action", "epsilon", "rho",
                    "solver_tol", "grid_bounds", "grid_resolution"},
                   "tabular[].");
    TabularInstance t;
    t.n_states = j.value("n_states", t.n_states);
    t.slip = j.value("slip", t.slip);
    t.gamma = j.value("gamma", t.gamma);
    t.trigger_states = j.value("trigger_states", t.trigger_states);
    t.bad_action = j.value("bad_action", t.bad_action);
    t.epsilon = j.value("epsilon", t.epsilon);
    t.rho = j.value("rho", t.rho);
    t.solver_tol = j.value("solver_tol", t.solver_tol);
    t.grid_bounds = j.value("grid_bounds", t.grid_bounds);
    t.grid_resolution = j.value("grid_resolution", t.grid_resolution);
    return t;
}

nlohmann::json AttackRunConfig::to_json() const {
    nlohmann::json j = core.to_json();
    j["warmup_env_steps"] = warmup_env_steps;
    j["warmup_rounds"] = warmup_rounds;
    j["warmup_batch"] = warmup_batch;
    j["warmup_exploration"] = warmup_exploration;
    j["chunk"] = chunk;
    return j;
}

AttackRunConfig AttackRunConfig::from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"epsilon", "rho", "alpha", "beta", "gamma", "trigger_injection_rate",
                    "optimizer", "use_updated_delta_in_q_targets", "hidden", "warmup_env_steps",
                    "warmup_rounds", "warmup_batch", "warmup_exploration", "chunk"},
                   "attack.");
    AttackRunConfig c;
    c.core = AttackConfig::from_json(j);
    c.warmup_env_steps = j.value("warmup_env_steps", c.warmup_env_steps);
    c.warmup_rounds = j.value("warmup_rounds", c.warmup_rounds);
    c.warmup_batch = j.value("warmup_batch", c.warmup_batch);
    c.warmup_exploration = j.value("warmup_exploration", c.warmup_exploration);
    c.chunk = j.value("chunk", c.chunk);
    if (c.chunk <= 0 || c.warmup_batch <= 0) {
        throw std::invalid_argument("config: attack.chunk and attack.warmup_batch must be positive");
    }
    return c;
}

nlohmann::json EvalConfig::to_json() const {
    return nlohmann::json{{"episodes", episodes},
                          {"intensity_samples", intensity_samples},
                          {"intensity_reference_n", intensity_reference_n},
                          {"global_lo", global_lo},
                          {"global_hi", global_hi}};
}

EvalConfig EvalConfig::from_json(const nlohmann::json& j) {
    reject_unknown(
        j, {"episodes", "intensity_samples", "intensity_reference_n", "global_lo", "global_hi"},
        "eval.");
    EvalConfig c;
    c.episodes = j.value("episodes", c.episodes);
    c.intensity_samples = j.value("intensity_samples", c.intensity_samples);
    c.intensity_reference_n = j.value("intensity_reference_n", c.intensity_reference_n);
    c.global_lo = j.value("global_lo", c.global_lo);
    c.global_hi = j.value("global_hi", c.global_hi);
    if (c.episodes < 1) throw std::invalid_argument("config: eval.episodes must be >= 1");
    if (c.global_lo.size() != c.global_hi.size()) {
        throw std::invalid_argument("config: eval.global_lo/global_hi size mismatch");
    }
    return c;
}

void ExperimentConfig::validate() const {
    if (env_kind != "cartpole" && env_kind != "chain") {
        throw std::invalid_argument("config: env must be 'cartpole' or 'chain'");
    }
    if (name.empty()) throw std::invalid_argument("config: name must be non-empty");
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    dqn.validate();
    attack.core.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json tab = nlohmann::json::array();
    for (const auto& t : tabular) tab.push_back(t.to_json());
    return nlohmann::json{{"name", name},
                          {"env",
                           {{"kind", env_kind},
                            {"chain_n_states", chain_n_states},
                            {"chain_slip", chain_slip},
                            {"chain_gamma", chain_gamma},
                            {"chain_horizon", chain_horizon}}},
                          {"trigger", trigger.to_json()},
                          {"bad_action", bad_action},
                          {"dqn", dqn.to_json()},
                          {"attack", attack.to_json()},
                          {"baselines", baselines.to_json()},
                          {"eval", eval.to_json()},
                          {"tabular", tab},
                          {"run", {{"out_dir", out_dir}, {"seeds", seeds}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    reject_unknown(j,
                   {"name", "env", "trigger", "bad_action", "dqn", "attack", "baselines", "eval",
                    "tabular", "run"},
                   "");
    ExperimentConfig c;
    c.name = j.value("name", c.name);
    if (j.contains("env")) {
        const auto& e = j.at("env");
        reject_unknown(e, {"kind", "chain_n_states", "chain_slip", "chain_gamma", "chain_horizon"},
                       "env.");
        c.env_kind = e.value("kind", c.env_kind);
        c.chain_n_states = e.value("chain_n_states", c.chain_n_states);
        c.chain_slip = e.value("chain_slip", c.chain_slip);
        c.chain_gamma = e.value("chain_gamma", c.chain_gamma);
        c.chain_horizon = e.value("chain_horizon", c.chain_horizon);
    }
    if (j.contains("trigger")) {
        reject_unknown(j.at("trigger"),
                       {"coord", "threshold", "tabular_member", "override_coord", "override_value",
                        "override_step"},
                       "trigger.");
        c.trigger = TriggerSpec::from_json(j.at("trigger"));
    }
    c.bad_action = j.value("bad_action", c.bad_action);
    if (j.contains("dqn")) {
        reject_unknown(j.at("dqn"),
                       {"buffer_capacity", "batch_size", "learning_rate", "target_sync_period",
                        "epsilon_start", "epsilon_end", "epsilon_decay_steps", "training_steps",
                        "gamma", "hidden", "learn_start", "eval_every", "eval_episodes",
                        "stop_return"},
                       "dqn.");
        c.dqn = DqnConfig::from_json(j.at("dqn"));
    }
    if (j.contains("attack")) c.attack = AttackRunConfig::from_json(j.at("attack"));
    if (j.contains("baselines")) {
        reject_unknown(j.at("baselines"),
                       {"neighbourhood_penalty", "minmax_r_max", "minmax_r_min", "random_bound"},
                       "baselines.");
        c.baselines = BaselineParams::from_json(j.at("baselines"));
    }
    if (j.contains("eval")) c.eval = EvalConfig::from_json(j.at("eval"));
    if (j.contains("tabular")) {
        for (const auto& t : j.at("tabular")) c.tabular.push_back(TabularInstance::from_json(t));
    }
    if (j.contains("run")) {
        const auto& r = j.at("run");
        reject_unknown(r, {"out_dir", "seeds"}, "run.");
        c.out_dir = r.value("out_dir", c.out_dir);
        c.seeds = r.value("seeds", c.seeds);
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("config: parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

std::uint64_t ExperimentConfig::config_hash() const {
    const std::string s = to_json().dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace rlbd
