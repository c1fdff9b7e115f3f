// Experiment driver: clean training, poisoned training, epsilon sweeps, and
// the tabular verification job.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rlbd/experiment.hpp"

using namespace rlbd;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::string attacker = "proposed";
    double epsilon = -1.0;  // <0: keep the config value
    int episodes = 0;       // 0: keep the config value
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "experiment config file (JSON)")
        ->envname("RLBD_CONFIG");
    cmd->add_option("--seed",
                    [&o](const std::vector<std::string>& v) {
                        o.seeds = {std::stoull(v.back())};
                        return true;
                    },
                    "single run seed")
        ->envname("RLBD_SEED");
    cmd->add_option("--seeds", o.seeds, "run seeds")->delimiter(',')->envname("RLBD_SEEDS");
    cmd->add_option("--out", o.out_dir, "output directory")->envname("RLBD_OUT");
    cmd->add_option("--attacker", o.attacker, "proposed|neighbourhood|minmax|random|none")
        ->envname("RLBD_ATTACKER");
    cmd->add_option("--epsilon", o.epsilon, "poison intensity margin")->envname("RLBD_EPSILON");
    cmd->add_option("--episodes", o.episodes, "evaluation episodes")->envname("RLBD_EPISODES");
}

ExperimentConfig resolve_config(const CommonOpts& o) {
    ExperimentConfig cfg = o.config_path.empty()
                               ? ExperimentConfig::from_json(nlohmann::json::object())
                               : ExperimentConfig::load_file(o.config_path);
    if (!o.seeds.empty()) cfg.seeds = o.seeds;
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    if (o.epsilon > 0) cfg.attack.core.epsilon = o.epsilon;
    if (o.episodes > 0) cfg.eval.episodes = o.episodes;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-poisoning backdoor laboratory"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto* train_normal_cmd = app.add_subcommand("train-normal", "train a clean agent");
    auto* train_poisoned_cmd =
        app.add_subcommand("train-poisoned", "train a victim against an attacker");
    auto* sweep_cmd = app.add_subcommand("sweep-epsilon", "train + evaluate across epsilons");
    auto* verify_cmd =
        app.add_subcommand("verify-tabular", "exact solver vs. brute-force oracle checks");
    std::vector<double> epsilon_list;
    sweep_cmd->add_option("--epsilons", epsilon_list, "epsilon values")->delimiter(',');
    for (auto* cmd : {train_normal_cmd, train_poisoned_cmd, sweep_cmd, verify_cmd}) {
        add_common(cmd, opts);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = resolve_config(opts);

        if (train_normal_cmd->parsed()) {
            write_manifest(cfg, "train-normal", cfg.seeds);
            bool converged = true;
            for (std::uint64_t seed : cfg.seeds) {
                TrainSummary s = train_normal(cfg, seed);
                std::printf("train-normal seed=%llu steps=%ld return=%.1f -> %s\n",
                            static_cast<unsigned long long>(seed), s.env_steps, s.final_return,
                            s.checkpoint.c_str());
                converged = converged && s.final_return >= 400.0;
            }
            if (!converged) {
                std::fprintf(stderr, "train-normal: a run finished below the 400-return bar\n");
                return 3;
            }
            return 0;
        }

        if (train_poisoned_cmd->parsed()) {
            write_manifest(cfg, "train-poisoned", cfg.seeds);
            std::optional<double> eps;
            if (opts.epsilon > 0) eps = opts.epsilon;
            bool audits_clean = true;
            for (std::uint64_t seed : cfg.seeds) {
                PoisonSummary s = train_poisoned(cfg, seed, opts.attacker, eps);
                std::printf(
                    "train-poisoned seed=%llu attacker=%s steps=%ld return=%.1f audit=%s\n",
                    static_cast<unsigned long long>(seed), opts.attacker.c_str(),
                    s.train.env_steps, s.train.final_return, s.audit.clean ? "clean" : "VIOLATED");
                audits_clean = audits_clean && s.audit.clean;
            }
            return audits_clean ? 0 : 3;
        }

        if (sweep_cmd->parsed()) {
            if (epsilon_list.empty()) {
                std::fprintf(stderr, "sweep-epsilon: --epsilons must be non-empty\n");
                return 1;
            }
            std::string csv = sweep_epsilon(cfg, epsilon_list, opts.attacker);
            std::fputs(csv.c_str(), stdout);
            return 0;
        }

        if (verify_cmd->parsed()) {
            write_manifest(cfg, "verify-tabular", cfg.seeds);
            if (cfg.tabular.empty()) {
                cfg.tabular = {TabularInstance{}, [] {
                                   TabularInstance t;
                                   t.n_states = 3;
                                   t.trigger_states = {1, 2};
                                   return t;
                               }()};
            }
            VerifyOutcome out = verify_tabular(cfg);
            write_json_file(cfg.out_dir + "/" + cfg.name + "/verify.json", out.report);
            for (const auto& inst : out.report.at("instances")) {
                std::printf("verify n_states=%d rel_gap=%.4f margins=%s residual=%s %s%s\n",
                            inst.at("instance").at("n_states").get<int>(),
                            inst.at("objective_rel_gap").get<double>(),
                            inst.at("verify").at("margins_pass").get<bool>() ? "ok" : "FAIL",
                            inst.at("verify").at("residual_pass").get<bool>() ? "ok" : "FAIL",
                            inst.at("pass").get<bool>() ? "PASS" : "FAIL",
                            inst.at("penalty_infeasible").get<bool>() ? " (penalty-infeasible)"
                                                                      : "");
            }
            return out.all_pass ? 0 : 3;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
