#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlbd/chain.hpp"
#include "rlbd/config.hpp"
#include "rlbd/eval.hpp"
#include "rlbd/oracle.hpp"
#include "rlbd/replay.hpp"
#include "rlbd/tabular_attack.hpp"

namespace rlbd {

std::string run_dir(const ExperimentConfig& cfg, std::uint64_t seed);
std::string normal_checkpoint_path(const ExperimentConfig& cfg, std::uint64_t seed);
std::string poisoned_checkpoint_path(const ExperimentConfig& cfg, std::uint64_t seed,
                                     const std::string& attacker, double epsilon);
std::string attacker_checkpoint_path(const ExperimentConfig& cfg, std::uint64_t seed,
                                     const std::string& attacker, double epsilon);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// Reproduction manifest for a command invocation.
void write_manifest(const ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::uint64_t>& seeds);

struct TrainSummary {
    double final_return = 0.0;
    long env_steps = 0;
    std::string checkpoint;
};

// Trains a clean CartPole agent and writes checkpoint + metadata sidecar.
TrainSummary train_normal(const ExperimentConfig& cfg, std::uint64_t seed);

struct PoisonSummary {
    TrainSummary train;
    ReplayBuffer::AuditResult audit;
    double mean_abs_delta_tail = 0.0;  // |rbar - r| over the most recent poisoned transitions
    std::string attacker_checkpoint;   // proposed attacker only
};

// Interleaved victim/attacker training with the selected attacker
// ("proposed", "neighbourhood", "minmax", "random", "none"). Requires the
// normal checkpoint for the same seed; throws std::runtime_error otherwise.
PoisonSummary train_poisoned(const ExperimentConfig& cfg, std::uint64_t seed,
                             const std::string& attacker,
                             std::optional<double> epsilon_override = std::nullopt);

// Evaluates the stored normal and poisoned agents for every seed in both
// trigger modes and fills an EvalReport (plus intensity values computed from
// the first seed's poisoning map).
EvalReport run_table1_row(const ExperimentConfig& cfg, const std::string& attacker, double epsilon,
                          const std::vector<std::uint64_t>& seeds);

// Full train + eval per epsilon per seed; returns the aggregated CSV and
// writes sweep.csv plus a JSON report mirror. Throws on an empty list.
std::string sweep_epsilon(const ExperimentConfig& cfg, const std::vector<double>& epsilon_list,
                          const std::string& attacker = "proposed");

struct VerifyOutcome {
    bool all_pass = false;
    bool any_infeasible = false;
    nlohmann::json report;
};

// Runs solve_exact and the grid-search oracle over the configured chain
// instances, emits verify_backdoor reports, and cross-checks the two
// objectives. All checks are reported; nothing throws on a failed check.
VerifyOutcome verify_tabular(const ExperimentConfig& cfg);

// -- chain-MDP poisoned training (neural attacker on a tabular victim) ------

struct ChainAttackResult {
    double mean_abs_delta_tail = 0.0;  // mean |Delta| over the last `tail` visited pairs
    QTable victim_q;
    nlohmann::json attacker_checkpoint;
};

// With uniform_coverage the attacker's batches come from exploring starts
// ((s,a) uniform, s' sampled from the model) instead of the victim's own
// trajectory; the stochastic fixed point then matches the unweighted exact
// solver rather than a visitation-weighted variant.
ChainAttackResult run_chain_attack(const TabularMdp& mdp, const TriggerSpec& trigger,
                                   int bad_action, const AttackConfig& attack_cfg,
                                   std::uint64_t seed, long env_steps, int chunk, double victim_lr,
                                   int tail = 10000, int horizon = 40,
                                   bool uniform_coverage = false);

// Policy iteration to the optimal policy of a tabular MDP.
DeterministicPolicy optimal_policy(const TabularMdp& mdp, double tol = 1e-10);

}  // namespace rlbd
