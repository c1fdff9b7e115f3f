#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlbd/mdp.hpp"

namespace rlbd {

// Per-experiment results mirroring one row of the effectiveness table.
struct EvalReport {
    std::string env;
    std::string attacker;
    double epsilon = 0.0;
    double normal_activated = 0.0;
    double normal_inactive = 0.0;
    double poisoned_activated = 0.0;
    double poisoned_inactive = 0.0;
    double drop_activated_pct = 0.0;
    double drop_inactive_pct = 0.0;
    double intensity_global = 0.0;
    double intensity_triggered = 0.0;
    std::vector<std::uint64_t> seeds;

    nlohmann::json to_json() const;
};

// (normal - poisoned) / normal * 100; positive = degradation. Throws for
// normal == 0.
double performance_drop(double normal, double poisoned);

enum class IntensitySampler { global, triggered };

// Axis-aligned sampling box for the state space.
struct SampleBounds {
    std::vector<double> lo;
    std::vector<double> hi;
};

// Sum of squared reward deviations over uniformly sampled (state, action)
// pairs, normalised to a fixed reference sample count so runs of different
// n_samples are comparable. `deviation` maps a sampled pair to rbar - r.
double poisoning_intensity(const std::function<double(const State&, int)>& deviation,
                           IntensitySampler sampler, const SampleBounds& global_bounds,
                           const SampleBounds& triggered_bounds, int n_actions, int n_samples,
                           std::mt19937_64& rng, int reference_n = 1000);

std::string csv_header();
std::string csv_row(const std::string& env, const std::string& attacker, double epsilon,
                    std::uint64_t seed, const std::string& trigger_mode, double mean_return,
                    double drop_pct, double intensity_global, double intensity_triggered);

}  // namespace rlbd
