#include "rlbd/eval.hpp"

#include <cstdio>
#include <stdexcept>

namespace rlbd {

double performance_drop(double normal, double poisoned) {
    if (normal == 0.0) throw std::invalid_argument("performance_drop: normal return is zero");
    return (normal - poisoned) / normal * 100.0;
}

double poisoning_intensity(const std::function<double(const State&, int)>& deviation,
                           IntensitySampler sampler, const SampleBounds& global_bounds,
                           const SampleBounds& triggered_bounds, int n_actions, int n_samples,
                           std::mt19937_64& rng, int reference_n) {
    if (n_samples < 1) throw std::invalid_argument("poisoning_intensity: n_samples must be >= 1");
    const SampleBounds& b =
        sampler == IntensitySampler::global ? global_bounds : triggered_bounds;
    if (b.lo.size() != b.hi.size() || b.lo.empty()) {
        throw std::invalid_argument("poisoning_intensity: bad sample bounds");
    }
    std::uniform_int_distribution<int> action_dist(0, n_actions - 1);
    double sum = 0.0;
    std::vector<double> f(b.lo.size());
    for (int i = 0; i < n_samples; ++i) {
        for (std::size_t c = 0; c < f.size(); ++c) {
            f[c] = std::uniform_real_distribution<double>(b.lo[c], b.hi[c])(rng);
        }
        const double dev = deviation(State{f}, action_dist(rng));
        sum += dev * dev;
    }
    return sum * static_cast<double>(reference_n) / static_cast<double>(n_samples);
}

nlohmann::json EvalReport::to_json() const {
    return nlohmann::json{{"env", env},
                          {"attacker", attacker},
                          {"epsilon", epsilon},
                          {"normal_activated", normal_activated},
                          {"normal_inactive", normal_inactive},
                          {"poisoned_activated", poisoned_activated},
                          {"poisoned_inactive", poisoned_inactive},
                          {"drop_activated_pct", drop_activated_pct},
                          {"drop_inactive_pct", drop_inactive_pct},
                          {"intensity_global", intensity_global},
                          {"intensity_triggered", intensity_triggered},
                          {"seeds", seeds}};
}

std::string csv_header() {
    return "env,attacker,epsilon,seed,trigger_mode,mean_return,drop_pct,intensity_global,"
           "intensity_triggered\n";
}

std::string csv_row(const std::string& env, const std::string& attacker, double epsilon,
                    std::uint64_t seed, const std::string& trigger_mode, double mean_return,
                    double drop_pct, double intensity_global, double intensity_triggered) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%s,%s,%.6g,%llu,%s,%.6f,%.6f,%.6f,%.6f\n", env.c_str(),
                  attacker.c_str(), epsilon, static_cast<unsigned long long>(seed),
                  trigger_mode.c_str(), mean_return, drop_pct, intensity_global,
                  intensity_triggered);
    return buf;
}

}  // namespace rlbd
