#include "rlbd/baselines.hpp"

#include <stdexcept>

namespace rlbd {

double neighbourhood_poison(const Transition& t, const TargetPolicy& tp, double penalty) {
    if (penalty < 0) throw std::invalid_argument("neighbourhood_poison: penalty must be >= 0");
    if (!is_triggered(t.state, tp.trigger)) return t.reward;
    if (t.action == tp(t.state)) return t.reward;
    return t.reward - penalty;
}

double minmax_poison(const Transition& t, const TargetPolicy& tp, double r_max, double r_min) {
    if (!(r_max > r_min)) throw std::invalid_argument("minmax_poison: r_max must exceed r_min");
    if (!is_triggered(t.state, tp.trigger)) return t.reward;
    return t.action == tp(t.state) ? r_max : r_min;
}

double random_poison(const Transition& t, const TargetPolicy& tp, double bound,
                     std::mt19937_64& rng) {
    if (bound <= 0) throw std::invalid_argument("random_poison: bound must be positive");
    if (!is_triggered(t.state, tp.trigger)) return t.reward;
    std::uniform_real_distribution<double> u(0.0, bound);
    return t.action == tp(t.state) ? t.reward + u(rng) : t.reward - u(rng);
}

nlohmann::json BaselineParams::to_json() const {
    return nlohmann::json{{"neighbourhood_penalty", neighbourhood_penalty},
                          {"minmax_r_max", minmax_r_max},
                          {"minmax_r_min", minmax_r_min},
                          {"random_bound", random_bound}};
}

BaselineParams BaselineParams::from_json(const nlohmann::json& j) {
    BaselineParams p;
    p.neighbourhood_penalty = j.value("neighbourhood_penalty", p.neighbourhood_penalty);
    p.minmax_r_max = j.value("minmax_r_max", p.minmax_r_max);
    p.minmax_r_min = j.value("minmax_r_min", p.minmax_r_min);
    p.random_bound = j.value("random_bound", p.random_bound);
    return p;
}

}  // namespace rlbd
