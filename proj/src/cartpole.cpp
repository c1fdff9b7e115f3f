#include "rlbd/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace rlbd {

CartPoleStepResult cartpole_dynamics(const CartPoleState& s, int action) {
    using namespace cartpole;
    if (action != 0 && action != 1) throw std::invalid_argument("cartpole: action must be 0 or 1");

    const double force = action == 1 ? kForceMag : -kForceMag;
    const double cos_t = std::cos(s.theta);
    const double sin_t = std::sin(s.theta);

    const double temp = (force + kPoleMassLength * s.theta_dot * s.theta_dot * sin_t) / kTotalMass;
    const double theta_acc = (kGravity * sin_t - cos_t * temp) /
                             (kHalfLength * (4.0 / 3.0 - kMassPole * cos_t * cos_t / kTotalMass));
    const double x_acc = temp - kPoleMassLength * theta_acc * cos_t / kTotalMass;

    CartPoleState n;
    n.x = s.x + kTau * s.x_dot;
    n.x_dot = s.x_dot + kTau * x_acc;
    n.theta = s.theta + kTau * s.theta_dot;
    n.theta_dot = s.theta_dot + kTau * theta_acc;

    const bool unhealthy = n.x < -kXThreshold || n.x > kXThreshold ||
                           n.theta < -kThetaThreshold || n.theta > kThetaThreshold;
    return {n, 1.0, unhealthy};
}

CartPoleState CartPoleEnv::reset(std::optional<CoordinateOverride> init_override) {
    std::uniform_real_distribution<double> dist(-0.05, 0.05);
    state_.x = dist(rng_);
    state_.x_dot = dist(rng_);
    state_.theta = dist(rng_);
    state_.theta_dot = dist(rng_);
    if (init_override) {
        auto v = state_.to_vector();
        if (init_override->coord < 0 || init_override->coord >= 4) {
            throw std::out_of_range("cartpole reset: override coordinate out of range");
        }
        if (std::abs(init_override->value) > 1e6) {
            throw std::invalid_argument("cartpole reset: override outside representable range");
        }
        v[init_override->coord] = init_override->value;
        state_ = CartPoleState::from_vector(v);
    }
    steps_ = 0;
    done_ = false;
    return state_;
}

CartPoleStepResult CartPoleEnv::step(int action) {
    if (done_) throw std::logic_error("cartpole: stepping a finished episode");
    CartPoleStepResult r = cartpole_dynamics(state_, action);
    state_ = r.state;
    ++steps_;
    if (steps_ >= cartpole::kMaxEpisodeSteps) r.done = true;
    done_ = r.done;
    return r;
}

}  // namespace rlbd
