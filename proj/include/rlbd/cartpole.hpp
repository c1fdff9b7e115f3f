#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "rlbd/mdp.hpp"

namespace rlbd {

struct CartPoleState {
    double x = 0.0;          // cart position (m)
    double x_dot = 0.0;      // cart velocity (m/s)
    double theta = 0.0;      // pole angle (rad)
    double theta_dot = 0.0;  // pole angular velocity (rad/s)

    std::vector<double> to_vector() const { return {x, x_dot, theta, theta_dot}; }
    static CartPoleState from_vector(const std::vector<double>& v) {
        return {v[0], v[1], v[2], v[3]};
    }
};

// Canonical benchmark constants.
namespace cartpole {
constexpr double kGravity = 9.8;
constexpr double kMassCart = 1.0;
constexpr double kMassPole = 0.1;
constexpr double kTotalMass = kMassCart + kMassPole;
constexpr double kHalfLength = 0.5;
constexpr double kPoleMassLength = kMassPole * kHalfLength;
constexpr double kForceMag = 10.0;
constexpr double kTau = 0.02;
constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
constexpr double kXThreshold = 2.4;
constexpr int kMaxEpisodeSteps = 500;
}  // namespace cartpole

struct CartPoleStepResult {
    CartPoleState state;
    double reward = 0.0;
    bool done = false;
};

// Pure Euler-integrated dynamics for one step; no hidden state. `done` here
// reflects only the physics bounds, not the step limit.
CartPoleStepResult cartpole_dynamics(const CartPoleState& s, int action);

struct CoordinateOverride {
    int coord = 0;
    double value = 0.0;
};

struct EpisodeOutcome {
    double total_reward = 0.0;
    int steps = 0;
    bool terminated_unhealthy = false;  // physics bound hit (vs. step limit)
};

// Episode-managing wrapper: owns the RNG and the step counter. Dynamics stay
// in cartpole_dynamics.
class CartPoleEnv {
  public:
    explicit CartPoleEnv(std::uint64_t seed) : rng_(seed) {}

    // Uniform per-coordinate init on [-0.05, 0.05], then the override (if any).
    CartPoleState reset(std::optional<CoordinateOverride> init_override = std::nullopt);

    // Throws std::logic_error when stepping a finished episode.
    CartPoleStepResult step(int action);

    const CartPoleState& state() const { return state_; }
    int steps_taken() const { return steps_; }
    bool done() const { return done_; }

  private:
    std::mt19937_64 rng_;
    CartPoleState state_;
    int steps_ = 0;
    bool done_ = true;
};

}  // namespace rlbd
