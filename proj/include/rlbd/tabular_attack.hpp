#pragma once

#include <json.hpp>

#include "rlbd/mdp.hpp"

namespace rlbd {

struct TabularAttackSolution {
    QTable delta;
    QTable qbar;
    double objective = 0.0;
    long iterations = 0;

    nlohmann::json to_json() const;
    static TabularAttackSolution from_json(const nlohmann::json& j);
};

// Closed-form optimum of the lower-level fit: for every (s,a),
//   Delta[s][a] = Qbar[s][a] - r(s,a) - gamma * sum_{s'} P(s'|s,a) Qbar[s'][pi(s')].
// By construction the pair (Delta, Qbar) then satisfies the Bellman equality
// under the poisoned rewards exactly.
QTable closed_form_delta(const QTable& qbar, const TabularMdp& mdp,
                         const DeterministicPolicy& target);

// Substituted objective
//   F(Qbar) = 1/2 sum (Delta*(Qbar))^2
//           + rho/2 sum_{s, a != pi_s} phi(Qbar[s][a] + eps - Qbar[s][pi_s])^2.
double penalty_objective(const QTable& qbar, const TabularMdp& mdp,
                         const DeterministicPolicy& target, double epsilon, double rho);

// Gradient descent with backtracking line search on F, starting from the
// policy evaluation of the target policy under the original rewards. The
// objective is convex, so the returned point is the global penalty optimum up
// to the gradient tolerance. Throws std::runtime_error on non-convergence.
TabularAttackSolution solve_exact(const TabularMdp& mdp, const DeterministicPolicy& target,
                                  double epsilon, double rho, double tol,
                                  long max_iterations = 200000);

}  // namespace rlbd
