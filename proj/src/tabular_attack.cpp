#include "rlbd/tabular_attack.hpp"

#include <cmath>
#include <stdexcept>

#include "rlbd/attacker.hpp"

namespace rlbd {

nlohmann::json TabularAttackSolution::to_json() const {
    return nlohmann::json{{"n_states", qbar.n_states},
                          {"n_actions", qbar.n_actions},
                          {"delta", delta.q},
                          {"qbar", qbar.q},
                          {"objective", objective},
                          {"iterations", iterations}};
}

TabularAttackSolution TabularAttackSolution::from_json(const nlohmann::json& j) {
    TabularAttackSolution sol;
    const int s = j.at("n_states").get<int>();
    const int a = j.at("n_actions").get<int>();
    sol.delta = QTable(s, a);
    sol.qbar = QTable(s, a);
    sol.delta.q = j.at("delta").get<std::vector<double>>();
    sol.qbar.q = j.at("qbar").get<std::vector<double>>();
    sol.objective = j.at("objective").get<double>();
    sol.iterations = j.at("iterations").get<long>();
    return sol;
}

QTable closed_form_delta(const QTable& qbar, const TabularMdp& mdp,
                         const DeterministicPolicy& target) {
    QTable delta(mdp.n_states, mdp.n_actions);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double exp_next = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                exp_next += mdp.p(s, a, s2) * qbar.at(s2, target(s2));
            }
            delta.at(s, a) = qbar.at(s, a) - mdp.r(s, a) - mdp.gamma * exp_next;
        }
    }
    return delta;
}

double penalty_objective(const QTable& qbar, const TabularMdp& mdp,
                         const DeterministicPolicy& target, double epsilon, double rho) {
    const QTable delta = closed_form_delta(qbar, mdp, target);
    double obj = 0.0;
    for (double d : delta.q) obj += 0.5 * d * d;
    for (int s = 0; s < mdp.n_states; ++s) {
        const int pi_s = target(s);
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (a == pi_s) continue;
            const double h = phi(qbar.at(s, a) + epsilon - qbar.at(s, pi_s));
            obj += 0.5 * rho * h * h;
        }
    }
    return obj;
}

// dF/dQbar: the Delta chain through the Bellman map plus the hinge terms.
static void penalty_gradient(const QTable& qbar, const TabularMdp& mdp,
                             const DeterministicPolicy& target, double epsilon, double rho,
                             const QTable& delta, QTable& grad) {
    std::fill(grad.q.begin(), grad.q.end(), 0.0);
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double d = delta.at(s, a);
            grad.at(s, a) += d;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                const double pr = mdp.p(s, a, s2);
                if (pr != 0.0) grad.at(s2, target(s2)) -= mdp.gamma * pr * d;
            }
        }
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        const int pi_s = target(s);
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (a == pi_s) continue;
            const double h = phi(qbar.at(s, a) + epsilon - qbar.at(s, pi_s));
            if (h > 0.0) {
                grad.at(s, a) += rho * h;
                grad.at(s, pi_s) -= rho * h;
            }
        }
    }
}

TabularAttackSolution solve_exact(const TabularMdp& mdp, const DeterministicPolicy& target,
                                  double epsilon, double rho, double tol, long max_iterations) {
    mdp.validate();
    if (epsilon <= 0 || rho <= 0 || tol <= 0) {
        throw std::invalid_argument("solve_exact: epsilon, rho and tol must be positive");
    }

    // Zero Bellman residual at the start: Qbar = Q^{pi_target} under the
    // original rewards, so Delta*(Qbar0) == 0.
    QTable x = policy_evaluation(mdp, target, 1e-12);
    QTable y = x;
    QTable x_new = x;
    QTable grad(mdp.n_states, mdp.n_actions);
    QTable delta(mdp.n_states, mdp.n_actions);

    auto objective = [&](const QTable& q) {
        return penalty_objective(q, mdp, target, epsilon, rho);
    };

    double fx = objective(x);
    QTable best = x;
    double f_best = fx;
    double step = 1.0;
    double momentum = 1.0;  // Nesterov extrapolation weight t_k
    long it = 0;
    bool converged = false;

    // Backtracked gradient descent with Nesterov momentum and a
    // gradient-direction restart. The penalty term makes the objective stiff
    // (curvature ~rho) while the distortion term is nearly flat along
    // discounted-value directions; the plain method crawls on that spectrum.
    for (; it < max_iterations; ++it) {
        delta = closed_form_delta(y, mdp, target);
        penalty_gradient(y, mdp, target, epsilon, rho, delta, grad);
        double gnorm2 = 0.0;
        for (double g : grad.q) gnorm2 += g * g;
        if (std::sqrt(gnorm2) <= tol) {
            const double fy = objective(y);
            if (fy < f_best) {
                best = y;
                f_best = fy;
            }
            converged = true;
            break;
        }

        const double fy = objective(y);
        double t = step * 2.0;
        bool moved = false;
        double ft = fy;
        for (int bt = 0; bt < 80; ++bt) {
            // Descent-lemma condition, i.e. t <= 1/L along the gradient.
            for (std::size_t i = 0; i < x_new.q.size(); ++i) {
                x_new.q[i] = y.q[i] - t * grad.q[i];
            }
            ft = objective(x_new);
            if (ft <= fy - 0.5 * t * gnorm2) {
                moved = true;
                break;
            }
            t *= 0.5;
        }
        // Progress below double-precision resolution of the objective.
        const bool stalled = t * gnorm2 <= 1e-15 * (std::abs(fy) + 1e-12);
        if (!moved || stalled) {
            if (momentum == 1.0) {
                converged = true;  // at the optimum up to floating-point precision
                break;
            }
            y = x;
            momentum = 1.0;
            continue;
        }
        step = t;

        if (ft < f_best) {
            best = x_new;
            f_best = ft;
        }
        double along = 0.0;
        for (std::size_t i = 0; i < grad.q.size(); ++i) {
            along += grad.q[i] * (x_new.q[i] - x.q[i]);
        }
        if (along > 0.0) {
            // Momentum points uphill; restart the acceleration from x.
            y = x;
            momentum = 1.0;
            continue;
        }
        const double momentum_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        const double mix = (momentum - 1.0) / momentum_new;
        for (std::size_t i = 0; i < y.q.size(); ++i) {
            y.q[i] = x_new.q[i] + mix * (x_new.q[i] - x.q[i]);
        }
        x = x_new;
        fx = ft;
        momentum = momentum_new;
    }
    if (!converged) {
        throw std::runtime_error("solve_exact: no convergence within iteration cap");
    }

    TabularAttackSolution sol;
    sol.qbar = best;
    sol.delta = closed_form_delta(best, mdp, target);
    sol.objective = f_best;
    sol.iterations = it;
    return sol;
}

}  // namespace rlbd
