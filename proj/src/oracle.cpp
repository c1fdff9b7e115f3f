#include "rlbd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rlbd {

namespace {

// Self-contained objective evaluation for the oracle. Deliberately written
// from the constraint formulas rather than reusing the solver's kernels.
struct ObjectiveEval {
    int S, A, d;
    double gamma, epsilon, rho;
    std::vector<double> rewards;         // [s*A+a]
    std::vector<int> pi;                 // target action per state
    std::vector<std::vector<std::pair<int, double>>> support;  // per (s,a): (s', p)

    explicit ObjectiveEval(const TabularMdp& mdp, const DeterministicPolicy& target,
                           double eps, double rho_in)
        : S(mdp.n_states), A(mdp.n_actions), d(S * A), gamma(mdp.gamma), epsilon(eps),
          rho(rho_in), rewards(mdp.reward), pi(target.action_of), support(d) {
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                for (int s2 = 0; s2 < S; ++s2) {
                    double p = mdp.p(s, a, s2);
                    if (p != 0.0) support[s * A + a].push_back({s2, p});
                }
            }
        }
    }

    double operator()(const double* q) const {
        double hinge_part = 0.0;
        for (int s = 0; s < S; ++s) {
            const double q_pi = q[s * A + pi[s]];
            for (int a = 0; a < A; ++a) {
                if (a == pi[s]) continue;
                const double gap = q[s * A + a] + epsilon - q_pi;
                if (gap > 0.0) hinge_part += gap * gap;
            }
        }
        double distortion_part = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                double boot = 0.0;
                for (const auto& [s2, p] : support[s * A + a]) boot += p * q[s2 * A + pi[s2]];
                const double resid = q[s * A + a] - rewards[s * A + a] - gamma * boot;
                distortion_part += resid * resid;
            }
        }
        return 0.5 * distortion_part + 0.5 * rho * hinge_part;
    }

    // Objective without the residual and hinge of the pair (skip_s, skip_a).
    // Valid only when skip_a != pi[skip_s]: that pair then feeds no other
    // term, so the remainder is independent of its coordinate.
    double all_but_inner(const double* q, int skip_s, int skip_a) const {
        double hinge_part = 0.0;
        for (int s = 0; s < S; ++s) {
            const double q_pi = q[s * A + pi[s]];
            for (int a = 0; a < A; ++a) {
                if (a == pi[s]) continue;
                if (s == skip_s && a == skip_a) continue;
                const double gap = q[s * A + a] + epsilon - q_pi;
                if (gap > 0.0) hinge_part += gap * gap;
            }
        }
        double distortion_part = 0.0;
        for (int s = 0; s < S; ++s) {
            for (int a = 0; a < A; ++a) {
                if (s == skip_s && a == skip_a) continue;
                double boot = 0.0;
                for (const auto& [s2, p] : support[s * A + a]) boot += p * q[s2 * A + pi[s2]];
                const double resid = q[s * A + a] - rewards[s * A + a] - gamma * boot;
                distortion_part += resid * resid;
            }
        }
        return 0.5 * distortion_part + 0.5 * rho * hinge_part;
    }
};

struct LatticeBest {
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> point;
    long evaluations = 0;
};

// Exhaustive scan over the product lattice given per-dimension value lists.
// Splits the first dimension across threads; merge order is fixed, so the
// result is deterministic.
//
// The innermost dimension is chosen as a non-target action (a != pi_s), so
// along it the objective reduces to
//   F(t) = F_rest + 1/2 (t - c1)^2 + rho/2 phi(t + c2)^2,
// with F_rest, c1, c2 fixed by the other coordinates. The inner loop then
// costs a few flops per lattice point instead of a full objective pass.
LatticeBest scan_lattice(const ObjectiveEval& eval, const std::vector<std::vector<double>>& values,
                         int inner_dim) {
    const int d = static_cast<int>(values.size());
    const int inner_s = inner_dim / eval.A;
    const int inner_a = inner_dim % eval.A;

    auto scan_range = [&](std::size_t lo, std::size_t hi, LatticeBest& out) {
        std::vector<double> q(d, 0.0);
        std::vector<std::size_t> idx(d, 0);
        // odometer over all dims except inner_dim, with dim 0 fixed per slice
        std::vector<int> outer;
        for (int i = 1; i < d; ++i) {
            if (i != inner_dim) outer.push_back(i);
        }
        for (std::size_t k0 = lo; k0 < hi; ++k0) {
            q[0] = values[0][k0];
            for (int i = 1; i < d; ++i) q[i] = values[i][0];
            std::fill(idx.begin(), idx.end(), 0);
            while (true) {
                // terms not involving the inner coordinate
                q[inner_dim] = 0.0;
                const double f_rest = eval.all_but_inner(q.data(), inner_s, inner_a);
                double boot = 0.0;
                for (const auto& [s2, p] : eval.support[inner_dim]) {
                    boot += p * q[s2 * eval.A + eval.pi[s2]];
                }
                const double c1 = eval.rewards[inner_dim] + eval.gamma * boot;
                const double c2 = eval.epsilon - q[inner_s * eval.A + eval.pi[inner_s]];
                for (double t : values[inner_dim]) {
                    const double resid = t - c1;
                    double f = f_rest + 0.5 * resid * resid;
                    const double gap = t + c2;
                    if (gap > 0.0) f += 0.5 * eval.rho * gap * gap;
                    ++out.evaluations;
                    if (f < out.objective) {
                        out.objective = f;
                        out.point = q;
                        out.point[inner_dim] = t;
                    }
                }
                int oi = static_cast<int>(outer.size()) - 1;
                while (oi >= 0) {
                    const int dim = outer[oi];
                    if (++idx[dim] < values[dim].size()) {
                        q[dim] = values[dim][idx[dim]];
                        break;
                    }
                    idx[dim] = 0;
                    q[dim] = values[dim][0];
                    --oi;
                }
                if (oi < 0) break;
            }
        }
    };

    unsigned n_threads = std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(values[0].size()));
    std::vector<LatticeBest> partial(n_threads);
    if (n_threads <= 1) {
        scan_range(0, values[0].size(), partial[0]);
    } else {
        std::vector<std::thread> pool;
        const std::size_t per = (values[0].size() + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t lo = t * per;
            const std::size_t hi = std::min(values[0].size(), lo + per);
            pool.emplace_back(scan_range, lo, hi, std::ref(partial[t]));
        }
        for (auto& th : pool) th.join();
    }
    LatticeBest best;
    for (const auto& p : partial) {
        best.evaluations += p.evaluations;
        if (p.objective < best.objective) {
            best.objective = p.objective;
            best.point = p.point;
        }
    }
    return best;
}

}  // namespace

GridSearchResult grid_search_solve(const TabularMdp& mdp, const DeterministicPolicy& target,
                                   double epsilon, double rho, double bounds, double resolution) {
    mdp.validate();
    const int d = mdp.n_states * mdp.n_actions;
    if (d > 6) throw std::invalid_argument("grid_search_solve: n_states * n_actions exceeds 6");
    if (bounds <= 0 || resolution <= 0) {
        throw std::invalid_argument("grid_search_solve: bounds and resolution must be positive");
    }

    ObjectiveEval eval(mdp, target, epsilon, rho);

    // Innermost odometer dimension: the highest-indexed non-target pair
    // (guaranteed to exist for n_actions >= 2, and never dimension 0).
    int inner_dim = -1;
    for (int s = mdp.n_states - 1; s >= 0 && inner_dim < 0; --s) {
        for (int a = mdp.n_actions - 1; a >= 0; --a) {
            if (a != target(s)) {
                inner_dim = s * mdp.n_actions + a;
                break;
            }
        }
    }
    if (inner_dim <= 0) throw std::invalid_argument("grid_search_solve: need n_actions >= 2");

    std::vector<double> axis;
    for (double v = -bounds; v <= bounds + 1e-12; v += resolution) axis.push_back(v);
    std::vector<std::vector<double>> values(d, axis);
    LatticeBest coarse = scan_lattice(eval, values, inner_dim);

    // One refinement around the best cell at 10x finer resolution.
    const double fine = resolution / 10.0;
    std::vector<std::vector<double>> fine_values(d);
    for (int i = 0; i < d; ++i) {
        for (int k = -10; k <= 10; ++k) {
            const double v = coarse.point[i] + k * fine;
            if (v >= -bounds - 1e-12 && v <= bounds + 1e-12) fine_values[i].push_back(v);
        }
    }
    LatticeBest refined = scan_lattice(eval, fine_values, inner_dim);

    GridSearchResult res;
    res.coarse_objective = coarse.objective;
    res.evaluations = coarse.evaluations + refined.evaluations;
    const LatticeBest& winner = refined.objective < coarse.objective ? refined : coarse;
    res.best_objective = winner.objective;
    res.best_qbar = QTable(mdp.n_states, mdp.n_actions);
    res.best_qbar.q = winner.point;
    return res;
}

BackdoorReport verify_backdoor(const QTable& qbar, const DeterministicPolicy& target,
                               double epsilon, const TabularMdp& mdp, const QTable& delta) {
    BackdoorReport rep;
    rep.greedy_matches = true;
    rep.min_margin = std::numeric_limits<double>::infinity();

    for (int s = 0; s < mdp.n_states; ++s) {
        // own argmax scan, lowest index wins ties
        int best = 0;
        for (int a = 1; a < mdp.n_actions; ++a) {
            if (qbar.at(s, a) > qbar.at(s, best)) best = a;
        }
        if (best != target(s)) {
            rep.greedy_matches = false;
            rep.mismatched_states.push_back(s);
        }
        double runner_up = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < mdp.n_actions; ++a) {
            if (a != target(s)) runner_up = std::max(runner_up, qbar.at(s, a));
        }
        rep.min_margin = std::min(rep.min_margin, qbar.at(s, target(s)) - runner_up);
    }

    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            double boot = 0.0;
            for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                boot += mdp.p(s, a, s2) * qbar.at(s2, target(s2));
            }
            const double resid =
                std::abs(qbar.at(s, a) - (mdp.r(s, a) + delta.at(s, a)) - mdp.gamma * boot);
            if (resid > rep.max_bellman_residual) {
                rep.max_bellman_residual = resid;
                rep.worst_state = s;
                rep.worst_action = a;
            }
        }
    }

    for (double dv : delta.q) rep.delta_sq_norm += dv * dv;

    rep.margins_pass = rep.min_margin >= epsilon - 1e-3;
    rep.residual_pass = rep.max_bellman_residual <= 1e-4;
    rep.pass = rep.greedy_matches && rep.margins_pass && rep.residual_pass;
    return rep;
}

nlohmann::json BackdoorReport::to_json() const {
    return nlohmann::json{{"greedy_matches", greedy_matches},
                          {"mismatched_states", mismatched_states},
                          {"min_margin", min_margin},
                          {"max_bellman_residual", max_bellman_residual},
                          {"worst_state", worst_state},
                          {"worst_action", worst_action},
                          {"delta_sq_norm", delta_sq_norm},
                          {"margins_pass", margins_pass},
                          {"residual_pass", residual_pass},
                          {"pass", pass}};
}

}  // namespace rlbd
