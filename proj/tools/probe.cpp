// Scratch probe for A2 instance tuning (not part of the deliverable surface).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rlbd/attacker.hpp"
#include "rlbd/chain.hpp"
#include "rlbd/experiment.hpp"
#include "rlbd/oracle.hpp"
#include "rlbd/tabular_attack.hpp"

using namespace rlbd;

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 2;
    double slip = argc > 2 ? std::atof(argv[2]) : 0.0;
    double rho = argc > 3 ? std::atof(argv[3]) : 200.0;
    double res = argc > 4 ? std::atof(argv[4]) : 0.25;
    double bounds = argc > 5 ? std::atof(argv[5]) : 0.0;
    std::string trig_states = argc > 6 ? argv[6] : std::string(1, char('0' + n - 1));
    double eps = 0.5;

    TabularMdp mdp = make_chain_mdp(n, slip, 0.9);
    DeterministicPolicy normal = optimal_policy(mdp);
    TriggerSpec trig;
    trig.tabular_member.assign(n, 0);
    for (char c : trig_states) trig.tabular_member.at(c - '0') = 1;
    DeterministicPolicy target = make_target_policy_table(normal, trig, 0);

    if (bounds <= 0) {
        QTable qstar = policy_evaluation(mdp, normal, 1e-10);
        double qmax = 0;
        for (double v : qstar.q) qmax = std::max(qmax, std::abs(v));
        bounds = 1.5 * qmax;
    }

    auto t0 = std::chrono::steady_clock::now();
    TabularAttackSolution sol = solve_exact(mdp, target, eps, rho, 1e-7, 500000);
    auto t1 = std::chrono::steady_clock::now();
    MarginReport rep = margin_check(sol.qbar, target, eps);
    std::printf("solver: f=%.8f iters=%ld time=%.2fs min_margin=%.6f violation=%.2e\n",
                sol.objective, sol.iterations,
                std::chrono::duration<double>(t1 - t0).count(), rep.min_margin,
                eps - rep.min_margin);

    BackdoorReport ver = verify_backdoor(sol.qbar, target, eps, mdp, sol.delta);
    std::printf("verify: greedy=%d margins=%d residual=%d (min_margin=%.6f resid=%.2e)\n",
                ver.greedy_matches, ver.margins_pass, ver.residual_pass, ver.min_margin,
                ver.max_bellman_residual);

    auto t2 = std::chrono::steady_clock::now();
    GridSearchResult grid = grid_search_solve(mdp, target, eps, rho, bounds, res);
    auto t3 = std::chrono::steady_clock::now();
    const double gap = std::abs(sol.objective - grid.best_objective) /
                       std::max(grid.best_objective, 1e-12);
    std::printf(
        "grid:   f=%.8f (coarse %.8f) evals=%ld time=%.2fs bounds=%.1f res=%.3f rel_gap=%.4f %s\n",
        grid.best_objective, grid.coarse_objective, grid.evaluations,
        std::chrono::duration<double>(t3 - t2).count(), bounds, res, gap,
        gap <= 0.02 ? "PASS" : "FAIL");
    return 0;
}
