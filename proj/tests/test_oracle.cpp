#include <doctest.h>

#include <cmath>

#include "rlbd/chain.hpp"
#include "rlbd/experiment.hpp"
#include "rlbd/oracle.hpp"
#include "rlbd/tabular_attack.hpp"

using namespace rlbd;

namespace {

struct ChainCase {
    TabularMdp mdp;
    DeterministicPolicy target;
};

ChainCase backdoored_chain(int n_states) {
    ChainCase c{make_chain_mdp(n_states, 0.0, 0.9), {}};
    DeterministicPolicy normal = optimal_policy(c.mdp);
    TriggerSpec trig;
    trig.tabular_member.assign(n_states, 0);
    trig.tabular_member[n_states - 1] = 1;
    c.target = make_target_policy_table(normal, trig, 0);
    return c;
}

}  // namespace

TEST_CASE("grid search never beats the feasible zero-distortion point") {
    // Target already optimal with margin: Qbar = Q^{pi} evaluates to ~0
    // objective, which lower-bounds every lattice point.
    TabularMdp mdp = make_chain_mdp(2, 0.0, 0.9);
    DeterministicPolicy target = optimal_policy(mdp);
    QTable q_pi = policy_evaluation(mdp, target, 1e-12);
    const double feasible = penalty_objective(q_pi, mdp, target, 0.5, 200.0);
    GridSearchResult res = grid_search_solve(mdp, target, 0.5, 200.0, 15.0, 1.0);
    CHECK(feasible <= res.best_objective + 1e-9);
    CHECK(res.best_objective < 0.5);  // the lattice gets close to zero
}

TEST_CASE("grid search refinement is monotone in resolution") {
    ChainCase c = backdoored_chain(2);
    GridSearchResult coarse = grid_search_solve(c.mdp, c.target, 0.5, 200.0, 12.0, 2.0);
    GridSearchResult fine = grid_search_solve(c.mdp, c.target, 0.5, 200.0, 12.0, 0.2);
    // A 10x finer lattice contains the coarse one.
    CHECK(fine.best_objective <= coarse.best_objective + 1e-12);
    // And the refinement never worsens the coarse stage's own optimum.
    CHECK(coarse.best_objective <= coarse.coarse_objective + 1e-12);
    CHECK(fine.best_objective <= fine.coarse_objective + 1e-12);
}

TEST_CASE("grid search cross-validates the exact solver on a 2-state chain") {
    ChainCase c = backdoored_chain(2);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-8);
    GridSearchResult grid = grid_search_solve(c.mdp, c.target, 0.5, 200.0, 12.0, 0.2);
    const double gap = std::abs(sol.objective - grid.best_objective) /
                       std::max(grid.best_objective, 1e-12);
    CHECK(gap <= 0.02);
}

TEST_CASE("grid search enforces the dimensionality cap") {
    TabularMdp big = make_chain_mdp(4, 0.0, 0.9);  // 8 dims
    DeterministicPolicy pi{{1, 1, 1, 1}};
    CHECK_THROWS_AS(grid_search_solve(big, pi, 0.5, 200.0, 5.0, 1.0), std::invalid_argument);
}

TEST_CASE("verify_backdoor passes on a converged exact solution") {
    ChainCase c = backdoored_chain(2);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 20000.0, 1e-9);
    BackdoorReport rep = verify_backdoor(sol.qbar, c.target, 0.5, c.mdp, sol.delta);
    CHECK(rep.greedy_matches);
    CHECK(rep.margins_pass);
    CHECK(rep.residual_pass);
    CHECK(rep.pass);
    CHECK(rep.delta_sq_norm > 0.0);
}

TEST_CASE("verify_backdoor flags the unpoisoned baseline") {
    ChainCase c = backdoored_chain(2);
    QTable clean_q = policy_evaluation(c.mdp, optimal_policy(c.mdp), 1e-10);
    QTable zero_delta(c.mdp.n_states, c.mdp.n_actions, 0.0);
    BackdoorReport rep = verify_backdoor(clean_q, c.target, 0.5, c.mdp, zero_delta);
    CHECK_FALSE(rep.greedy_matches);
    // the triggered state is exactly where the match fails
    CHECK(rep.mismatched_states == std::vector<int>{1});
}

TEST_CASE("verify_backdoor localises a corrupted entry") {
    ChainCase c = backdoored_chain(3);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-8);
    sol.qbar.at(1, 0) += 0.37;  // fault injection
    BackdoorReport rep = verify_backdoor(sol.qbar, c.target, 0.5, c.mdp, sol.delta);
    CHECK_FALSE(rep.residual_pass);
    CHECK(rep.worst_state == 1);
    CHECK(rep.worst_action == 0);
}

TEST_CASE("verify_backdoor never mutates its inputs") {
    ChainCase c = backdoored_chain(2);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-8);
    const std::vector<double> q_before = sol.qbar.q;
    const std::vector<double> d_before = sol.delta.q;
    verify_backdoor(sol.qbar, c.target, 0.5, c.mdp, sol.delta);
    CHECK(sol.qbar.q == q_before);
    CHECK(sol.delta.q == d_before);
}
