#include <doctest.h>

#include <cmath>

#include "rlbd/chain.hpp"
#include "rlbd/experiment.hpp"
#include "rlbd/mdp.hpp"
#include "rlbd/oracle.hpp"
#include "rlbd/tabular_attack.hpp"

using namespace rlbd;

namespace {

// Chain with the last state triggered and "left" as the bad action: the
// target policy is genuinely suboptimal there, so a nonzero attack is needed.
struct ChainCase {
    TabularMdp mdp;
    DeterministicPolicy target;
};

ChainCase triggered_chain(int n_states, double slip = 0.0, double gamma = 0.9) {
    ChainCase c{make_chain_mdp(n_states, slip, gamma), {}};
    DeterministicPolicy normal = optimal_policy(c.mdp);
    TriggerSpec trig;
    trig.tabular_member.assign(n_states, 0);
    trig.tabular_member[n_states - 1] = 1;
    c.target = make_target_policy_table(normal, trig, 0);
    return c;
}

}  // namespace

TEST_CASE("closed-form delta vanishes at the Bellman fixed point") {
    ChainCase c = triggered_chain(3);
    QTable qbar = policy_evaluation(c.mdp, c.target, 1e-12);
    QTable delta = closed_form_delta(qbar, c.mdp, c.target);
    for (double d : delta.q) CHECK(std::abs(d) < 1e-9);
}

TEST_CASE("closed-form delta on a constant table with zero rewards") {
    TabularMdp m = make_chain_mdp(3, 0.0, 0.9);
    std::fill(m.reward.begin(), m.reward.end(), 0.0);
    DeterministicPolicy pi{{1, 1, 1}};
    QTable qbar(3, 2, 4.0);  // constant c
    QTable delta = closed_form_delta(qbar, m, pi);
    for (double d : delta.q) CHECK(d == doctest::Approx(4.0 * (1.0 - 0.9)));
}

TEST_CASE("closed-form delta matches per-entry hand expansion") {
    TabularMdp m = make_chain_mdp(3, 0.2, 0.9);
    DeterministicPolicy pi{{1, 0, 1}};
    QTable qbar(3, 2);
    double v = 0.3;
    for (auto& q : qbar.q) {
        q = v;
        v = std::fmod(v * 1.7 + 0.9, 3.0);
    }
    QTable delta = closed_form_delta(qbar, m, pi);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) {
            double boot = 0.0;
            for (int s2 = 0; s2 < 3; ++s2) boot += m.p(s, a, s2) * qbar.at(s2, pi(s2));
            CHECK(delta.at(s, a) ==
                  doctest::Approx(qbar.at(s, a) - m.r(s, a) - 0.9 * boot).epsilon(1e-12));
        }
    }
}

TEST_CASE("solve_exact returns zero distortion when the target is already optimal") {
    TabularMdp mdp = make_chain_mdp(2, 0.0, 0.9);
    DeterministicPolicy target = optimal_policy(mdp);  // margins 0.9 > eps
    TabularAttackSolution sol = solve_exact(mdp, target, 0.5, 200.0, 1e-8);
    CHECK(sol.objective <= 1e-8);
    for (double d : sol.delta.q) CHECK(std::abs(d) <= 1e-3);
}

TEST_CASE("solve_exact output always satisfies the Bellman equality") {
    ChainCase c = triggered_chain(3);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-6);
    // Residual under r + delta is zero by construction via the closed form.
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) {
            double boot = 0.0;
            for (int s2 = 0; s2 < 3; ++s2) {
                boot += c.mdp.p(s, a, s2) * sol.qbar.at(s2, c.target(s2));
            }
            const double resid = sol.qbar.at(s, a) - (c.mdp.r(s, a) + sol.delta.at(s, a)) -
                                 c.mdp.gamma * boot;
            CHECK(std::abs(resid) < 1e-10);
        }
    }
}

TEST_CASE("solve_exact installs the backdoor on a 2-state chain") {
    ChainCase c = triggered_chain(2);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-6);
    CHECK(greedy_policy(sol.qbar).action_of == c.target.action_of);
    MarginReport rep = margin_check(sol.qbar, c.target, 0.5);
    CHECK(rep.min_margin >= 0.5 - 1e-2);
    CHECK(sol.objective > 0.0);
}

TEST_CASE("increasing rho never worsens the maximum margin violation") {
    ChainCase c = triggered_chain(2);
    double prev_violation = 1e18;
    for (double rho : {20.0, 200.0, 2000.0}) {
        TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, rho, 1e-7);
        MarginReport rep = margin_check(sol.qbar, c.target, 0.5);
        const double violation = std::max(0.0, 0.5 - rep.min_margin);
        CHECK(violation <= prev_violation + 1e-9);
        prev_violation = violation;
    }
}

TEST_CASE("scaling rewards and epsilon scales the optimal distortion") {
    ChainCase c = triggered_chain(2);
    TabularAttackSolution base = solve_exact(c.mdp, c.target, 0.5, 2000.0, 1e-9);

    const double scale = 3.0;
    TabularMdp scaled = c.mdp;
    for (auto& r : scaled.reward) r *= scale;
    TabularAttackSolution big = solve_exact(scaled, c.target, 0.5 * scale, 2000.0, 1e-9);

    for (std::size_t i = 0; i < base.delta.q.size(); ++i) {
        CHECK(big.delta.q[i] == doctest::Approx(scale * base.delta.q[i]).epsilon(5e-3));
    }
}

TEST_CASE("solution JSON round-trips") {
    ChainCase c = triggered_chain(2);
    TabularAttackSolution sol = solve_exact(c.mdp, c.target, 0.5, 200.0, 1e-6);
    TabularAttackSolution back = TabularAttackSolution::from_json(sol.to_json());
    CHECK(back.objective == sol.objective);
    CHECK(back.qbar.q == sol.qbar.q);
    CHECK(back.delta.q == sol.delta.q);
}
