#include <doctest.h>

#include <random>

#include "rlbd/mdp.hpp"

using namespace rlbd;

namespace {

TabularMdp single_state_mdp(double r, double gamma) {
    TabularMdp m;
    m.n_states = 1;
    m.n_actions = 1;
    m.gamma = gamma;
    m.transition = {1.0};
    m.reward = {r};
    return m;
}

// 2-state MDP, action 0 = stay, action 1 = switch state. Rewards depend on
// the state only.
TabularMdp two_state_mdp(double r0, double r1, double gamma) {
    TabularMdp m;
    m.n_states = 2;
    m.n_actions = 2;
    m.gamma = gamma;
    m.transition.assign(8, 0.0);
    m.p(0, 0, 0) = 1.0;
    m.p(0, 1, 1) = 1.0;
    m.p(1, 0, 1) = 1.0;
    m.p(1, 1, 0) = 1.0;
    m.reward = {r0, r0, r1, r1};
    return m;
}

// Independent Monte-Carlo estimate of Q(s,a) under the policy: sampled
// rollouts of fixed depth, discounted sum averaged over repeats.
double mc_q_estimate(const TabularMdp& mdp, const DeterministicPolicy& pi, int s0, int a0,
                     int rollouts, int depth, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto sample_next = [&](int s, int a) {
        double x = u(rng);
        double acc = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) {
            acc += mdp.p(s, a, s2);
            if (x <= acc) return s2;
        }
        return mdp.n_states - 1;
    };
    double total = 0.0;
    for (int r = 0; r < rollouts; ++r) {
        int s = s0;
        int a = a0;
        double ret = 0.0;
        double disc = 1.0;
        for (int t = 0; t < depth; ++t) {
            ret += disc * mdp.r(s, a);
            disc *= mdp.gamma;
            s = sample_next(s, a);
            a = pi(s);
        }
        total += ret;
    }
    return total / rollouts;
}

}  // namespace

TEST_CASE("policy evaluation: geometric series on a single state") {
    TabularMdp m = single_state_mdp(1.0, 0.9);
    DeterministicPolicy pi{{0}};
    QTable q = policy_evaluation(m, pi, 1e-8);
    CHECK(q.at(0, 0) == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("policy evaluation: zero rewards give the zero fixed point") {
    TabularMdp m = two_state_mdp(0.0, 0.0, 0.7);
    DeterministicPolicy pi{{0, 0}};
    QTable q = policy_evaluation(m, pi, 1e-10);
    for (double v : q.q) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("policy evaluation matches a Monte-Carlo rollout oracle") {
    TabularMdp m = two_state_mdp(1.0, 0.0, 0.5);
    DeterministicPolicy stay{{0, 0}};
    QTable q = policy_evaluation(m, stay, 1e-10);

    std::mt19937_64 rng(7);
    // 1e6 sampled steps in total: 6250 rollouts x 40 steps x 4 pairs.
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            double mc = mc_q_estimate(m, stay, s, a, 6250, 40, rng);
            CHECK(q.at(s, a) == doctest::Approx(mc).epsilon(1e-3));
        }
    }
}

TEST_CASE("policy evaluation output is a Bellman fixed point") {
    TabularMdp m = two_state_mdp(0.3, -0.2, 0.8);
    DeterministicPolicy pi{{1, 0}};
    const double tol = 1e-9;
    QTable q = policy_evaluation(m, pi, tol);
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            double backup = m.r(s, a);
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                backup += m.gamma * m.p(s, a, s2) * q.at(s2, pi(s2));
            }
            CHECK(std::abs(backup - q.at(s, a)) <= tol);
        }
    }
}

TEST_CASE("greedy policy picks the argmax with lowest-index tie break") {
    QTable q(1, 2);
    q.at(0, 0) = 1.0;
    q.at(0, 1) = 2.0;
    CHECK(greedy_policy(q)(0) == 1);

    q.at(0, 0) = 3.0;
    q.at(0, 1) = 3.0;
    CHECK(greedy_policy(q)(0) == 0);
}

TEST_CASE("greedy policy matches an exhaustive per-row scan") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    QTable q(4, 3);
    for (auto& v : q.q) v = dist(rng);
    DeterministicPolicy pi = greedy_policy(q);
    for (int s = 0; s < 4; ++s) {
        int best = 0;
        for (int a = 1; a < 3; ++a) {
            if (q.at(s, a) > q.at(s, best)) best = a;
        }
        CHECK(pi(s) == best);
    }
}

TEST_CASE("greedy policy is invariant under per-row constant shifts") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> dist(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        QTable q(5, 4);
        for (auto& v : q.q) v = dist(rng);
        QTable shifted = q;
        for (int s = 0; s < 5; ++s) {
            const double c = dist(rng);
            for (int a = 0; a < 4; ++a) shifted.at(s, a) += c;
        }
        CHECK(greedy_policy(q).action_of == greedy_policy(shifted).action_of);
    }
}

TEST_CASE("margin check reports per-state advantage") {
    QTable q(1, 2);
    q.at(0, 0) = 5.0;
    q.at(0, 1) = 1.0;
    DeterministicPolicy pi{{0}};
    MarginReport rep = margin_check(q, pi, 0.5);
    CHECK(rep.margins[0] == doctest::Approx(4.0));
    CHECK(rep.all_satisfied);

    q.at(0, 0) = 1.0;
    rep = margin_check(q, pi, 0.1);
    CHECK(rep.margins[0] == doctest::Approx(0.0));
    CHECK_FALSE(rep.all_satisfied);
}

TEST_CASE("margin check agrees with brute-force enumeration") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    QTable q(5, 3);
    for (auto& v : q.q) v = dist(rng);
    DeterministicPolicy pi{{0, 2, 1, 0, 2}};
    MarginReport rep = margin_check(q, pi, 0.0);
    for (int s = 0; s < 5; ++s) {
        double best_other = -1e300;
        for (int a = 0; a < 3; ++a) {
            if (a != pi(s)) best_other = std::max(best_other, q.at(s, a));
        }
        CHECK(rep.margins[s] == doctest::Approx(q.at(s, pi(s)) - best_other));
    }
}

TEST_CASE("margins at epsilon imply the greedy policy equals the target") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        QTable q(4, 3);
        for (auto& v : q.q) v = dist(rng);
        DeterministicPolicy pi{{1, 0, 2, 1}};
        MarginReport rep = margin_check(q, pi, 0.05);
        if (rep.all_satisfied) {
            CHECK(greedy_policy(q).action_of == pi.action_of);
        }
    }
}

TEST_CASE("TabularMdp validation rejects corrupt tables") {
    TabularMdp m = two_state_mdp(1.0, 0.0, 0.5);
    CHECK_NOTHROW(m.validate());

    TabularMdp bad_gamma = m;
    bad_gamma.gamma = 1.0;
    CHECK_THROWS_AS(bad_gamma.validate(), std::invalid_argument);

    TabularMdp bad_rows = m;
    bad_rows.p(0, 0, 0) = 0.5;
    CHECK_THROWS_AS(bad_rows.validate(), std::invalid_argument);
}

TEST_CASE("TabularMdp JSON round-trip is bit-exact") {
    TabularMdp m = two_state_mdp(0.1234567890123456, -3.9999999999999996, 0.3141592653589793);
    m.p(0, 1, 0) = 0.3333333333333333;
    m.p(0, 1, 1) = 1.0 - 0.3333333333333333;
    TabularMdp back = TabularMdp::from_json(m.to_json());
    CHECK(back.n_states == m.n_states);
    CHECK(back.gamma == m.gamma);
    for (std::size_t i = 0; i < m.transition.size(); ++i) {
        CHECK(back.transition[i] == m.transition[i]);
    }
    for (std::size_t i = 0; i < m.reward.size(); ++i) {
        CHECK(back.reward[i] == m.reward[i]);
    }
}
