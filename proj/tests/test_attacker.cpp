#include <doctest.h>

#include <cmath>

#include "rlbd/attacker.hpp"
#include "rlbd/chain.hpp"
#include "rlbd/experiment.hpp"

using namespace rlbd;

namespace {

// Attacker over a tabular encoding with single-layer nets, so tables of the
// form Q(s,a) = w_s + w_a + b are exactly representable by hand-set weights.
AttackerState linear_tabular_attacker(const AttackConfig& cfg, int n_states, int n_actions,
                                      std::uint64_t seed) {
    StateActionEncoder enc{n_states, n_actions, true};
    return AttackerState(cfg, enc, seed);
}

AttackConfig linear_cfg(double epsilon, double rho, double alpha, double beta, double gamma) {
    AttackConfig cfg;
    cfg.epsilon = epsilon;
    cfg.rho = RhoSchedule{rho, 1.0, rho};
    cfg.alpha = alpha;
    cfg.beta = beta;
    cfg.gamma = gamma;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.hidden = {};  // single linear layer
    return cfg;
}

void zero_net(Mlp& net) { std::fill(net.params().begin(), net.params().end(), 0.0); }

}  // namespace

TEST_CASE("phi is the positive part") {
    CHECK(phi(-1.0) == 0.0);
    CHECK(phi(2.0) == 2.0);
    CHECK(phi(0.0) == 0.0);
}

TEST_CASE("target action: bad action on trigger, normal policy elsewhere") {
    TargetPolicy tp;
    tp.bad_action = 1;
    tp.trigger = TriggerSpec{};  // x > 0.5
    tp.normal_action = [](const State&) { return 0; };

    CHECK(target_action(tp, State{std::vector<double>{0.6, 0, 0, 0}}) == 1);
    CHECK(target_action(tp, State{std::vector<double>{0.0, 0, 0, 0}}) == 0);
}

TEST_CASE("target policy table matches a hand-built piecewise table") {
    DeterministicPolicy normal{{1, 1, 0}};
    TriggerSpec trig;
    trig.tabular_member = {0, 1, 0};
    DeterministicPolicy table = make_target_policy_table(normal, trig, 0);
    CHECK(table.action_of == std::vector<int>{1, 0, 0});

    // exhaustive scan against the functional form
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger = trig;
    tp.normal_action = [normal](const State& s) { return normal(state_index(s)); };
    for (int s = 0; s < 3; ++s) CHECK(tp(State{s}) == table(s));
}

TEST_CASE("delta target collapses to -r on zero networks") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 1);
    zero_net(att.qbar_net());
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 0};
    tp.normal_action = [](const State&) { return 1; };

    Transition t{State{0}, 1, 1.0, State{1}, false};
    CHECK(delta_target(t, att, tp, cfg.gamma) == doctest::Approx(-1.0));
}

TEST_CASE("delta target masks the bootstrap on terminal transitions") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 2);
    zero_net(att.qbar_net());
    att.qbar_net().params().back() = 2.0;  // bias: Qbar identically 2
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 0};
    tp.normal_action = [](const State&) { return 0; };

    Transition t{State{0}, 1, 1.0, State{1}, true};
    // Qbar(s,a) - r with no bootstrap: 2 - 1 = 1
    CHECK(delta_target(t, att, tp, cfg.gamma) == doctest::Approx(1.0));
}

TEST_CASE("delta target equals a hand-evaluated table expansion") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 3, 2, 3);
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 1, 0};
    DeterministicPolicy normal{{1, 1, 1}};
    tp.normal_action = [normal](const State& s) { return normal(state_index(s)); };

    // tabulate the (randomly initialised) qbar network
    QTable qbar(3, 2);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) qbar.at(s, a) = att.qbar(State{s}, a);
    }
    Transition t{State{2}, 1, 0.7, State{1}, false};
    const int pi_next = 0;  // state 1 is triggered
    const double by_hand = qbar.at(2, 1) - 0.7 - 0.9 * qbar.at(1, pi_next);
    CHECK(delta_target(t, att, tp, cfg.gamma) == doctest::Approx(by_hand).epsilon(1e-12));
}

TEST_CASE("q targets: violated margin on a non-target action") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 4);
    zero_net(att.qbar_net());
    zero_net(att.delta_net());
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {1, 1};  // everything triggered: target action 0
    tp.normal_action = [](const State&) { return 0; };

    Transition t{State{0}, 1, 0.0, State{1}, false};  // a = 1 != target
    auto [first, second] = qbar_targets(t, att, tp, cfg);
    // first = 0 - (0 + 20 * phi(0 + 0.5 - 0)) = -10
    CHECK(first == doctest::Approx(-10.0));
    CHECK(second == doctest::Approx(0.0));
}

TEST_CASE("q targets are a fixed point when margins hold and delta is zero") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 5);
    zero_net(att.delta_net());
    zero_net(att.qbar_net());
    // Qbar(s,a) = w_a: action 0 worth 2, action 1 worth 1 -> margin 1 >= 0.5
    auto& p = att.qbar_net().params();
    p[2] = 2.0;  // action-0 one-hot weight (after 2 state inputs)
    p[3] = 1.0;
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 0};
    tp.normal_action = [](const State&) { return 0; };

    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            Transition t{State{s}, a, 0.0, State{(s + 1) % 2}, false};
            auto [first, second] = qbar_targets(t, att, tp, cfg);
            CHECK(first == doctest::Approx(att.qbar(t.state, a)));
            CHECK(second == doctest::Approx(att.qbar(t.next_state, 0)));
        }
    }
}

TEST_CASE("q targets: target-action case sums over the other actions") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 6);
    zero_net(att.delta_net());
    zero_net(att.qbar_net());
    auto& p = att.qbar_net().params();
    p[2] = 0.0;  // action 0 (the target)
    p[3] = 0.3;  // action 1 outvalues it: violated margin
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {1, 1};
    tp.normal_action = [](const State&) { return 0; };

    Transition t{State{0}, 0, 0.0, State{1}, false};  // a == target
    auto [first, second] = qbar_targets(t, att, tp, cfg);
    // bracket = -rho * phi(Q(s,1) + eps - Q(s,0)) = -20 * 0.8 = -16
    CHECK(first == doctest::Approx(0.0 - (0.0 - 16.0)));
    CHECK(second == doctest::Approx(0.0));
}

TEST_CASE("second q target moves in the +gamma*delta direction") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 7);
    zero_net(att.delta_net());
    att.delta_net().params().back() = 0.7;  // Delta identically 0.7
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 0};
    tp.normal_action = [](const State&) { return 0; };

    Transition t{State{0}, 1, 0.0, State{1}, false};
    auto [first, second] = qbar_targets(t, att, tp, cfg);
    (void)first;
    CHECK(second == doctest::Approx(att.qbar(State{1}, 0) + 0.9 * 0.7));

    Transition done_t{State{0}, 1, 0.0, State{1}, true};
    auto [f2, s2] = qbar_targets(done_t, att, tp, cfg);
    (void)f2;
    CHECK(s2 == doctest::Approx(att.qbar(State{1}, 0)));
}

TEST_CASE("poison round alters only reward fields") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 1e-3, 1e-3, 0.9);
    cfg.hidden = {8};
    AttackerState att = linear_tabular_attacker(cfg, 3, 2, 8);
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 1, 0};
    tp.normal_action = [](const State&) { return 1; };

    std::vector<Transition> batch{
        Transition{State{0}, 1, 1.0, State{1}, false},
        Transition{State{1}, 0, 0.5, State{2}, false},
        Transition{State{2}, 1, 0.0, State{2}, true},
    };
    auto out = poison_round(att, tp, cfg, batch);
    REQUIRE(out.size() == batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        CHECK(same_state(out[i].state, batch[i].state));
        CHECK(same_state(out[i].next_state, batch[i].next_state));
        CHECK(out[i].action == batch[i].action);
        CHECK(out[i].done == batch[i].done);
    }
}

TEST_CASE("zero step sizes inject the initial network's perturbation") {
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.0, 0.0, 0.9);
    cfg.hidden = {8};
    AttackerState att = linear_tabular_attacker(cfg, 2, 2, 9);
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0, 0};
    tp.normal_action = [](const State&) { return 1; };

    std::vector<Transition> batch{Transition{State{0}, 1, 1.0, State{1}, false}};
    const double d0 = att.delta(State{0}, 1);
    auto out = poison_round(att, tp, cfg, batch);
    CHECK(out[0].reward == doctest::Approx(1.0 + d0));
}

TEST_CASE("a stationary attacker leaves rewards and parameters unchanged") {
    // One-state MDP semantics: margins already exceed epsilon and delta = 0
    // is Bellman-consistent, so every update is a no-op.
    AttackConfig cfg = linear_cfg(0.5, 20.0, 0.1, 0.1, 0.5);
    AttackerState att = linear_tabular_attacker(cfg, 1, 2, 10);
    zero_net(att.delta_net());
    zero_net(att.qbar_net());
    auto& p = att.qbar_net().params();
    p[1] = 2.0;  // Q(0, a0) = 2 = (r=1)/(1-gamma)
    p[2] = 1.0;  // Q(0, a1) = 1 = 0 + gamma * 2
    TargetPolicy tp;
    tp.bad_action = 0;
    tp.trigger.tabular_member = {0};
    tp.normal_action = [](const State&) { return 0; };

    std::vector<double> qbar_before = att.qbar_net().params();
    std::vector<double> delta_before = att.delta_net().params();
    std::vector<Transition> batch{Transition{State{0}, 0, 1.0, State{0}, false},
                                  Transition{State{0}, 1, 0.0, State{0}, false}};
    auto out = poison_round(att, tp, cfg, batch);
    CHECK(out[0].reward == doctest::Approx(1.0));
    CHECK(out[1].reward == doctest::Approx(0.0));
    CHECK(att.qbar_net().params() == qbar_before);
    CHECK(att.delta_net().params() == delta_before);
}

TEST_CASE("attack rounds are bitwise reproducible under a fixed seed") {
    auto run = [] {
        AttackConfig cfg = linear_cfg(0.5, 20.0, 1e-3, 1e-3, 0.9);
        cfg.hidden = {16};
        cfg.optimizer = OptimizerKind::adam;
        AttackerState att = linear_tabular_attacker(cfg, 3, 2, 11);
        TargetPolicy tp;
        tp.bad_action = 0;
        tp.trigger.tabular_member = {0, 0, 1};
        tp.normal_action = [](const State&) { return 1; };
        const std::vector<Transition> batch{
            Transition{State{0}, 1, 0.0, State{1}, false},
            Transition{State{1}, 1, 0.0, State{2}, false},
            Transition{State{2}, 0, 1.0, State{1}, false},
        };
        for (int k = 0; k < 50; ++k) poison_round(att, tp, cfg, batch);
        return att.delta_net().params();
    };
    CHECK(run() == run());
}

TEST_CASE("rho schedule: constant by default, optional geometric ramp") {
    RhoSchedule constant{20.0, 1.0, 20.0};
    CHECK(constant.at(0) == 20.0);
    CHECK(constant.at(1000) == 20.0);

    RhoSchedule ramp{20.0, 1.1, 200.0};
    CHECK(ramp.at(0) == doctest::Approx(20.0));
    CHECK(ramp.at(10) == doctest::Approx(20.0 * std::pow(1.1, 10)));
    CHECK(ramp.at(1000) == doctest::Approx(200.0));
}
