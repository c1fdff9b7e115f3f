// Scratch probe for the neural chain attack (not part of the deliverable).
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "rlbd/attacker.hpp"
#include "rlbd/chain.hpp"
#include "rlbd/experiment.hpp"
#include "rlbd/tabular_attack.hpp"

using namespace rlbd;

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 2;
    double slip = argc > 2 ? std::atof(argv[2]) : 0.75;
    std::string trig_states = argc > 3 ? argv[3] : "0";
    int bad_action = argc > 4 ? std::atoi(argv[4]) : 0;
    long steps = argc > 5 ? std::atol(argv[5]) : 120000;
    double lr = argc > 6 ? std::atof(argv[6]) : 3e-3;
    double eps = argc > 7 ? std::atof(argv[7]) : 0.5;
    bool uniform = argc > 8 ? std::atoi(argv[8]) != 0 : true;

    TabularMdp mdp = make_chain_mdp(n, slip, 0.9);
    TriggerSpec trig;
    trig.tabular_member.assign(n, 0);
    for (char c : trig_states) trig.tabular_member.at(c - '0') = 1;

    AttackConfig acfg;
    acfg.epsilon = eps;
    acfg.rho = RhoSchedule{1.0, 1.0005, 20.0};
    acfg.alpha = lr;
    acfg.beta = lr / 10.0;  // two-timescale
    acfg.gamma = 0.9;
    acfg.optimizer = OptimizerKind::adam;
    acfg.hidden = {32, 32};

    auto t0 = std::chrono::steady_clock::now();
    ChainAttackResult res = run_chain_attack(mdp, trig, bad_action, acfg, 1, steps, 8, 0.2, 10000, 40, uniform);
    auto t1 = std::chrono::steady_clock::now();
    std::printf("chain attack: %ld steps in %.1fs, mean|delta| tail = %.4f\n", steps,
                std::chrono::duration<double>(t1 - t0).count(), res.mean_abs_delta_tail);

    // exact reference at the same rho
    DeterministicPolicy normal = optimal_policy(mdp);
    DeterministicPolicy target = make_target_policy_table(normal, trig, bad_action);
    TabularAttackSolution sol = solve_exact(mdp, target, eps, 20.0, 1e-7, 500000);

    AttackerState att = AttackerState::restore(res.attacker_checkpoint);
    double mae = 0.0;
    std::printf("   (s,a): learned vs exact delta | learned vs exact qbar\n");
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < 2; ++a) {
            const double dl = att.delta(State{s}, a);
            const double ql = att.qbar(State{s}, a);
            std::printf("   (%d,%d): %+.4f vs %+.4f | %+.3f vs %+.3f\n", s, a, dl,
                        sol.delta.at(s, a), ql, sol.qbar.at(s, a));
            mae += std::abs(dl - sol.delta.at(s, a));
        }
    }
    mae /= (2.0 * n);
    std::printf("uniform MAE(delta) = %.4f\n", mae);

    // victim's learned policy vs the target
    DeterministicPolicy victim_pi = greedy_policy(res.victim_q);
    std::printf("victim policy: ");
    for (int s = 0; s < n; ++s) std::printf("%d", victim_pi(s));
    std::printf("  target: ");
    for (int s = 0; s < n; ++s) std::printf("%d", target(s));
    std::printf("\n");
    return 0;
}
