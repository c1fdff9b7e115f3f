#include "rlbd/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rlbd {

bool same_state(const State& a, const State& b) {
    if (a.index() != b.index()) return false;
    if (is_tabular_state(a)) return state_index(a) == state_index(b);
    return state_features(a) == state_features(b);
}

void TabularMdp::validate() const {
    if (n_states <= 0 || n_actions <= 0) {
        throw std::invalid_argument("TabularMdp: n_states and n_actions must be positive");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("TabularMdp: gamma must lie strictly inside (0,1)");
    }
    if (static_cast<int>(transition.size()) != n_states * n_actions * n_states ||
        static_cast<int>(reward.size()) != n_states * n_actions) {
        throw std::invalid_argument("TabularMdp: table dimensions do not match n_states/n_actions");
    }
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double row = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double pr = p(s, a, s2);
                if (pr < 0.0 || pr > 1.0) {
                    throw std::invalid_argument("TabularMdp: probability outside [0,1]");
                }
                row += pr;
            }
            if (std::abs(row - 1.0) > 1e-9) {
                throw std::invalid_argument("TabularMdp: transition row does not sum to 1");
            }
        }
    }
}

nlohmann::json TabularMdp::to_json() const {
    nlohmann::json p_rows = nlohmann::json::array();
    nlohmann::json r_rows = nlohmann::json::array();
    for (int s = 0; s < n_states; ++s) {
        nlohmann::json p_s = nlohmann::json::array();
        nlohmann::json r_s = nlohmann::json::array();
        for (int a = 0; a < n_actions; ++a) {
            nlohmann::json p_sa = nlohmann::json::array();
            for (int s2 = 0; s2 < n_states; ++s2) p_sa.push_back(p(s, a, s2));
            p_s.push_back(std::move(p_sa));
            r_s.push_back(r(s, a));
        }
        p_rows.push_back(std::move(p_s));
        r_rows.push_back(std::move(r_s));
    }
    return nlohmann::json{{"n_states", n_states},
                          {"n_actions", n_actions},
                          {"gamma", gamma},
                          {"P", std::move(p_rows)},
                          {"R", std::move(r_rows)}};
}

TabularMdp TabularMdp::from_json(const nlohmann::json& j) {
    TabularMdp m;
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.gamma = j.at("gamma").get<double>();
    m.transition.assign(static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states, 0.0);
    m.reward.assign(static_cast<std::size_t>(m.n_states) * m.n_actions, 0.0);
    const auto& P = j.at("P");
    const auto& R = j.at("R");
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) {
            for (int s2 = 0; s2 < m.n_states; ++s2) {
                m.p(s, a, s2) = P.at(s).at(a).at(s2).get<double>();
            }
            m.r(s, a) = R.at(s).at(a).get<double>();
        }
    }
    m.validate();
    return m;
}

QTable policy_evaluation(const TabularMdp& mdp, const DeterministicPolicy& policy, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("policy_evaluation: tol must be positive");
    mdp.validate();
    if (policy.size() != mdp.n_states) {
        throw std::invalid_argument("policy_evaluation: policy does not cover the state space");
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        if (policy(s) < 0 || policy(s) >= mdp.n_actions) {
            throw std::invalid_argument("policy_evaluation: action index out of range");
        }
    }

    double r_max = 0.0;
    for (double r : mdp.reward) r_max = std::max(r_max, std::abs(r));
    // Contraction bound: gamma^k * r_max / (1-gamma) <= tol, plus headroom.
    long cap = 64;
    if (r_max > 0.0) {
        double k = std::log(tol * (1.0 - mdp.gamma) / r_max) / std::log(mdp.gamma);
        cap = static_cast<long>(std::ceil(std::max(1.0, k))) + 64;
    }

    QTable q(mdp.n_states, mdp.n_actions, 0.0);
    QTable next(mdp.n_states, mdp.n_actions, 0.0);
    for (long it = 0; it < cap; ++it) {
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                double exp_next = 0.0;
                for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                    exp_next += mdp.p(s, a, s2) * q.at(s2, policy(s2));
                }
                next.at(s, a) = mdp.r(s, a) + mdp.gamma * exp_next;
            }
        }
        std::swap(q, next);
        // Residual of the current iterate.
        double resid = 0.0;
        for (int s = 0; s < mdp.n_states; ++s) {
            for (int a = 0; a < mdp.n_actions; ++a) {
                double exp_next = 0.0;
                for (int s2 = 0; s2 < mdp.n_states; ++s2) {
                    exp_next += mdp.p(s, a, s2) * q.at(s2, policy(s2));
                }
                resid = std::max(resid, std::abs(q.at(s, a) - mdp.r(s, a) - mdp.gamma * exp_next));
            }
        }
        if (resid <= tol) return q;
    }
    throw std::runtime_error("policy_evaluation: no convergence within iteration cap");
}

DeterministicPolicy greedy_policy(const QTable& q) {
    DeterministicPolicy pi;
    pi.action_of.resize(q.n_states);
    for (int s = 0; s < q.n_states; ++s) {
        int best = 0;
        for (int a = 1; a < q.n_actions; ++a) {
            if (q.at(s, a) > q.at(s, best)) best = a;
        }
        pi.action_of[s] = best;
    }
    return pi;
}

MarginReport margin_check(const QTable& q, const DeterministicPolicy& policy, double epsilon) {
    if (policy.size() != q.n_states) {
        throw std::invalid_argument("margin_check: dimensions disagree");
    }
    MarginReport rep;
    rep.margins.resize(q.n_states);
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < q.n_states; ++s) {
        double best_other = -std::numeric_limits<double>::infinity();
        for (int a = 0; a < q.n_actions; ++a) {
            if (a == policy(s)) continue;
            best_other = std::max(best_other, q.at(s, a));
        }
        rep.margins[s] = q.at(s, policy(s)) - best_other;
        rep.min_margin = std::min(rep.min_margin, rep.margins[s]);
    }
    rep.all_satisfied = rep.min_margin >= epsilon;
    return rep;
}

}  // namespace rlbd
