#pragma once

#include <map>
#include <optional>
#include <string>

#include "pgope/dp.hpp"

namespace pgope {

/// Witness that an MDP is tree-structured: every reachable state has a unique
/// parent (state, action) pair and hence a unique root path.
struct TreeCertificate {
    bool valid = false;
    int violating_state = -1;                 // set when invalid
    std::vector<std::pair<int, int>> parent;  // per state; (-1, -1) for root/unreachable
    std::vector<bool> reachable;
};

inline TreeCertificate check_tree(const TabularMdp& mdp) {
    TreeCertificate cert;
    cert.parent.assign(mdp.num_states, {-1, -1});
    cert.reachable.assign(mdp.num_states, false);
    cert.reachable[mdp.start_state] = true;

    // Walk layers forward; each newly reached state must have exactly one
    // positive-probability (parent state, action) pair.
    std::vector<int> parent_count(mdp.num_states, 0);
    for (int t = 0; t < mdp.horizon; ++t) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (!cert.reachable[s] || mdp.layer_of[s] != t) continue;
            for (int a = 0; a < mdp.num_actions; ++a) {
                for (const auto& out : mdp.transitions[s][a]) {
                    if (out.p <= 0.0) continue;
                    cert.reachable[out.state] = true;
                    if (cert.parent[out.state] == std::make_pair(s, a)) continue;
                    if (++parent_count[out.state] > 1) {
                        cert.valid = false;
                        cert.violating_state = out.state;
                        return cert;
                    }
                    cert.parent[out.state] = {s, a};
                }
            }
        }
    }
    cert.valid = true;
    return cert;
}

namespace detail {

/// Root-path cumulative score sum_{t1 < layer(s)} d log pi / d theta_i for each
/// reachable state of a tree, plus the path probability of reaching it.
struct TreePaths {
    Vec reach_prob;   // per state
    Vec path_score;   // per state, coordinate i only
};

inline TreePaths tree_paths(const TabularMdp& mdp, const SoftmaxPolicy& policy, const TreeCertificate& cert,
                            int coord) {
    TreePaths tp{zeros(mdp.num_states), zeros(mdp.num_states)};
    tp.reach_prob[mdp.start_state] = 1.0;
    for (int t = 1; t <= mdp.horizon; ++t) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (!cert.reachable[s] || mdp.layer_of[s] != t) continue;
            const auto [ps, pa] = cert.parent[s];
            double trans = 0.0;
            for (const auto& out : mdp.transitions[ps][pa])
                if (out.state == s) trans += out.p;
            tp.reach_prob[s] = tp.reach_prob[ps] * policy.prob(ps, pa) * trans;
            tp.path_score[s] = tp.path_score[ps] + policy.grad_log_prob(ps, pa)[coord];
        }
    }
    return tp;
}

}  // namespace detail

/// Cramer-Rao lower bound for the i-th policy-gradient coordinate on a
/// tree-structured MDP:
///   E[ sum_t gamma^{2t} { V_{t+1}[r_t] (sum_{t1<=t} dlogpi/dtheta_i)^2
///                        + V_t[ V_t^pi sum_{t1<t} dlogpi/dtheta_i + dV_t^pi/dtheta_i ] } ]
/// computed exactly from the unique root paths.
inline double tree_cr_bound(const TabularMdp& mdp, const SoftmaxPolicy& policy, int coord) {
    mdp.check_policy(policy);
    const TreeCertificate cert = check_tree(mdp);
    if (!cert.valid)
        throw std::invalid_argument("tree_cr_bound: MDP is not tree-structured (state " +
                                    std::to_string(cert.violating_state) + " has multiple root paths)");
    const ValueTables vt = value_tables(mdp, policy);
    const GradientTables gt = gradient_tables(mdp, policy);
    const detail::TreePaths tp = detail::tree_paths(mdp, policy, cert, coord);

    double bound = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        if (!cert.reachable[s]) continue;
        const int t = mdp.layer_of[s];
        const double disc2 = std::pow(mdp.gamma, 2.0 * t);
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double pm = tp.reach_prob[s] * policy.prob(s, a);
            if (pm == 0.0) continue;
            const double cum_score = tp.path_score[s] + policy.grad_log_prob(s, a)[coord];

            bound += disc2 * pm * mdp.reward_variance(s, a) * cum_score * cum_score;

            if (t < mdp.horizon) {
                // Variance over s_{t+1} of V(s') cum_score + dV(s')/dtheta_i.
                double m1 = 0.0, m2 = 0.0;
                for (const auto& out : mdp.transitions[s][a]) {
                    const double y = vt.v[out.state] * cum_score + gt.v_grad[out.state][coord];
                    m1 += out.p * y;
                    m2 += out.p * y * y;
                }
                bound += disc2 * mdp.gamma * mdp.gamma * pm * (m2 - m1 * m1);
            }
        }
    }
    return bound;
}

/// General layered (DAG) MDP form of the bound. Prefix probabilities are grouped
/// by their (s_t, a_t) endpoint, which replaces the tree's unique path score by
/// the conditional expectation of the cumulative score given (s_t, a_t).
inline double dag_cr_bound(const TabularMdp& mdp, const SoftmaxPolicy& policy, int coord) {
    mdp.check_policy(policy);
    // Accumulate the (s, a) marginals and score-weighted masses over all
    // state-action prefixes.
    std::vector<Vec> pm(mdp.num_states, zeros(mdp.num_actions));
    std::vector<Vec> score_mass(mdp.num_states, zeros(mdp.num_actions));
    std::uint64_t prefix_count = 0;
    const std::uint64_t cap = enumeration_cap();

    auto dfs = [&](auto&& self, int s, int t, double p, double score) -> void {
        if (++prefix_count > cap) throw std::runtime_error("dag_cr_bound: support cap exceeded");
        const Vec probs = policy.action_probs(s);
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double pa = p * probs[a];
            if (pa == 0.0) continue;
            const double cum = score + policy.grad_log_prob(s, a)[coord];
            pm[s][a] += pa;
            score_mass[s][a] += pa * cum;
            if (t < mdp.horizon)
                for (const auto& out : mdp.transitions[s][a])
                    if (out.p > 0.0) self(self, out.state, t + 1, pa * out.p, cum);
        }
    };
    dfs(dfs, mdp.start_state, 0, 1.0, 0.0);

    const ValueTables vt = value_tables(mdp, policy);
    const GradientTables gt = gradient_tables(mdp, policy);

    double bound = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        const int t = mdp.layer_of[s];
        const double disc2 = std::pow(mdp.gamma, 2.0 * t);
        for (int a = 0; a < mdp.num_actions; ++a) {
            if (pm[s][a] == 0.0) continue;
            const double sbar = score_mass[s][a] / pm[s][a];

            bound += disc2 * pm[s][a] * mdp.reward_variance(s, a) * sbar * sbar;

            if (t < mdp.horizon) {
                double m1 = 0.0, m2 = 0.0;
                for (const auto& out : mdp.transitions[s][a]) {
                    const double y = vt.v[out.state] * sbar + gt.v_grad[out.state][coord];
                    m1 += out.p * y;
                    m2 += out.p * y * y;
                }
                bound += disc2 * mdp.gamma * mdp.gamma * pm[s][a] * (m2 - m1 * m1);
            }
        }
    }
    return bound;
}

}  // namespace pgope
