#pragma once

#include <vector>

#include "pgope/mdp.hpp"

namespace pgope {

/// Exact state- and Q-values for one policy, by backward induction over layers.
/// Values past the horizon are zero (implicit terminal).
struct ValueTables {
    Vec v;                        // per state
    std::vector<Vec> q;           // q[s][a]

    double value(int s) const { return v[s]; }
    double qvalue(int s, int a) const { return q[s][a]; }
};

/// Exact gradients of the value tables w.r.t. the policy parameters.
struct GradientTables {
    std::vector<Vec> v_grad;               // per state, d-vector
    std::vector<std::vector<Vec>> q_grad;  // per (s, a), d-vector
};

inline ValueTables value_tables(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    mdp.check_policy(policy);
    ValueTables vt;
    vt.v = zeros(mdp.num_states);
    vt.q.assign(mdp.num_states, zeros(mdp.num_actions));

    // Backward over layers: q(s,a) = E[r|s,a] + gamma * sum_s' P(s'|s,a) v(s').
    for (int t = mdp.horizon; t >= 0; --t) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (mdp.layer_of[s] != t) continue;
            const Vec probs = policy.action_probs(s);
            double v = 0.0;
            for (int a = 0; a < mdp.num_actions; ++a) {
                double q = mdp.reward_mean(s, a);
                for (const auto& out : mdp.transitions[s][a]) q += mdp.gamma * out.p * vt.v[out.state];
                vt.q[s][a] = q;
                v += probs[a] * q;
            }
            vt.v[s] = v;
        }
    }
    return vt;
}

inline double exact_return(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    return value_tables(mdp, policy).v[mdp.start_state];
}

/// grad Q(s,a) = gamma * sum_s' P(s'|s,a) grad V(s');
/// grad V(s)   = sum_a pi(a|s) [grad log pi(a|s) Q(s,a) + grad Q(s,a)].
inline GradientTables gradient_tables(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    mdp.check_policy(policy);
    const ValueTables vt = value_tables(mdp, policy);
    const int d = policy.dim();
    GradientTables gt;
    gt.v_grad.assign(mdp.num_states, zeros(d));
    gt.q_grad.assign(mdp.num_states, std::vector<Vec>(mdp.num_actions, zeros(d)));

    for (int t = mdp.horizon; t >= 0; --t) {
        for (int s = 0; s < mdp.num_states; ++s) {
            if (mdp.layer_of[s] != t) continue;
            const Vec probs = policy.action_probs(s);
            for (int a = 0; a < mdp.num_actions; ++a) {
                Vec& gq = gt.q_grad[s][a];
                for (const auto& out : mdp.transitions[s][a]) axpy(gq, mdp.gamma * out.p, gt.v_grad[out.state]);
                Vec& gv = gt.v_grad[s];
                axpy(gv, probs[a] * vt.q[s][a], policy.grad_log_prob(s, a));
                axpy(gv, probs[a], gq);
            }
        }
    }
    return gt;
}

/// The d-vector grad_theta J(pi_theta); the unbiasedness oracle for all PG estimators.
inline Vec exact_policy_gradient(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    return gradient_tables(mdp, policy).v_grad[mdp.start_state];
}

}  // namespace pgope
