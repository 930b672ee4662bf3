#pragma once

#include "pgope/qmodel.hpp"

namespace pgope {

namespace detail {

/// gamma^t discount weights and returns-to-go G_t = sum_{t'>=t} gamma^{t'} r_{t'}.
inline Vec discounts(const TabularMdp& mdp, std::size_t n) {
    Vec d(n);
    double w = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        d[t] = w;
        w *= mdp.gamma;
    }
    return d;
}

inline Vec returns_to_go(const TabularMdp& mdp, const Trajectory& traj) {
    const std::size_t n = traj.steps.size();
    const Vec disc = discounts(mdp, n);
    Vec g(n, 0.0);
    double acc = 0.0;
    for (std::size_t t = n; t-- > 0;) {
        acc += disc[t] * traj.steps[t].reward;
        g[t] = acc;
    }
    return g;
}

}  // namespace detail

/// REINFORCE: sum_t grad log pi_t * sum_{t'} gamma^{t'} r_{t'}.
inline Vec reinforce(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy) {
    mdp.check_policy(policy);
    const double total = discounted_return(mdp, traj);
    Vec g = zeros(policy.dim());
    for (const Step& step : traj.steps) axpy(g, total, policy.grad_log_prob(step.state, step.action));
    return g;
}

/// Standard PG: sum_t grad log pi_t * sum_{t'>=t} gamma^{t'} r_{t'}.
inline Vec vanilla_pg(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy) {
    mdp.check_policy(policy);
    const Vec rtg = detail::returns_to_go(mdp, traj);
    Vec g = zeros(policy.dim());
    for (std::size_t t = 0; t < traj.steps.size(); ++t)
        axpy(g, rtg[t], policy.grad_log_prob(traj.steps[t].state, traj.steps[t].action));
    return g;
}

/// PG with a state baseline: sum_t grad log pi_t (sum_{t'>=t} gamma^{t'} r_{t'} - gamma^t b(s_t)).
inline Vec baseline_pg(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy, const Vec& b) {
    mdp.check_policy(policy);
    const Vec rtg = detail::returns_to_go(mdp, traj);
    const Vec disc = detail::discounts(mdp, traj.steps.size());
    Vec g = zeros(policy.dim());
    for (std::size_t t = 0; t < traj.steps.size(); ++t)
        axpy(g, rtg[t] - disc[t] * b[traj.steps[t].state],
             policy.grad_log_prob(traj.steps[t].state, traj.steps[t].action));
    return g;
}

/// DR-PG, the gradient of the doubly robust OPE estimator:
/// sum_t { grad log pi_t [ G_t + sum_{t2>t} gamma^{t2} (Vtilde_{t2} - Qtilde_{t2}) ]
///         + gamma^t ( grad Vtilde_t - grad Qtilde_t - Qtilde_t grad log pi_t ) }.
inline Vec drpg(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy, const QModel& model) {
    mdp.check_policy(policy);
    const std::size_t n = traj.steps.size();
    const Vec rtg = detail::returns_to_go(mdp, traj);
    const Vec disc = detail::discounts(mdp, n);

    // Per-step model values along the trajectory.
    Vec qt(n), vt(n);
    for (std::size_t t = 0; t < n; ++t) {
        qt[t] = model.q_value(policy, traj.steps[t].state, traj.steps[t].action);
        vt[t] = model.v_value(policy, traj.steps[t].state);
    }
    // corr[t] = sum_{t2 > t} gamma^{t2} (Vtilde_{t2} - Qtilde_{t2}).
    Vec corr(n, 0.0);
    for (std::size_t t = n - 1; t-- > 0;) corr[t] = corr[t + 1] + disc[t + 1] * (vt[t + 1] - qt[t + 1]);

    Vec g = zeros(policy.dim());
    for (std::size_t t = 0; t < n; ++t) {
        const Step& step = traj.steps[t];
        const Vec score = policy.grad_log_prob(step.state, step.action);
        axpy(g, rtg[t] + corr[t] - disc[t] * qt[t], score);
        axpy(g, disc[t], model.v_grad(policy, step.state));
        axpy(g, -disc[t], model.q_grad(policy, step.state, step.action));
    }
    return g;
}

/// Trajectory-wise control variate estimator: DR-PG with the model's gradient
/// information dropped (grad Qtilde treated as 0, grad Vtilde = sum_a Qtilde grad pi).
/// Coded independently of drpg so their agreement under a Constant model is a
/// genuine cross-check.
inline Vec trajcv_pg(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy, const QModel& model) {
    mdp.check_policy(policy);
    const std::size_t n = traj.steps.size();
    const Vec disc = detail::discounts(mdp, n);

    Vec g = zeros(policy.dim());
    for (std::size_t t = 0; t < n; ++t) {
        const Step& step = traj.steps[t];
        const Vec score = policy.grad_log_prob(step.state, step.action);

        double bracket = 0.0;
        for (std::size_t t1 = t; t1 < n; ++t1) bracket += disc[t1] * traj.steps[t1].reward;
        for (std::size_t t2 = t + 1; t2 < n; ++t2) {
            const Step& s2 = traj.steps[t2];
            bracket += disc[t2] * (model.v_value(policy, s2.state) - model.q_value(policy, s2.state, s2.action));
        }
        axpy(g, bracket - disc[t] * model.q_value(policy, step.state, step.action), score);

        // grad Vtilde with only the action-distribution dependence.
        const Vec probs = policy.action_probs(step.state);
        for (int a = 0; a < policy.num_actions(); ++a)
            axpy(g, disc[t] * probs[a] * model.q_value(policy, step.state, a), policy.grad_log_prob(step.state, a));
    }
    return g;
}

/// Actor-critic PG: sum_t gamma^t grad log pi_t * f(s_t, a_t). Biased unless f
/// matches the exact Q on the support.
inline Vec actor_critic_pg(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy,
                           const std::vector<Vec>& f) {
    mdp.check_policy(policy);
    const Vec disc = detail::discounts(mdp, traj.steps.size());
    Vec g = zeros(policy.dim());
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        const Step& step = traj.steps[t];
        axpy(g, disc[t] * f[step.state][step.action], policy.grad_log_prob(step.state, step.action));
    }
    return g;
}

/// DR-PG by backward recursion:
/// grad DR_t = grad Vtilde_t + grad log pi_t (r_t + gamma DR_{t+1} - Qtilde_t)
///             + gamma grad DR_{t+1} - grad Qtilde_t,  with DR_{T+1} = 0.
inline Vec drpg_recursive(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& policy,
                          const QModel& model) {
    mdp.check_policy(policy);
    double dr = 0.0;
    Vec grad_dr = zeros(policy.dim());
    for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
        const Step& step = traj.steps[t];
        const double q = model.q_value(policy, step.state, step.action);
        Vec g = model.v_grad(policy, step.state);
        axpy(g, step.reward + mdp.gamma * dr - q, policy.grad_log_prob(step.state, step.action));
        axpy(g, mdp.gamma, grad_dr);
        axpy(g, -1.0, model.q_grad(policy, step.state, step.action));
        grad_dr = std::move(g);
        dr = model.v_value(policy, step.state) + (step.reward + mdp.gamma * dr - q);
    }
    return grad_dr;
}

}  // namespace pgope
