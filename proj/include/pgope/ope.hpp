#pragma once

#include <functional>
#include <stdexcept>

#include "pgope/qmodel.hpp"

namespace pgope {

/// Per-step importance ratios rho_t = target(a_t|s_t) / behavior(a_t|s_t) and
/// their running products; rho_[0:-1] = 1 by convention.
struct ImportanceWeights {
    Vec per_step;    // rho_t
    Vec cumulative;  // rho_[0:t]
};

inline ImportanceWeights importance_weights(const Trajectory& traj, const SoftmaxPolicy& behavior,
                                            const SoftmaxPolicy& target) {
    if (behavior.num_states() != target.num_states() || behavior.num_actions() != target.num_actions())
        throw std::invalid_argument("importance_weights: behavior/target dimension mismatch");
    ImportanceWeights w;
    w.per_step.reserve(traj.steps.size());
    w.cumulative.reserve(traj.steps.size());
    double prod = 1.0;
    for (const Step& step : traj.steps) {
        const double pb = behavior.prob(step.state, step.action);
        if (pb <= 0.0) throw std::domain_error("importance_weights: behavior assigns zero probability to observed action");
        const double rho = target.prob(step.state, step.action) / pb;
        prod *= rho;
        w.per_step.push_back(rho);
        w.cumulative.push_back(prod);
    }
    return w;
}

/// Trajectory-wise IS: rho_[0:T] * sum_t gamma^t r_t.
inline double traj_is(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                      const SoftmaxPolicy& target) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    return w.cumulative.back() * discounted_return(mdp, traj);
}

/// Step-wise IS: sum_t gamma^t rho_[0:t] r_t.
inline double step_is(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                      const SoftmaxPolicy& target) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    double est = 0.0, disc = 1.0;
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
        est += disc * w.cumulative[t] * traj.steps[t].reward;
        disc *= mdp.gamma;
    }
    return est;
}

/// Baseline-corrected IS: b(s_0) + sum_t gamma^t rho_[0:t] (r_t - b(s_t) + gamma b(s_{t+1})),
/// with b evaluating to zero past the horizon.
inline double baseline_ope(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                           const SoftmaxPolicy& target, const Vec& b) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    const std::size_t n = traj.steps.size();
    double est = b[traj.steps[0].state], disc = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double b_next = (t + 1 < n) ? b[traj.steps[t + 1].state] : 0.0;
        est += disc * w.cumulative[t] * (traj.steps[t].reward - b[traj.steps[t].state] + mdp.gamma * b_next);
        disc *= mdp.gamma;
    }
    return est;
}

/// Doubly robust estimator, expanded form:
/// Vtilde(s_0) + sum_t gamma^t rho_[0:t] (r_t + gamma Vtilde(s_{t+1}) - Qtilde(s_t, a_t)).
inline double dr_ope_expanded(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                              const SoftmaxPolicy& target, const QModel& model) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    const std::size_t n = traj.steps.size();
    double est = model.v_value(target, traj.steps[0].state), disc = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double v_next = (t + 1 < n) ? model.v_value(target, traj.steps[t + 1].state) : 0.0;
        est += disc * w.cumulative[t] *
               (traj.steps[t].reward + mdp.gamma * v_next - model.q_value(target, traj.steps[t].state, traj.steps[t].action));
        disc *= mdp.gamma;
    }
    return est;
}

/// Doubly robust estimator, recursive form:
/// DR_t = Vtilde_t + rho_t (r_t + gamma DR_{t+1} - Qtilde_t), DR_{T+1} = 0.
inline double dr_ope_recursive(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                               const SoftmaxPolicy& target, const QModel& model) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    double dr = 0.0;
    for (int t = static_cast<int>(traj.steps.size()) - 1; t >= 0; --t) {
        const Step& step = traj.steps[t];
        dr = model.v_value(target, step.state) +
             w.per_step[t] * (step.reward + mdp.gamma * dr - model.q_value(target, step.state, step.action));
    }
    return dr;
}

/// Actor-critic style OPE: sum_t gamma^t rho_[0:t] (f(s_t,a_t) - gamma f(s_{t+1},a_{t+1})),
/// with f == 0 at the terminal. Biased for generic f: its expectation telescopes to
/// E[f(s_0, a_0)] under the target policy.
inline double actor_critic_ope(const TabularMdp& mdp, const Trajectory& traj, const SoftmaxPolicy& behavior,
                               const SoftmaxPolicy& target, const std::vector<Vec>& f) {
    mdp.check_policy(behavior);
    mdp.check_policy(target);
    const ImportanceWeights w = importance_weights(traj, behavior, target);
    const std::size_t n = traj.steps.size();
    double est = 0.0, disc = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double f_t = f[traj.steps[t].state][traj.steps[t].action];
        const double f_next = (t + 1 < n) ? f[traj.steps[t + 1].state][traj.steps[t + 1].action] : 0.0;
        est += disc * w.cumulative[t] * (f_t - mdp.gamma * f_next);
        disc *= mdp.gamma;
    }
    return est;
}

}  // namespace pgope
