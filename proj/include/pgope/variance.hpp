#pragma once

#include <functional>
#include <random>
#include <string>

#include "pgope/finite_diff.hpp"

namespace pgope {

/// Exact covariance of a per-trajectory estimator under the on-policy trajectory law:
/// Cov = sum_tau p(tau) g(tau) g(tau)^T - gbar gbar^T.
inline Mat brute_force_covariance(const TabularMdp& mdp, const SoftmaxPolicy& policy, const PgFn& estimator) {
    std::vector<double> weights;
    std::vector<Vec> points;
    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
        weights.push_back(p);
        points.push_back(estimator(traj));
    }
    return weighted_covariance(weights, points);
}

/// The three terms of the closed-form DR-PG covariance, exposed separately so each
/// can be checked for positive semidefiniteness: per step n,
///   reward: V_{n+1}[r_n] (sum_{t<=n} grad log pi_t)(...)^T
///   action: Cov over a_n | s_n of [grad Q_n - grad Qtilde_n
///                                  + (sum_{t<=n} grad log pi_t)(Q_n - Qtilde_n)]
///   state:  Cov over s_n of [grad V_n + (sum_{t<n} grad log pi_t) V_n]
/// with all conditional moments computed by exact prefix enumeration.
struct Theorem2Terms {
    Mat reward_term;
    Mat action_term;
    Mat state_term;

    Mat total() const {
        Mat m = reward_term;
        m += action_term;
        m += state_term;
        return m;
    }
};

inline Theorem2Terms theorem2_covariance_terms(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                               const QModel& model) {
    mdp.check_policy(policy);
    const int d = policy.dim();
    const ValueTables vt = value_tables(mdp, policy);
    const GradientTables gt = gradient_tables(mdp, policy);

    // Model tables at the current policy.
    std::vector<Vec> q_tilde(mdp.num_states, zeros(mdp.num_actions));
    std::vector<std::vector<Vec>> q_tilde_grad(mdp.num_states, std::vector<Vec>(mdp.num_actions));
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) {
            q_tilde[s][a] = model.q_value(policy, s, a);
            q_tilde_grad[s][a] = model.q_grad(policy, s, a);
        }

    Theorem2Terms terms{Mat(d), Mat(d), Mat(d)};

    // DFS over state-action prefixes. `score` is sum_{t' < t} grad log pi_{t'} on
    // entry; p is the prefix probability, disc2 = gamma^{2t}.
    auto dfs = [&](auto&& self, int s, int t, double p, double disc2, const Vec& score) -> void {
        const Vec probs = policy.action_probs(s);

        // Action term at step t, conditioned on the prefix and s_t.
        {
            std::vector<Vec> pts(mdp.num_actions);
            for (int a = 0; a < mdp.num_actions; ++a) {
                Vec w = gt.q_grad[s][a];
                axpy(w, -1.0, q_tilde_grad[s][a]);
                Vec cum = score;
                axpy(cum, 1.0, policy.grad_log_prob(s, a));
                axpy(w, vt.q[s][a] - q_tilde[s][a], cum);
                pts[a] = std::move(w);
            }
            Mat cov = weighted_covariance(probs, pts);
            cov *= p * disc2;
            terms.action_term += cov;
        }

        for (int a = 0; a < mdp.num_actions; ++a) {
            const double pa = p * probs[a];
            if (pa == 0.0) continue;
            Vec score2 = score;
            axpy(score2, 1.0, policy.grad_log_prob(s, a));

            // Reward term at step t.
            terms.reward_term.add_outer(score2, score2, disc2 * pa * mdp.reward_variance(s, a));

            if (t < mdp.horizon) {
                // State term at step t+1, conditioned on the prefix through a_t.
                const auto& tdist = mdp.transitions[s][a];
                std::vector<double> ws;
                std::vector<Vec> pts;
                for (const auto& out : tdist) {
                    Vec u = gt.v_grad[out.state];
                    axpy(u, vt.v[out.state], score2);
                    ws.push_back(out.p);
                    pts.push_back(std::move(u));
                }
                Mat cov = weighted_covariance(ws, pts);
                const double g2 = mdp.gamma * mdp.gamma;
                cov *= pa * disc2 * g2;
                terms.state_term += cov;
                for (const auto& out : tdist)
                    if (out.p > 0.0) self(self, out.state, t + 1, pa * out.p, disc2 * g2, score2);
            }
        }
    };
    dfs(dfs, mdp.start_state, 0, 1.0, 1.0, zeros(d));
    return terms;
}

inline Mat theorem2_covariance(const TabularMdp& mdp, const SoftmaxPolicy& policy, const QModel& model) {
    return theorem2_covariance_terms(mdp, policy, model).total();
}

/// Per-row closed forms for the PG variance column in deterministic MDPs:
/// E[sum_t gamma^{2t} Cov_t[ grad Q_t + c_t * sum_{t'<=t} grad log pi_{t'} | s_t ]]
/// with c = Q (step-IS row), c = A = Q - V (baseline row with b == V), and the
/// DR row with exact constant Qtilde, Cov_t[grad Q_t | s_t].
enum class Table1Row { StepIs, BaselineV, DrConstantExactQ };

inline Mat table1_row_covariance(const TabularMdp& mdp, const SoftmaxPolicy& policy, Table1Row row) {
    mdp.check_policy(policy);
    const int d = policy.dim();
    const ValueTables vt = value_tables(mdp, policy);
    const GradientTables gt = gradient_tables(mdp, policy);
    Mat total(d);

    auto dfs = [&](auto&& self, int s, int t, double p, double disc2, const Vec& score) -> void {
        const Vec probs = policy.action_probs(s);
        std::vector<Vec> pts(mdp.num_actions);
        for (int a = 0; a < mdp.num_actions; ++a) {
            Vec w = gt.q_grad[s][a];
            if (row != Table1Row::DrConstantExactQ) {
                const double c = (row == Table1Row::StepIs) ? vt.q[s][a] : vt.q[s][a] - vt.v[s];
                Vec cum = score;
                axpy(cum, 1.0, policy.grad_log_prob(s, a));
                axpy(w, c, cum);
            }
            pts[a] = std::move(w);
        }
        Mat cov = weighted_covariance(probs, pts);
        cov *= p * disc2;
        total += cov;

        if (t < mdp.horizon) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                const double pa = p * probs[a];
                if (pa == 0.0) continue;
                Vec score2 = score;
                axpy(score2, 1.0, policy.grad_log_prob(s, a));
                for (const auto& out : mdp.transitions[s][a])
                    if (out.p > 0.0)
                        self(self, out.state, t + 1, pa * out.p, disc2 * mdp.gamma * mdp.gamma, score2);
            }
        }
    };
    dfs(dfs, mdp.start_state, 0, 1.0, 1.0, zeros(d));
    return total;
}

/// Monte Carlo sample covariance plus the MSE against the exact policy gradient
/// and a standard error for the trace estimate.
struct McCovariance {
    Mat cov;
    double mse = 0.0;       // mean squared error vs exact_policy_gradient
    double trace_se = 0.0;  // standard error of trace(cov)
};

inline McCovariance mc_covariance(const TabularMdp& mdp, const SoftmaxPolicy& policy, const PgFn& estimator,
                                  int n_samples, std::uint64_t seed) {
    if (n_samples < 2) throw std::invalid_argument("mc_covariance: need at least 2 samples");
    const int d = policy.dim();
    const Vec exact = exact_policy_gradient(mdp, policy);

    std::vector<Vec> samples;
    samples.reserve(n_samples);
    double mse = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        // One stream per trial index, so partitioned parallel runs reproduce this.
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(k) * 0x9e3779b97f4a7c15ULL);
        samples.push_back(estimator(sample_trajectory(mdp, policy, rng)));
        Vec diff = samples.back();
        axpy(diff, -1.0, exact);
        mse += dot(diff, diff);
    }
    mse /= n_samples;

    Vec mean = zeros(d);
    for (const Vec& g : samples) axpy(mean, 1.0 / n_samples, g);
    Mat cov(d);
    double sq_mean = 0.0, sq_sq = 0.0;
    for (const Vec& g : samples) {
        Vec diff = g;
        axpy(diff, -1.0, mean);
        cov.add_outer(diff, diff, 1.0 / (n_samples - 1));
        const double sq = dot(diff, diff);
        sq_mean += sq;
        sq_sq += sq * sq;
    }
    sq_mean /= n_samples;
    const double var_sq = sq_sq / n_samples - sq_mean * sq_mean;
    return {cov, mse, std::sqrt(std::max(var_sq, 0.0) / n_samples)};
}

struct VarianceRow {
    std::string estimator;
    std::string model;
    double trace = 0.0;
    double reduction_vs_vanilla = 0.0;  // (tr_vanilla - tr) / tr_vanilla
};

struct NamedEstimator {
    std::string estimator;
    std::string model;
    PgFn fn;
};

/// Brute-force traces and reduction ratios against vanilla PG.
inline std::vector<VarianceRow> variance_table(const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                               const std::vector<NamedEstimator>& estimators) {
    const double tr_vanilla =
        brute_force_covariance(mdp, policy, [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }).trace();
    std::vector<VarianceRow> rows;
    for (const auto& e : estimators) {
        const double tr = brute_force_covariance(mdp, policy, e.fn).trace();
        rows.push_back({e.estimator, e.model, tr, tr_vanilla > 0.0 ? (tr_vanilla - tr) / tr_vanilla : 0.0});
    }
    return rows;
}

}  // namespace pgope
