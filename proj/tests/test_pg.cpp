#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pgope/generators.hpp"
#include "pgope/pg.hpp"

using namespace pgope;

namespace {

template <typename F>
Vec expected_gradient(const TabularMdp& mdp, const SoftmaxPolicy& policy, F&& est) {
    Vec mean = zeros(policy.dim());
    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) axpy(mean, p, est(traj));
    return mean;
}

}  // namespace

TEST_CASE("score-function estimators are unbiased for the exact policy gradient") {
    const TabularMdp mdp = make_random_dag(3, 2, 3, 0.9, 1);
    const SoftmaxPolicy policy = random_policy(mdp, 2);
    const Vec exact = exact_policy_gradient(mdp, policy);
    std::mt19937_64 rng(3);

    CHECK(max_abs_diff(expected_gradient(mdp, policy, [&](const Trajectory& t) { return reinforce(mdp, t, policy); }),
                       exact) < 1e-11);
    CHECK(max_abs_diff(expected_gradient(mdp, policy, [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }),
                       exact) < 1e-11);

    Vec b(mdp.num_states);
    for (double& x : b) x = 2.0 * detail::u01(rng) - 1.0;
    CHECK(max_abs_diff(
              expected_gradient(mdp, policy, [&](const Trajectory& t) { return baseline_pg(mdp, t, policy, b); }),
              exact) < 1e-11);

    const std::vector<std::pair<std::string, QModel>> models = {
        {"zero", QModel::zero()},
        {"constant-noisy", noisy_constant(mdp, policy, 0.5, rng)},
        {"state-baseline", QModel::state_baseline(value_tables(mdp, policy).v)},
        {"frozen-linear-noisy", noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng)},
        {"exact-dp", QModel::exact_dp(mdp)}};
    for (const auto& [name, m] : models) {
        CAPTURE(name);
        CHECK(max_abs_diff(
                  expected_gradient(mdp, policy, [&](const Trajectory& t) { return drpg(mdp, t, policy, m); }),
                  exact) < 1e-11);
        CHECK(max_abs_diff(
                  expected_gradient(mdp, policy, [&](const Trajectory& t) { return trajcv_pg(mdp, t, policy, m); }),
                  exact) < 1e-11);
    }
}

TEST_CASE("the per-step correction terms have zero mean individually") {
    // Each step's control-variate contribution
    //   grad log pi_t * sum_{t2 > t} gamma^{t2} (Vtilde_{t2} - Qtilde_{t2})
    //   + gamma^t (grad Vtilde_t - grad Qtilde_t - Qtilde_t grad log pi_t)
    // integrates to zero on its own, not just in aggregate.
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 4);
    const SoftmaxPolicy policy = random_policy(mdp, 5);
    std::mt19937_64 rng(6);
    const QModel model = noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng);

    for (int t0 = 0; t0 <= mdp.horizon; ++t0) {
        Vec mean = zeros(policy.dim());
        for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
            const std::size_t n = traj.steps.size();
            const Step& step = traj.steps[t0];
            const double disc_t = std::pow(mdp.gamma, t0);
            Vec term = model.v_grad(policy, step.state);
            axpy(term, -1.0, model.q_grad(policy, step.state, step.action));
            axpy(term, -model.q_value(policy, step.state, step.action),
                 policy.grad_log_prob(step.state, step.action));
            scale(term, disc_t);
            double corr = 0.0;
            for (std::size_t t2 = t0 + 1; t2 < n; ++t2) {
                const Step& s2 = traj.steps[t2];
                corr += std::pow(mdp.gamma, static_cast<double>(t2)) *
                        (model.v_value(policy, s2.state) - model.q_value(policy, s2.state, s2.action));
            }
            axpy(term, corr, policy.grad_log_prob(step.state, step.action));
            axpy(mean, p, term);
        }
        CAPTURE(t0);
        CHECK(max_abs(mean) < 1e-12);
    }
}

TEST_CASE("expanded and recursive DR-PG agree pathwise") {
    const TabularMdp mdp = make_random_dag(3, 2, 3, 0.85, 7);
    const SoftmaxPolicy policy = random_policy(mdp, 8);
    std::mt19937_64 rng(9);
    for (const QModel& m : {noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng), QModel::exact_dp(mdp)}) {
        for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
            (void)p;
            CHECK(max_abs_diff(drpg(mdp, traj, policy, m), drpg_recursive(mdp, traj, policy, m)) < 1e-12);
        }
    }
}

TEST_CASE("DR-PG reduces to the simpler estimators under degenerate models") {
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 10);
    const SoftmaxPolicy policy = random_policy(mdp, 11);
    std::mt19937_64 rng(12);
    Vec b(mdp.num_states);
    for (double& x : b) x = 2.0 * detail::u01(rng) - 1.0;
    const QModel zero = QModel::zero();
    const QModel state_b = QModel::state_baseline(b);
    const QModel constant = noisy_constant(mdp, policy, 0.5, rng);

    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
        (void)p;
        CHECK(max_abs_diff(drpg(mdp, traj, policy, zero), vanilla_pg(mdp, traj, policy)) < 1e-12);
        CHECK(max_abs_diff(drpg(mdp, traj, policy, state_b), baseline_pg(mdp, traj, policy, b)) < 1e-12);
        // Constant models carry no theta dependence, so the independently coded
        // trajectory-wise control variate must coincide with DR-PG.
        CHECK(max_abs_diff(drpg(mdp, traj, policy, constant), trajcv_pg(mdp, traj, policy, constant)) < 1e-12);
    }
}

TEST_CASE("actor-critic PG is unbiased exactly when the critic is the exact Q") {
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 13);
    const SoftmaxPolicy policy = random_policy(mdp, 14);
    const Vec exact = exact_policy_gradient(mdp, policy);

    const std::vector<Vec> q = value_tables(mdp, policy).q;
    CHECK(max_abs_diff(
              expected_gradient(mdp, policy, [&](const Trajectory& t) { return actor_critic_pg(mdp, t, policy, q); }),
              exact) < 1e-11);

    std::mt19937_64 rng(15);
    std::vector<Vec> f(mdp.num_states, zeros(mdp.num_actions));
    for (auto& row : f)
        for (double& x : row) x = 2.0 * detail::u01(rng) - 1.0;
    CHECK(max_abs_diff(
              expected_gradient(mdp, policy, [&](const Trajectory& t) { return actor_critic_pg(mdp, t, policy, f); }),
              exact) > 1e-3);
}
