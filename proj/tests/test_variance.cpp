#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pgope/generators.hpp"
#include "pgope/variance.hpp"

using namespace pgope;

TEST_CASE("the closed-form covariance matches brute force for every model variant") {
    const TabularMdp mdp = make_random_dag(3, 2, 3, 0.9, 1);
    const SoftmaxPolicy policy = random_policy(mdp, 2);
    std::mt19937_64 rng(3);
    const std::vector<std::pair<std::string, QModel>> models = {
        {"zero", QModel::zero()},
        {"constant-noisy", noisy_constant(mdp, policy, 0.5, rng)},
        {"state-baseline", QModel::state_baseline(value_tables(mdp, policy).v)},
        {"frozen-linear-noisy", noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng)},
        {"exact-dp", QModel::exact_dp(mdp)}};
    for (const auto& [name, m] : models) {
        CAPTURE(name);
        const Mat closed = theorem2_covariance(mdp, policy, m);
        const Mat brute =
            brute_force_covariance(mdp, policy, [&](const Trajectory& t) { return drpg(mdp, t, policy, m); });
        CHECK((closed - brute).frobenius() / brute.frobenius() < 1e-8);
        CHECK(closed.asymmetry() < 1e-12);
    }
}

TEST_CASE("each of the three covariance terms is positive semidefinite") {
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 4);
    const SoftmaxPolicy policy = random_policy(mdp, 5);
    std::mt19937_64 rng(6);
    for (const QModel& m : {QModel::zero(), noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng), QModel::exact_dp(mdp)}) {
        const Theorem2Terms terms = theorem2_covariance_terms(mdp, policy, m);
        CHECK(min_eigenvalue(terms.reward_term) >= -1e-9);
        CHECK(min_eigenvalue(terms.action_term) >= -1e-9);
        CHECK(min_eigenvalue(terms.state_term) >= -1e-9);
    }
}

TEST_CASE("zero variance holds exactly when the MDP is deterministic and the model is exact") {
    const TabularMdp det = make_gridlike(2, 2, 3, 0.9, 7, /*deterministic=*/true);
    const SoftmaxPolicy policy = random_policy(det, 8);
    const QModel exact = QModel::exact_dp(det);
    const Vec g = exact_policy_gradient(det, policy);

    // Forward direction: every single trajectory already produces the exact gradient.
    for (const auto& [traj, p] : enumerate_trajectories(det, policy)) {
        (void)p;
        CHECK(max_abs_diff(drpg(det, traj, policy, exact), g) < 1e-9);
    }
    CHECK(theorem2_covariance(det, policy, exact).trace() <= 1e-18);

    // Dropping the model's gradient information reintroduces variance...
    const QModel constant = exact.constant_snapshot(policy, det);
    const double tr_const = theorem2_covariance(det, policy, constant).trace();
    CHECK(tr_const > 1e-6);
    // ...whose closed form is E[sum_t gamma^{2t} Cov_t[grad Q_t | s_t]].
    CHECK(std::abs(tr_const - table1_row_covariance(det, policy, Table1Row::DrConstantExactQ).trace()) < 1e-8);

    // Converse: on a stochastic MDP even the exact model leaves variance behind.
    const TabularMdp stoch = make_gridlike(2, 2, 2, 0.9, 9);
    const SoftmaxPolicy pol2 = random_policy(stoch, 10);
    CHECK(theorem2_covariance(stoch, pol2, QModel::exact_dp(stoch)).trace() > 1e-6);
}

TEST_CASE("the per-row closed forms match brute force on a deterministic MDP") {
    const TabularMdp mdp = make_gridlike(2, 2, 3, 0.9, 11, /*deterministic=*/true);
    const SoftmaxPolicy policy = random_policy(mdp, 12);
    const Vec v = value_tables(mdp, policy).v;
    const QModel constant = QModel::exact_dp(mdp).constant_snapshot(policy, mdp);

    const std::vector<std::pair<Table1Row, PgFn>> rows = {
        {Table1Row::StepIs, [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }},
        {Table1Row::BaselineV, [&](const Trajectory& t) { return baseline_pg(mdp, t, policy, v); }},
        {Table1Row::DrConstantExactQ, [&](const Trajectory& t) { return drpg(mdp, t, policy, constant); }}};
    for (const auto& [row, fn] : rows) {
        const Mat closed = table1_row_covariance(mdp, policy, row);
        const Mat brute = brute_force_covariance(mdp, policy, fn);
        CHECK((closed - brute).frobenius() / std::max(brute.frobenius(), 1e-30) < 1e-10);
    }
}

TEST_CASE("monte carlo covariance is reproducible and consistent with brute force") {
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 13);
    const SoftmaxPolicy policy = random_policy(mdp, 14);
    const PgFn fn = [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); };

    const McCovariance a = mc_covariance(mdp, policy, fn, 20000, 99);
    const McCovariance b = mc_covariance(mdp, policy, fn, 20000, 99);
    CHECK((a.cov - b.cov).max_abs() == 0.0);
    CHECK(a.mse == b.mse);

    const double exact_trace = brute_force_covariance(mdp, policy, fn).trace();
    CHECK(std::abs(a.cov.trace() - exact_trace) < 5.0 * a.trace_se);
    // An unbiased estimator's MSE is its covariance trace, up to sampling noise.
    CHECK(a.mse == doctest::Approx(exact_trace).epsilon(0.1));

    CHECK_THROWS_AS(mc_covariance(mdp, policy, fn, 1, 0), std::invalid_argument);
}

TEST_CASE("the variance table reports vanishing reduction for vanilla itself") {
    const TabularMdp mdp = make_gridlike(2, 2, 2, 0.9, 15);
    const SoftmaxPolicy policy = random_policy(mdp, 16);
    const QModel exact = QModel::exact_dp(mdp);
    const auto rows = variance_table(
        mdp, policy,
        {{"vanilla-pg", "-", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }},
         {"drpg", "exact-dp", [&](const Trajectory& t) { return drpg(mdp, t, policy, exact); }}});
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(rows[0].reduction_vs_vanilla) < 1e-12);
    CHECK(rows[1].trace < rows[0].trace);
    CHECK(rows[1].reduction_vs_vanilla > 0.0);
}
