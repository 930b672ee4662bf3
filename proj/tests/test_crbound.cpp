#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pgope/crbound.hpp"
#include "pgope/generators.hpp"
#include "pgope/variance.hpp"

using namespace pgope;

TEST_CASE("check_tree certifies trees and rejects state merging") {
    const TabularMdp tree = make_tree(2, 2, 2, 0.9, 1);
    CHECK(check_tree(tree).valid);

    // A chain with two actions merges at every next state: not a tree.
    const TabularMdp chain = make_chain(2, 2, 0.9, 2);
    const TreeCertificate cert = check_tree(chain);
    CHECK_FALSE(cert.valid);
    CHECK(cert.violating_state == 1);
    CHECK_THROWS_AS(tree_cr_bound(chain, random_policy(chain, 3), 0), std::invalid_argument);

    // Single-action chains are trees (one parent pair per state).
    CHECK(check_tree(make_chain(3, 1, 0.9, 4)).valid);

    const TabularMdp dag = make_random_dag(3, 2, 3, 0.9, 5);
    CHECK_FALSE(check_tree(dag).valid);
}

TEST_CASE("tree and general bounds agree on trees") {
    const TabularMdp mdp = make_tree(2, 2, 2, 0.9, 6);
    const SoftmaxPolicy policy = random_policy(mdp, 7);
    for (int i = 0; i < policy.dim(); ++i)
        CHECK(std::abs(tree_cr_bound(mdp, policy, i) - dag_cr_bound(mdp, policy, i)) < 1e-10);
}

TEST_CASE("the exact-model DR-PG variance attains the bound on a tree") {
    const TabularMdp mdp = make_tree(2, 2, 2, 0.9, 8);
    const SoftmaxPolicy policy = random_policy(mdp, 9);
    const Mat cov = theorem2_covariance(mdp, policy, QModel::exact_dp(mdp));
    for (int i = 0; i < policy.dim(); ++i) {
        const double bound = tree_cr_bound(mdp, policy, i);
        CHECK(std::abs(cov(i, i) - bound) < 1e-8);
    }
}

TEST_CASE("no unbiased estimator in the family undercuts the bound") {
    const TabularMdp mdp = make_tree(2, 2, 2, 0.9, 10);
    const SoftmaxPolicy policy = random_policy(mdp, 11);
    std::mt19937_64 rng(12);
    const Vec v = value_tables(mdp, policy).v;
    const QModel noisy = noisy_frozen_linear(mdp, policy, 0.5, 0.5, rng);
    const QModel exact = QModel::exact_dp(mdp);

    const std::vector<std::pair<std::string, PgFn>> ests = {
        {"reinforce", [&](const Trajectory& t) { return reinforce(mdp, t, policy); }},
        {"vanilla-pg", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }},
        {"baseline-pg-v", [&](const Trajectory& t) { return baseline_pg(mdp, t, policy, v); }},
        {"drpg-noisy", [&](const Trajectory& t) { return drpg(mdp, t, policy, noisy); }},
        {"drpg-exact", [&](const Trajectory& t) { return drpg(mdp, t, policy, exact); }}};
    for (const auto& [name, fn] : ests) {
        CAPTURE(name);
        const Mat cov = brute_force_covariance(mdp, policy, fn);
        for (int i = 0; i < policy.dim(); ++i) CHECK(cov(i, i) >= tree_cr_bound(mdp, policy, i) - 1e-9);
    }
}

TEST_CASE("on a merging DAG the general bound still sits below the DR-PG variance") {
    const TabularMdp mdp = make_random_dag(3, 2, 3, 0.9, 13);
    const SoftmaxPolicy policy = random_policy(mdp, 14);
    REQUIRE_FALSE(check_tree(mdp).valid);
    const Mat cov = theorem2_covariance(mdp, policy, QModel::exact_dp(mdp));
    for (int i = 0; i < policy.dim(); ++i) {
        const double bound = dag_cr_bound(mdp, policy, i);
        CHECK(bound >= 0.0);
        CHECK(cov(i, i) >= bound - 1e-9);
    }
}

TEST_CASE("both bounds vanish where the gradient carries no randomness") {
    // Deterministic single-action chain: no reward variance, no branching, and a
    // constant score, so the bound is exactly zero everywhere.
    const TabularMdp mdp = make_chain(2, 1, 0.9, 15);
    const SoftmaxPolicy policy = random_policy(mdp, 16);
    for (int i = 0; i < policy.dim(); ++i) {
        CHECK(tree_cr_bound(mdp, policy, i) == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(dag_cr_bound(mdp, policy, i) == doctest::Approx(0.0).epsilon(1e-14));
    }
}
