#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pgope/dp.hpp"
#include "pgope/generators.hpp"

using namespace pgope;

namespace {

// Enumeration oracle for J(pi): sum over the full trajectory support.
double enumerated_return(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    double j = 0.0;
    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) j += p * discounted_return(mdp, traj);
    return j;
}

}  // namespace

TEST_CASE("value tables match the enumeration oracle") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        const TabularMdp mdp = make_random_dag(3, 2, 3, 0.9, seed);
        const SoftmaxPolicy policy = random_policy(mdp, seed + 10);
        CHECK(exact_return(mdp, policy) == doctest::Approx(enumerated_return(mdp, policy)).epsilon(1e-12));
    }
}

TEST_CASE("q and v satisfy the Bellman consistency relations") {
    const TabularMdp mdp = make_gridlike(3, 2, 3, 0.85, 4);
    const SoftmaxPolicy policy = random_policy(mdp, 5);
    const ValueTables vt = value_tables(mdp, policy);
    for (int s = 0; s < mdp.num_states; ++s) {
        const Vec probs = policy.action_probs(s);
        double v = 0.0;
        for (int a = 0; a < mdp.num_actions; ++a) {
            double q = mdp.reward_mean(s, a);
            for (const auto& out : mdp.transitions[s][a]) q += mdp.gamma * out.p * vt.v[out.state];
            CHECK(vt.q[s][a] == doctest::Approx(q).epsilon(1e-14));
            v += probs[a] * q;
        }
        CHECK(vt.v[s] == doctest::Approx(v).epsilon(1e-14));
    }
}

TEST_CASE("gradient tables match central finite differences of the value tables") {
    const TabularMdp mdp = make_random_dag(3, 2, 2, 0.9, 8);
    const SoftmaxPolicy policy = random_policy(mdp, 9);
    const GradientTables gt = gradient_tables(mdp, policy);
    const double eps = 1e-6;

    for (int i = 0; i < policy.dim(); ++i) {
        const ValueTables plus = value_tables(mdp, policy.perturb(i, eps));
        const ValueTables minus = value_tables(mdp, policy.perturb(i, -eps));
        for (int s = 0; s < mdp.num_states; ++s) {
            CHECK(gt.v_grad[s][i] == doctest::Approx((plus.v[s] - minus.v[s]) / (2 * eps)).epsilon(1e-6));
            for (int a = 0; a < mdp.num_actions; ++a)
                CHECK(gt.q_grad[s][a][i] ==
                      doctest::Approx((plus.q[s][a] - minus.q[s][a]) / (2 * eps)).epsilon(1e-6));
        }
    }
}

TEST_CASE("exact_policy_gradient matches finite differences of J") {
    const TabularMdp mdp = make_gridlike(2, 3, 2, 0.95, 12);
    const SoftmaxPolicy policy = random_policy(mdp, 13);
    const Vec g = exact_policy_gradient(mdp, policy);
    const double eps = 1e-6;
    for (int i = 0; i < policy.dim(); ++i) {
        const double fd =
            (exact_return(mdp, policy.perturb(i, eps)) - exact_return(mdp, policy.perturb(i, -eps))) / (2 * eps);
        CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("values and gradients vanish for unreachable parameter blocks only via pi") {
    // On a chain with a single state per layer, grad V(s_T) has support only in
    // the s_T logit block, and is zero when all actions have equal reward.
    TabularMdp mdp = make_chain(2, 2, 0.9, 3);
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) mdp.rewards[s][a] = {{0.5, 1.0}};
    const SoftmaxPolicy policy = random_policy(mdp, 3);
    const GradientTables gt = gradient_tables(mdp, policy);
    CHECK(max_abs(gt.v_grad[mdp.start_state]) < 1e-14);
}
