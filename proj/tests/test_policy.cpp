#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pgope/policy.hpp"

using namespace pgope;

TEST_CASE("action_probs is a strictly positive distribution, invariant to logit shifts") {
    SoftmaxPolicy p(2, 3, {0.3, -1.2, 2.0, 900.0, 901.0, 899.5});
    for (int s = 0; s < 2; ++s) {
        const Vec probs = p.action_probs(s);
        double sum = 0.0;
        for (double x : probs) {
            CHECK(x > 0.0);
            sum += x;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Shifting a state's logit row by a constant leaves the distribution unchanged.
    SoftmaxPolicy q(2, 3, {0.3 + 5.0, -1.2 + 5.0, 2.0 + 5.0, 900.0, 901.0, 899.5});
    const Vec a = p.action_probs(0), b = q.action_probs(0);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("grad_log_prob matches its closed form and a finite difference") {
    SoftmaxPolicy p(3, 2, {0.1, -0.4, 1.3, 0.2, -0.9, 0.6});
    const int s = 1, a = 0;
    const Vec g = p.grad_log_prob(s, a);
    const Vec probs = p.action_probs(s);

    // Closed form: coordinate (s, b) is 1{b=a} - pi(b|s); other states' coordinates are 0.
    for (int b = 0; b < 2; ++b)
        CHECK(g[p.coord(s, b)] == doctest::Approx((b == a ? 1.0 : 0.0) - probs[b]).epsilon(1e-14));
    for (int i = 0; i < p.dim(); ++i)
        if (i / 2 != s) CHECK(g[i] == 0.0);

    const double eps = 1e-6;
    for (int i = 0; i < p.dim(); ++i) {
        const double plus = std::log(p.perturb(i, eps).prob(s, a));
        const double minus = std::log(p.perturb(i, -eps).prob(s, a));
        CHECK(g[i] == doctest::Approx((plus - minus) / (2 * eps)).epsilon(1e-6));
    }
}

TEST_CASE("score coordinates of each state sum to zero") {
    SoftmaxPolicy p(2, 4, {0.5, -0.5, 1.0, 0.0, 2.0, -2.0, 0.3, 0.7});
    for (int s = 0; s < 2; ++s)
        for (int a = 0; a < 4; ++a) {
            const Vec g = p.grad_log_prob(s, a);
            double row = 0.0;
            for (int b = 0; b < 4; ++b) row += g[p.coord(s, b)];
            CHECK(std::abs(row) < 1e-14);
        }
}

TEST_CASE("perturb returns a copy; the original is unchanged") {
    SoftmaxPolicy p(1, 2, {0.0, 0.0});
    const SoftmaxPolicy q = p.perturb(1, 0.5);
    CHECK(p.logits()[1] == 0.0);
    CHECK(q.logits()[1] == 0.5);
}

TEST_CASE("constructor and accessors reject bad input") {
    CHECK_THROWS_AS(SoftmaxPolicy(0, 2), std::invalid_argument);
    CHECK_THROWS_AS(SoftmaxPolicy(2, 2, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(SoftmaxPolicy(1, 2, {0.0, std::nan("")}), std::invalid_argument);
    SoftmaxPolicy p(1, 2);
    CHECK_THROWS_AS(p.action_probs(1), std::out_of_range);
    CHECK_THROWS_AS(p.perturb(2, 0.1), std::out_of_range);
}
