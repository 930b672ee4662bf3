#pragma once

#include <functional>
#include <string>

#include "pgope/ope.hpp"
#include "pgope/pg.hpp"

namespace pgope {

/// An OPE estimator as a function of (trajectory, behavior, target).
using OpeFn = std::function<double(const Trajectory&, const SoftmaxPolicy& behavior, const SoftmaxPolicy& target)>;

/// A PG estimator as a function of one on-policy trajectory.
using PgFn = std::function<Vec(const Trajectory&)>;

/// Central finite difference of an OPE estimator over the target policy's
/// parameters, on one fixed trajectory:
///   coordinate i = [ope(theta + eps e_i) - ope(theta - eps e_i)] / (2 eps).
/// The behavior policy stays fixed; a theta-dependent QModel inside `ope` is
/// re-queried at the perturbed target.
inline Vec finite_diff_ope_gradient(const OpeFn& ope, const Trajectory& traj, const SoftmaxPolicy& policy,
                                    double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_diff_ope_gradient: eps must be positive");
    const int d = policy.dim();
    Vec g(d);
    for (int i = 0; i < d; ++i) {
        const double plus = ope(traj, policy, policy.perturb(i, eps));
        const double minus = ope(traj, policy, policy.perturb(i, -eps));
        if (!std::isfinite(plus) || !std::isfinite(minus))
            throw std::domain_error("finite_diff_ope_gradient: non-finite estimator value");
        g[i] = (plus - minus) / (2.0 * eps);
    }
    return g;
}

/// One named (OPE, PG) pair plus whatever side information it needs.
struct CorrespondencePair {
    std::string name;        // traj-is | step-is | baseline | dr | dr-constant | actor-critic
    QModel model = QModel::zero();
    Vec baseline;            // state -> real, for "baseline"
    std::vector<Vec> critic; // f(s, a) table, for "actor-critic"
};

/// Pathwise deviation between the finite-difference gradient of the OPE side and
/// the PG side, aggregated over all enumerated trajectories.
struct CorrespondenceReport {
    double eps = 0.0;
    double max_deviation = 0.0;
    std::vector<double> per_trajectory;  // aligned with enumerate_trajectories order
};

namespace detail {

inline std::pair<OpeFn, PgFn> correspondence_functions(const CorrespondencePair& pair, const TabularMdp& mdp,
                                                       const SoftmaxPolicy& policy) {
    if (pair.name == "traj-is") {
        return {[&mdp](const Trajectory& t, const SoftmaxPolicy& b, const SoftmaxPolicy& tg) { return traj_is(mdp, t, b, tg); },
                [&mdp, &policy](const Trajectory& t) { return reinforce(mdp, t, policy); }};
    }
    if (pair.name == "step-is") {
        return {[&mdp](const Trajectory& t, const SoftmaxPolicy& b, const SoftmaxPolicy& tg) { return step_is(mdp, t, b, tg); },
                [&mdp, &policy](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }};
    }
    if (pair.name == "baseline") {
        const Vec& b = pair.baseline;
        return {[&mdp, b](const Trajectory& t, const SoftmaxPolicy& beh, const SoftmaxPolicy& tg) {
                    return baseline_ope(mdp, t, beh, tg, b);
                },
                [&mdp, &policy, b](const Trajectory& t) { return baseline_pg(mdp, t, policy, b); }};
    }
    if (pair.name == "dr") {
        const QModel m = pair.model;
        return {[&mdp, m](const Trajectory& t, const SoftmaxPolicy& beh, const SoftmaxPolicy& tg) {
                    return dr_ope_expanded(mdp, t, beh, tg, m);
                },
                [&mdp, &policy, m](const Trajectory& t) { return drpg(mdp, t, policy, m); }};
    }
    if (pair.name == "dr-constant") {
        const QModel m = pair.model;
        return {[&mdp, m](const Trajectory& t, const SoftmaxPolicy& beh, const SoftmaxPolicy& tg) {
                    return dr_ope_expanded(mdp, t, beh, tg, m);
                },
                [&mdp, &policy, m](const Trajectory& t) { return trajcv_pg(mdp, t, policy, m); }};
    }
    if (pair.name == "actor-critic") {
        const std::vector<Vec> f = pair.critic;
        return {[&mdp, f](const Trajectory& t, const SoftmaxPolicy& beh, const SoftmaxPolicy& tg) {
                    return actor_critic_ope(mdp, t, beh, tg, f);
                },
                [&mdp, &policy, f](const Trajectory& t) { return actor_critic_pg(mdp, t, policy, f); }};
    }
    throw std::invalid_argument("unknown correspondence pair: " + pair.name);
}

}  // namespace detail

/// Checks the OPE -> PG correspondence on every enumerated positive-probability
/// trajectory. The claim is pathwise, not just in expectation.
inline CorrespondenceReport verify_correspondence(const CorrespondencePair& pair, const TabularMdp& mdp,
                                                  const SoftmaxPolicy& policy, double eps) {
    auto [ope, pg] = detail::correspondence_functions(pair, mdp, policy);
    CorrespondenceReport report;
    report.eps = eps;
    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
        (void)p;
        const Vec fd = finite_diff_ope_gradient(ope, traj, policy, eps);
        const double dev = max_abs_diff(fd, pg(traj));
        report.per_trajectory.push_back(dev);
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    return report;
}

}  // namespace pgope
