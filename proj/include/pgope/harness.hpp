#pragma once

#include <filesystem>
#include <fstream>
#include <optional>

#include "pgope/crbound.hpp"
#include "pgope/generators.hpp"
#include "pgope/io.hpp"
#include "pgope/variance.hpp"

namespace pgope {

/// Experiment description loaded from a JSON config file.
struct ExperimentConfig {
    std::string mdp_path;
    std::optional<Vec> policy_logits;  // inline flat array; otherwise seeded random
    std::uint64_t policy_seed = 1;
    std::string model_variant = "exact-dp";  // zero|constant|state-baseline|frozen-linear|exact-dp
    double model_noise = 0.0;
    std::uint64_t seed = 0;
    int n_samples = 0;
    double eps = 1e-5;

    static ExperimentConfig from_json(const json& j) {
        ExperimentConfig c;
        c.mdp_path = j.at("mdp").get<std::string>();
        if (j.contains("policy_logits")) c.policy_logits = j.at("policy_logits").get<Vec>();
        if (j.contains("policy_seed")) c.policy_seed = j.at("policy_seed").get<std::uint64_t>();
        if (j.contains("model")) {
            const auto& m = j.at("model");
            if (m.contains("variant")) c.model_variant = m.at("variant").get<std::string>();
            if (m.contains("noise")) c.model_noise = m.at("noise").get<double>();
        }
        c.seed = j.at("seed").get<std::uint64_t>();  // mandatory: every sampling suite needs it
        if (j.contains("n_samples")) c.n_samples = j.at("n_samples").get<int>();
        if (j.contains("eps")) c.eps = j.at("eps").get<double>();
        return c;
    }

    static ExperimentConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config file: " + path);
        json j;
        in >> j;
        return from_json(j);
    }
};

struct CheckResult {
    std::string suite;
    std::string name;
    double value = 0.0;      // the measured quantity
    double threshold = 0.0;  // the pinned tolerance it is compared against
    bool pass = false;
};

struct SuiteReport {
    std::vector<CheckResult> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline QModel build_model(const std::string& variant, double noise, const TabularMdp& mdp,
                          const SoftmaxPolicy& policy, std::mt19937_64& rng) {
    if (variant == "zero") return QModel::zero();
    if (variant == "constant") return noisy_constant(mdp, policy, noise, rng);
    if (variant == "state-baseline") {
        Vec b(mdp.num_states);
        const ValueTables vt = value_tables(mdp, policy);
        for (int s = 0; s < mdp.num_states; ++s)
            b[s] = vt.v[s] + (noise > 0 ? noise * std::normal_distribution<double>(0.0, 1.0)(rng) : 0.0);
        return QModel::state_baseline(std::move(b));
    }
    if (variant == "frozen-linear") return noisy_frozen_linear(mdp, policy, noise, noise, rng);
    if (variant == "exact-dp") return QModel::exact_dp(mdp);
    throw std::invalid_argument("unknown model variant: " + variant);
}

inline const std::vector<std::string>& all_variants() {
    static const std::vector<std::string> v = {"zero", "constant", "state-baseline", "frozen-linear", "exact-dp"};
    return v;
}

/// Exact expectation of a PG estimator over the enumerated trajectory law.
inline Vec expected_gradient(const TabularMdp& mdp, const SoftmaxPolicy& policy, const PgFn& fn) {
    Vec mean;
    for (const auto& [traj, p] : enumerate_trajectories(mdp, policy)) {
        const Vec g = fn(traj);
        if (mean.empty()) mean = zeros(g.size());
        axpy(mean, p, g);
    }
    return mean;
}

inline std::vector<Vec> exact_q_table(const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    const ValueTables vt = value_tables(mdp, policy);
    return vt.q;
}

}  // namespace detail

/// The finite-difference correspondence suite: every (OPE, PG) pair, pathwise,
/// over all enumerated trajectories.
inline SuiteReport run_correspondence_suite(const ExperimentConfig& cfg, const TabularMdp& mdp,
                                            const SoftmaxPolicy& policy) {
    constexpr double kTol = 1e-6;
    std::mt19937_64 rng(cfg.seed);
    SuiteReport report;

    std::vector<CorrespondencePair> pairs;
    pairs.push_back({"traj-is"});
    pairs.push_back({"step-is"});
    {
        CorrespondencePair p{"baseline"};
        p.baseline.resize(mdp.num_states);
        for (double& b : p.baseline) b = 2.0 * detail::u01(rng) - 1.0;
        pairs.push_back(std::move(p));
    }
    {
        CorrespondencePair p{"dr"};
        p.model = noisy_frozen_linear(mdp, policy, 0.3, 0.3, rng);
        p.name = "dr-frozen-linear";
        pairs.push_back(std::move(p));
    }
    {
        CorrespondencePair p{"dr"};
        p.model = QModel::exact_dp(mdp);
        p.name = "dr-exact-dp";
        pairs.push_back(std::move(p));
    }
    {
        CorrespondencePair p{"dr-constant"};
        p.model = noisy_constant(mdp, policy, 0.3, rng);
        pairs.push_back(std::move(p));
    }
    {
        CorrespondencePair p{"actor-critic"};
        p.critic = detail::exact_q_table(mdp, policy);
        pairs.push_back(std::move(p));
    }

    for (auto& p : pairs) {
        CorrespondencePair run = p;
        if (run.name == "dr-frozen-linear" || run.name == "dr-exact-dp") run.name = "dr";
        const CorrespondenceReport r = verify_correspondence(run, mdp, policy, cfg.eps);
        report.checks.push_back({"correspondence", p.name, r.max_deviation, kTol, r.max_deviation <= kTol});
    }
    return report;
}

/// Exact-expectation unbiasedness checks plus the actor-critic bias witness.
inline SuiteReport run_unbiasedness_suite(const ExperimentConfig& cfg, const TabularMdp& mdp,
                                          const SoftmaxPolicy& policy) {
    constexpr double kTol = 1e-10;
    std::mt19937_64 rng(cfg.seed + 1);
    SuiteReport report;
    const Vec exact = exact_policy_gradient(mdp, policy);

    auto check = [&](const std::string& name, const PgFn& fn) {
        const double bias = max_abs_diff(detail::expected_gradient(mdp, policy, fn), exact);
        report.checks.push_back({"unbiasedness", name, bias, kTol, bias <= kTol});
    };

    check("reinforce", [&](const Trajectory& t) { return reinforce(mdp, t, policy); });
    check("vanilla-pg", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); });
    for (int k = 0; k < 3; ++k) {
        Vec b(mdp.num_states);
        for (double& x : b) x = 2.0 * detail::u01(rng) - 1.0;
        check("baseline-pg-" + std::to_string(k), [&, b](const Trajectory& t) { return baseline_pg(mdp, t, policy, b); });
    }
    const double noise = cfg.model_noise > 0 ? cfg.model_noise : 0.5;
    for (const std::string& variant : detail::all_variants()) {
        const QModel model = detail::build_model(variant, noise, mdp, policy, rng);
        check("drpg-" + variant, [&, model](const Trajectory& t) { return drpg(mdp, t, policy, model); });
        check("trajcv-pg-" + variant, [&, model](const Trajectory& t) { return trajcv_pg(mdp, t, policy, model); });
    }

    // Actor-critic: biased for a generic critic, unbiased for the exact Q.
    std::vector<Vec> f_rand(mdp.num_states, zeros(mdp.num_actions));
    for (auto& row : f_rand)
        for (double& x : row) x = 2.0 * detail::u01(rng) - 1.0;
    const double bias_rand = max_abs_diff(
        detail::expected_gradient(mdp, policy, [&](const Trajectory& t) { return actor_critic_pg(mdp, t, policy, f_rand); }),
        exact);
    report.checks.push_back({"unbiasedness", "actor-critic-random-f-bias-witness", bias_rand, 1e-3, bias_rand > 1e-3});
    check("actor-critic-exact-q", [&, f = detail::exact_q_table(mdp, policy)](const Trajectory& t) {
        return actor_critic_pg(mdp, t, policy, f);
    });
    return report;
}

/// Theorem-2 closed form vs brute force for every model variant, the reduction
/// table, and Monte Carlo consistency when n_samples is set.
inline SuiteReport run_variance_suite(const ExperimentConfig& cfg, const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                      const std::string& out_dir) {
    constexpr double kRelTol = 1e-8;
    std::mt19937_64 rng(cfg.seed + 2);
    SuiteReport report;
    const double noise = cfg.model_noise > 0 ? cfg.model_noise : 0.5;

    std::vector<NamedEstimator> table_rows;
    table_rows.push_back({"vanilla-pg", "-", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }});
    for (const std::string& variant : detail::all_variants()) {
        const QModel model = detail::build_model(variant, noise, mdp, policy, rng);
        const Mat closed = theorem2_covariance(mdp, policy, model);
        const Mat brute =
            brute_force_covariance(mdp, policy, [&](const Trajectory& t) { return drpg(mdp, t, policy, model); });
        // Mixed relative/absolute error: relative at ordinary scales, absolute
        // when the covariance is exactly zero (deterministic MDP, exact model).
        const double rel = (closed - brute).frobenius() / std::max(brute.frobenius(), 1.0);
        report.checks.push_back({"variance", "theorem2-vs-brute-force-" + variant, rel, kRelTol, rel <= kRelTol});
        table_rows.push_back({"drpg", variant, [&, model](const Trajectory& t) { return drpg(mdp, t, policy, model); }});
    }

    const auto rows = variance_table(mdp, policy, table_rows);
    if (!out_dir.empty()) {
        std::ofstream csv(out_dir + "/variance_table.csv");
        csv << "estimator,model,trace,reduction_vs_vanilla\n";
        for (const auto& r : rows)
            csv << r.estimator << "," << r.model << "," << fmt(r.trace) << "," << fmt(r.reduction_vs_vanilla) << "\n";
    }

    if (cfg.n_samples >= 2) {
        const QModel exact_model = QModel::exact_dp(mdp);
        const std::vector<std::pair<std::string, PgFn>> mc_targets = {
            {"vanilla-pg", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }},
            {"drpg-exact-dp", [&](const Trajectory& t) { return drpg(mdp, t, policy, exact_model); }}};
        for (const auto& [name, fn] : mc_targets) {
            const double brute_trace = brute_force_covariance(mdp, policy, fn).trace();
            const McCovariance mc = mc_covariance(mdp, policy, fn, cfg.n_samples, cfg.seed);
            // Absolute floor: a zero-variance estimator has SE 0 up to rounding.
            const double margin = 5.0 * mc.trace_se + 1e-12;
            const double dev = std::abs(mc.cov.trace() - brute_trace);
            report.checks.push_back({"variance", "mc-trace-consistency-" + name, dev, margin, dev <= margin});
        }
    }
    return report;
}

/// CR-bound computation, attainment by DR-PG with exact side information, and the
/// lower-bound property for the unbiased estimators in the suite.
inline SuiteReport run_crbound_suite(const ExperimentConfig& cfg, const TabularMdp& mdp, const SoftmaxPolicy& policy,
                                     const std::string& out_dir) {
    SuiteReport report;
    const int d = policy.dim();
    const TreeCertificate cert = check_tree(mdp);
    const QModel exact_model = QModel::exact_dp(mdp);
    const Mat drpg_cov = theorem2_covariance(mdp, policy, exact_model);

    Vec bounds(d);
    for (int i = 0; i < d; ++i) bounds[i] = dag_cr_bound(mdp, policy, i);

    if (cert.valid) {
        double max_gap = 0.0, max_tree_dag_gap = 0.0;
        for (int i = 0; i < d; ++i) {
            const double tb = tree_cr_bound(mdp, policy, i);
            max_gap = std::max(max_gap, std::abs(drpg_cov(i, i) - tb));
            max_tree_dag_gap = std::max(max_tree_dag_gap, std::abs(tb - bounds[i]));
        }
        report.checks.push_back({"crbound", "drpg-attains-tree-bound", max_gap, 1e-8, max_gap <= 1e-8});
        report.checks.push_back(
            {"crbound", "tree-dag-bound-agreement", max_tree_dag_gap, 1e-10, max_tree_dag_gap <= 1e-10});
    }

    // Lower-bound property: unbiased estimators cannot beat the bound.
    const ValueTables vt = value_tables(mdp, policy);
    Vec v_baseline = vt.v;
    std::mt19937_64 rng(cfg.seed + 3);
    const QModel const_model = noisy_constant(mdp, policy, 0.0, rng);
    const std::vector<std::pair<std::string, PgFn>> estimators = {
        {"reinforce", [&](const Trajectory& t) { return reinforce(mdp, t, policy); }},
        {"vanilla-pg", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }},
        {"baseline-pg-v", [&](const Trajectory& t) { return baseline_pg(mdp, t, policy, v_baseline); }},
        {"trajcv-pg-exact-q", [&](const Trajectory& t) { return trajcv_pg(mdp, t, policy, const_model); }},
        {"drpg-exact-dp", [&](const Trajectory& t) { return drpg(mdp, t, policy, exact_model); }}};

    std::ofstream csv;
    if (!out_dir.empty()) {
        csv.open(out_dir + "/crbound.csv");
        csv << "coordinate,bound,drpg_variance,gap\n";
        for (int i = 0; i < d; ++i)
            csv << i << "," << fmt(bounds[i]) << "," << fmt(drpg_cov(i, i)) << ","
                << fmt(drpg_cov(i, i) - bounds[i]) << "\n";
    }

    for (const auto& [name, fn] : estimators) {
        const Mat cov = brute_force_covariance(mdp, policy, fn);
        double worst = 0.0;  // most negative variance-minus-bound margin
        for (int i = 0; i < d; ++i) worst = std::min(worst, cov(i, i) - bounds[i]);
        report.checks.push_back({"crbound", "lower-bound-" + name, worst, -1e-9, worst >= -1e-9});
    }
    return report;
}

/// Runs one named suite ("correspondence", "unbiasedness", "variance", "crbound",
/// or "all"), writes a CSV of check rows plus a plain-text summary to out_dir.
inline SuiteReport run_suite(const ExperimentConfig& cfg, const std::string& suite, const std::string& out_dir) {
    const TabularMdp mdp = load_mdp(cfg.mdp_path);
    const SoftmaxPolicy policy = cfg.policy_logits
                                     ? SoftmaxPolicy(mdp.num_states, mdp.num_actions, *cfg.policy_logits)
                                     : random_policy(mdp, cfg.policy_seed);
    mdp.check_policy(policy);
    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    SuiteReport report;
    auto append = [&report](const SuiteReport& r) {
        report.checks.insert(report.checks.end(), r.checks.begin(), r.checks.end());
    };

    if (suite == "correspondence" || suite == "all") append(run_correspondence_suite(cfg, mdp, policy));
    else if (suite != "unbiasedness" && suite != "variance" && suite != "crbound")
        throw std::invalid_argument("unknown suite: " + suite);
    if (suite == "unbiasedness" || suite == "all") append(run_unbiasedness_suite(cfg, mdp, policy));
    if (suite == "variance" || suite == "all") append(run_variance_suite(cfg, mdp, policy, out_dir));
    if (suite == "crbound" || suite == "all") append(run_crbound_suite(cfg, mdp, policy, out_dir));

    if (!out_dir.empty()) {
        std::ofstream csv(out_dir + "/" + suite + ".csv");
        csv << "suite,check,value,threshold,pass\n";
        for (const auto& c : report.checks)
            csv << c.suite << "," << c.name << "," << fmt(c.value) << "," << fmt(c.threshold) << ","
                << (c.pass ? "1" : "0") << "\n";
        std::ofstream summary(out_dir + "/" + suite + "_summary.txt");
        for (const auto& c : report.checks)
            summary << (c.pass ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " value=" << fmt(c.value)
                    << " threshold=" << fmt(c.threshold) << "\n";
        summary << (report.all_pass() ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED") << "\n";
    }
    return report;
}

}  // namespace pgope
