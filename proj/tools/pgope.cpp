// Command-line driver for the tabular policy-gradient / off-policy-evaluation
// verification suites.
//
// Environment: PGOPE_ENUM_CAP caps the exact-enumeration support size
// (default 10^7); raise it for larger MDPs at your own expense.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "pgope/harness.hpp"

namespace {

using namespace pgope;

int run_suite_command(const std::string& suite, const std::string& config_path, const std::string& out_dir,
                      std::optional<std::uint64_t> seed_override) {
    ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
    if (seed_override) cfg.seed = *seed_override;
    const SuiteReport report = run_suite(cfg, suite, out_dir);
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.suite << "/" << c.name << " value=" << fmt(c.value)
                  << " threshold=" << fmt(c.threshold) << "\n";
    std::cout << (report.all_pass() ? "ALL CHECKS PASSED" : "SOME CHECKS FAILED") << "\n";
    return report.all_pass() ? 0 : 1;
}

QModel default_model_for_pair(const std::string& pair_name, const TabularMdp& mdp, const SoftmaxPolicy& policy) {
    if (pair_name == "dr") return QModel::exact_dp(mdp);
    if (pair_name == "dr-constant") return QModel::exact_dp(mdp).constant_snapshot(policy, mdp);
    return QModel::zero();
}

int verify_correspondence_command(const std::string& pair_name, const std::string& mdp_path, double eps,
                                  std::uint64_t policy_seed, const std::string& out_path) {
    const TabularMdp mdp = load_mdp(mdp_path);
    const SoftmaxPolicy policy = random_policy(mdp, policy_seed);

    CorrespondencePair pair;
    pair.name = pair_name;
    pair.model = default_model_for_pair(pair_name, mdp, policy);
    if (pair_name == "baseline") pair.baseline = value_tables(mdp, policy).v;
    if (pair_name == "actor-critic") pair.critic = value_tables(mdp, policy).q;

    const CorrespondenceReport report = verify_correspondence(pair, mdp, policy, eps);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write: " + out_path);
        out = &file;
    }
    *out << "trajectory,deviation\n";
    for (std::size_t k = 0; k < report.per_trajectory.size(); ++k)
        *out << k << "," << fmt(report.per_trajectory[k]) << "\n";
    std::cout << "pair=" << pair_name << " eps=" << fmt(eps) << " trajectories=" << report.per_trajectory.size()
              << " max_deviation=" << fmt(report.max_deviation) << "\n";
    return 0;
}

int variance_table_command(const std::string& mdp_path, std::uint64_t policy_seed, std::uint64_t seed, double noise,
                           const std::string& out_path) {
    const TabularMdp mdp = load_mdp(mdp_path);
    const SoftmaxPolicy policy = random_policy(mdp, policy_seed);
    std::mt19937_64 rng(seed);

    std::vector<NamedEstimator> rows;
    rows.push_back({"reinforce", "-", [&](const Trajectory& t) { return reinforce(mdp, t, policy); }});
    rows.push_back({"vanilla-pg", "-", [&](const Trajectory& t) { return vanilla_pg(mdp, t, policy); }});
    const Vec v = value_tables(mdp, policy).v;
    rows.push_back({"baseline-pg", "exact-v", [&](const Trajectory& t) { return baseline_pg(mdp, t, policy, v); }});
    for (const std::string& variant : {"zero", "constant", "state-baseline", "frozen-linear", "exact-dp"}) {
        const QModel model = detail::build_model(variant, noise, mdp, policy, rng);
        rows.push_back({"drpg", variant, [&, model](const Trajectory& t) { return drpg(mdp, t, policy, model); }});
    }
    const QModel exact_const = QModel::exact_dp(mdp).constant_snapshot(policy, mdp);
    rows.push_back({"trajcv-pg", "constant-exact-q",
                    [&](const Trajectory& t) { return trajcv_pg(mdp, t, policy, exact_const); }});

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write: " + out_path);
        out = &file;
    }
    *out << "estimator,model,trace,reduction_vs_vanilla\n";
    for (const auto& r : variance_table(mdp, policy, rows))
        *out << r.estimator << "," << r.model << "," << fmt(r.trace) << "," << fmt(r.reduction_vs_vanilla) << "\n";
    return 0;
}

int cr_bound_command(const std::string& mdp_path, std::uint64_t policy_seed, int coord, bool all_coords,
                     const std::string& out_path) {
    const TabularMdp mdp = load_mdp(mdp_path);
    const SoftmaxPolicy policy = random_policy(mdp, policy_seed);
    const Mat drpg_cov = theorem2_covariance(mdp, policy, QModel::exact_dp(mdp));

    std::vector<int> coords;
    if (all_coords)
        for (int i = 0; i < policy.dim(); ++i) coords.push_back(i);
    else
        coords.push_back(coord);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write: " + out_path);
        out = &file;
    }
    *out << "coordinate,bound,drpg_variance,gap\n";
    for (int i : coords) {
        const double bound = dag_cr_bound(mdp, policy, i);
        *out << i << "," << fmt(bound) << "," << fmt(drpg_cov(i, i)) << "," << fmt(drpg_cov(i, i) - bound) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact verification lab for tabular policy-gradient and off-policy-evaluation estimators"};
    app.require_subcommand(1);

    // Suite subcommands share the same options.
    std::string config_path, out_dir = "out";
    std::optional<std::uint64_t> seed_override;
    std::vector<std::pair<std::string, CLI::App*>> suites;
    for (const std::string name : {"correspondence", "unbiasedness", "variance", "crbound", "all"}) {
        CLI::App* sub = app.add_subcommand(name, "Run the " + name + " check suite");
        sub->add_option("--config", config_path, "Experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory for CSV/summary files");
        sub->add_option("--seed", seed_override, "Override the config's seed");
        suites.emplace_back(name, sub);
    }

    auto* vc = app.add_subcommand("verify-correspondence",
                                  "Finite-difference check of one OPE/PG pair, per trajectory");
    std::string pair_name, mdp_path, csv_out;
    double eps = 1e-5;
    std::uint64_t policy_seed = 1;
    vc->add_option("--pair", pair_name, "traj-is|step-is|baseline|dr|dr-constant|actor-critic")->required();
    vc->add_option("--mdp", mdp_path, "MDP file (JSON)")->required();
    vc->add_option("--eps", eps, "Finite-difference step");
    vc->add_option("--policy-seed", policy_seed, "Seed for the random policy");
    vc->add_option("--out", csv_out, "CSV output path (default: stdout)");

    auto* vt = app.add_subcommand("variance-table", "Exact covariance traces for the estimator family");
    std::string vt_mdp, vt_out;
    std::uint64_t vt_policy_seed = 1, vt_seed = 0;
    double vt_noise = 0.5;
    vt->add_option("--mdp", vt_mdp, "MDP file (JSON)")->required();
    vt->add_option("--policy-seed", vt_policy_seed, "Seed for the random policy");
    vt->add_option("--seed", vt_seed, "Seed for noisy model construction");
    vt->add_option("--noise", vt_noise, "Gaussian noise scale for approximate models");
    vt->add_option("--out", vt_out, "CSV output path (default: stdout)");

    auto* cr = app.add_subcommand("cr-bound", "Per-coordinate variance lower bound vs the DR-PG variance");
    std::string cr_mdp, cr_out;
    std::uint64_t cr_policy_seed = 1;
    int cr_coord = 0;
    bool cr_all = false;
    cr->add_option("--mdp", cr_mdp, "MDP file (JSON)")->required();
    cr->add_option("--coord", cr_coord, "Policy parameter coordinate");
    cr->add_flag("--all", cr_all, "All coordinates");
    cr->add_option("--policy-seed", cr_policy_seed, "Seed for the random policy");
    cr->add_option("--out", cr_out, "CSV output path (default: stdout)");

    auto* gen = app.add_subcommand("generate-mdp", "Write a seeded random layered MDP to a JSON file");
    std::string kind = "gridlike", gen_out;
    int horizon = 3, actions = 2, branching = 2, states_per_layer = 3, max_width = 4;
    double gamma = 0.9;
    std::uint64_t gen_seed = 1;
    bool deterministic = false;
    gen->add_option("--kind", kind, "chain|tree|gridlike|random-dag");
    gen->add_option("--out", gen_out, "Output path")->required();
    gen->add_option("--horizon", horizon, "Horizon T (T+1 decision steps)");
    gen->add_option("--actions", actions, "Actions per state");
    gen->add_option("--gamma", gamma, "Discount factor in (0, 1]");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--branching", branching, "Children per (state, action) [tree]");
    gen->add_option("--states-per-layer", states_per_layer, "States per layer [gridlike]");
    gen->add_option("--max-width", max_width, "Maximum layer width [random-dag]");
    gen->add_flag("--deterministic", deterministic, "Deterministic transitions and rewards [gridlike]");

    CLI11_PARSE(app, argc, argv);

    try {
        for (const auto& [name, sub] : suites)
            if (sub->parsed()) return run_suite_command(name, config_path, out_dir, seed_override);
        if (vc->parsed()) return verify_correspondence_command(pair_name, mdp_path, eps, policy_seed, csv_out);
        if (vt->parsed()) return variance_table_command(vt_mdp, vt_policy_seed, vt_seed, vt_noise, vt_out);
        if (cr->parsed()) return cr_bound_command(cr_mdp, cr_policy_seed, cr_coord, cr_all, cr_out);
        if (gen->parsed()) {
            pgope::TabularMdp mdp;
            if (kind == "chain") mdp = pgope::make_chain(horizon, actions, gamma, gen_seed);
            else if (kind == "tree") mdp = pgope::make_tree(branching, horizon, actions, gamma, gen_seed);
            else if (kind == "gridlike")
                mdp = pgope::make_gridlike(states_per_layer, actions, horizon, gamma, gen_seed, deterministic);
            else if (kind == "random-dag") mdp = pgope::make_random_dag(max_width, actions, horizon, gamma, gen_seed);
            else throw std::invalid_argument("unknown kind: " + kind);
            pgope::save_mdp(mdp, gen_out);
            std::cout << "wrote " << gen_out << " (" << mdp.num_states << " states, " << mdp.num_actions
                      << " actions, horizon " << mdp.horizon << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
