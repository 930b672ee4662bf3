#pragma once

#include <random>

#include "pgope/mdp.hpp"

namespace pgope {

namespace detail {

// Platform-independent uniform in [0, 1); keeps generated files reproducible.
inline double u01(std::mt19937_64& rng) { return (rng() >> 11) * (1.0 / 9007199254740992.0); }

inline std::vector<RewardAtom> random_reward(std::mt19937_64& rng, bool stochastic) {
    if (!stochastic) return {{u01(rng), 1.0}};
    // Two-point support with a random split.
    const double lo = u01(rng), hi = lo + 0.25 + 0.75 * u01(rng);
    const double p = 0.2 + 0.6 * u01(rng);
    return {{lo, p}, {hi, 1.0 - p}};
}

inline std::vector<Outcome> random_transition(std::mt19937_64& rng, const std::vector<int>& targets,
                                              bool stochastic) {
    if (!stochastic || targets.size() == 1) {
        const int pick = targets[static_cast<std::size_t>(u01(rng) * targets.size())];
        return {{pick, 1.0}};
    }
    std::vector<Outcome> out;
    double total = 0.0;
    for (int s : targets) {
        const double w = 0.1 + u01(rng);
        out.push_back({s, w});
        total += w;
    }
    for (auto& o : out) o.p /= total;
    return out;
}

}  // namespace detail

/// One state per layer; deterministic transitions, deterministic seeded rewards.
inline TabularMdp make_chain(int horizon, int actions, double gamma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TabularMdp mdp;
    mdp.num_states = horizon + 1;
    mdp.num_actions = actions;
    mdp.horizon = horizon;
    mdp.gamma = gamma;
    mdp.start_state = 0;
    mdp.layer_of.resize(mdp.num_states);
    mdp.transitions.assign(mdp.num_states, {});
    mdp.rewards.assign(mdp.num_states, {});
    for (int s = 0; s <= horizon; ++s) {
        mdp.layer_of[s] = s;
        mdp.transitions[s].assign(actions, {});
        mdp.rewards[s].assign(actions, {});
        for (int a = 0; a < actions; ++a) {
            mdp.rewards[s][a] = {{detail::u01(rng), 1.0}};
            if (s < horizon) mdp.transitions[s][a] = {{s + 1, 1.0}};
        }
    }
    mdp.validate();
    return mdp;
}

/// Each (state, action) spawns `branching` fresh children, so every state has a
/// unique root path; check_tree always certifies the result.
inline TabularMdp make_tree(int branching, int horizon, int actions, double gamma, std::uint64_t seed,
                            bool stochastic_rewards = true) {
    std::mt19937_64 rng(seed);
    TabularMdp mdp;
    mdp.num_actions = actions;
    mdp.horizon = horizon;
    mdp.gamma = gamma;
    mdp.start_state = 0;

    std::vector<int> frontier = {0};
    mdp.layer_of.push_back(0);
    int next_id = 1;
    std::vector<std::vector<int>> children_of;  // per (s * actions + a)

    for (int t = 0; t < horizon; ++t) {
        std::vector<int> next_frontier;
        for (int s : frontier) {
            (void)s;
            for (int a = 0; a < actions; ++a) {
                std::vector<int> kids;
                for (int b = 0; b < branching; ++b) {
                    kids.push_back(next_id++);
                    mdp.layer_of.push_back(t + 1);
                    next_frontier.push_back(kids.back());
                }
                children_of.push_back(kids);
            }
        }
        frontier = std::move(next_frontier);
    }

    mdp.num_states = next_id;
    mdp.transitions.assign(mdp.num_states, std::vector<std::vector<Outcome>>(actions));
    mdp.rewards.assign(mdp.num_states, std::vector<std::vector<RewardAtom>>(actions));

    std::size_t pair_idx = 0;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < actions; ++a) {
            mdp.rewards[s][a] = detail::random_reward(rng, stochastic_rewards);
            if (mdp.layer_of[s] < horizon) {
                std::vector<Outcome> out;
                double total = 0.0;
                for (int kid : children_of[pair_idx]) {
                    const double w = 0.2 + detail::u01(rng);
                    out.push_back({kid, w});
                    total += w;
                }
                for (auto& o : out) o.p /= total;
                mdp.transitions[s][a] = std::move(out);
                ++pair_idx;
            }
        }
    }
    mdp.validate();
    return mdp;
}

/// Layered MDP with one start state and `states_per_layer` states in each later
/// layer; dense random transitions unless `deterministic`.
inline TabularMdp make_gridlike(int states_per_layer, int actions, int horizon, double gamma, std::uint64_t seed,
                                bool deterministic = false) {
    std::mt19937_64 rng(seed);
    TabularMdp mdp;
    mdp.num_actions = actions;
    mdp.horizon = horizon;
    mdp.gamma = gamma;
    mdp.start_state = 0;
    mdp.num_states = 1 + states_per_layer * horizon;
    mdp.layer_of.assign(mdp.num_states, 0);
    for (int t = 1; t <= horizon; ++t)
        for (int k = 0; k < states_per_layer; ++k) mdp.layer_of[1 + (t - 1) * states_per_layer + k] = t;

    mdp.transitions.assign(mdp.num_states, std::vector<std::vector<Outcome>>(actions));
    mdp.rewards.assign(mdp.num_states, std::vector<std::vector<RewardAtom>>(actions));
    for (int s = 0; s < mdp.num_states; ++s) {
        const int t = mdp.layer_of[s];
        std::vector<int> next;
        for (int k = 0; k < states_per_layer; ++k) next.push_back(1 + t * states_per_layer + k);
        for (int a = 0; a < actions; ++a) {
            mdp.rewards[s][a] = detail::random_reward(rng, !deterministic);
            if (t < horizon) mdp.transitions[s][a] = detail::random_transition(rng, next, !deterministic);
        }
    }
    mdp.validate();
    return mdp;
}

/// Random layered DAG: random layer widths up to `max_width`, random sparse
/// transitions (state merging allowed), reward supports of size 1-3.
inline TabularMdp make_random_dag(int max_width, int actions, int horizon, double gamma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    TabularMdp mdp;
    mdp.num_actions = actions;
    mdp.horizon = horizon;
    mdp.gamma = gamma;
    mdp.start_state = 0;

    std::vector<std::vector<int>> layers(horizon + 1);
    layers[0] = {0};
    mdp.layer_of.push_back(0);
    int next_id = 1;
    for (int t = 1; t <= horizon; ++t) {
        const int width = 1 + static_cast<int>(detail::u01(rng) * max_width);
        for (int k = 0; k < width; ++k) {
            layers[t].push_back(next_id++);
            mdp.layer_of.push_back(t);
        }
    }
    mdp.num_states = next_id;
    mdp.transitions.assign(mdp.num_states, std::vector<std::vector<Outcome>>(actions));
    mdp.rewards.assign(mdp.num_states, std::vector<std::vector<RewardAtom>>(actions));

    for (int s = 0; s < mdp.num_states; ++s) {
        const int t = mdp.layer_of[s];
        for (int a = 0; a < actions; ++a) {
            const int support = 1 + static_cast<int>(detail::u01(rng) * 3.0);
            std::vector<RewardAtom> ratoms;
            double total = 0.0;
            for (int k = 0; k < support; ++k) {
                const double w = 0.2 + detail::u01(rng);
                ratoms.push_back({detail::u01(rng) * 2.0 - 1.0, w});
                total += w;
            }
            for (auto& r : ratoms) r.p /= total;
            mdp.rewards[s][a] = std::move(ratoms);

            if (t < horizon) {
                // Random subset of next-layer states (at least one).
                std::vector<int> picked;
                for (int cand : layers[t + 1])
                    if (detail::u01(rng) < 0.6) picked.push_back(cand);
                if (picked.empty())
                    picked.push_back(layers[t + 1][static_cast<std::size_t>(detail::u01(rng) * layers[t + 1].size())]);
                mdp.transitions[s][a] = detail::random_transition(rng, picked, true);
            }
        }
    }
    mdp.validate();
    return mdp;
}

/// Random full-support policy logits for an MDP's dimensions.
inline SoftmaxPolicy random_policy(const TabularMdp& mdp, std::uint64_t seed, double logit_scale = 1.0) {
    std::mt19937_64 rng(seed);
    Vec logits(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions);
    for (double& l : logits) l = logit_scale * (2.0 * detail::u01(rng) - 1.0);
    return SoftmaxPolicy(mdp.num_states, mdp.num_actions, std::move(logits));
}

}  // namespace pgope
