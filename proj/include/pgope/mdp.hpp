#pragma once

#include <cstdint>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pgope/policy.hpp"

namespace pgope {

/// One possible next state of a (state, action) pair.
struct Outcome {
    int state = 0;
    double p = 0.0;
};

/// One point of a finite-support reward distribution.
struct RewardAtom {
    double value = 0.0;
    double p = 0.0;
};

struct Step {
    int state = 0;
    int action = 0;
    double reward = 0.0;
};

/// One episode record (s_t, a_t, r_t) for t = 0..T.
struct Trajectory {
    std::vector<Step> steps;
};

inline constexpr double kProbTol = 1e-12;

/// Layered finite-horizon MDP. States carry their time step (layer_of), so every
/// transition from a layer-t state lands in layer t+1 and each state occurs at a
/// unique step. The layer-(T+1) absorbing terminal is implicit: value models
/// evaluate to zero past the horizon instead of storing a state.
struct TabularMdp {
    int num_states = 0;
    int num_actions = 0;
    int horizon = 0;  // T; an episode has T+1 decision steps t = 0..T
    double gamma = 1.0;
    int start_state = 0;
    std::vector<int> layer_of;
    // transitions[s][a]: next-state distribution; empty for layer-T states.
    std::vector<std::vector<std::vector<Outcome>>> transitions;
    // rewards[s][a]: finite-support reward distribution, required for every (s, a).
    std::vector<std::vector<std::vector<RewardAtom>>> rewards;

    void validate() const {
        if (num_states <= 0 || num_actions <= 0) throw std::invalid_argument("mdp: state/action counts must be positive");
        if (horizon < 0) throw std::invalid_argument("mdp: horizon must be nonnegative");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("mdp: gamma must be in (0, 1]");
        if (start_state < 0 || start_state >= num_states) throw std::invalid_argument("mdp: start_state out of range");
        if (static_cast<int>(layer_of.size()) != num_states) throw std::invalid_argument("mdp: layer_of size mismatch");
        if (layer_of[start_state] != 0) throw std::invalid_argument("mdp: layer_of(start_state) must be 0");
        if (static_cast<int>(transitions.size()) != num_states || static_cast<int>(rewards.size()) != num_states)
            throw std::invalid_argument("mdp: transitions/rewards size mismatch");
        for (int s = 0; s < num_states; ++s) {
            const int t = layer_of[s];
            if (t < 0 || t > horizon) throw std::invalid_argument("mdp: state " + std::to_string(s) + " has layer outside 0..T");
            if (static_cast<int>(transitions[s].size()) != num_actions || static_cast<int>(rewards[s].size()) != num_actions)
                throw std::invalid_argument("mdp: per-action table size mismatch at state " + std::to_string(s));
            for (int a = 0; a < num_actions; ++a) {
                const auto where = "(s=" + std::to_string(s) + ", a=" + std::to_string(a) + ")";
                double sum = 0.0;
                for (const auto& atom : rewards[s][a]) {
                    if (atom.p < 0.0) throw std::invalid_argument("mdp: negative reward probability at " + where);
                    sum += atom.p;
                }
                if (rewards[s][a].empty() || std::abs(sum - 1.0) > kProbTol)
                    throw std::invalid_argument("mdp: reward probabilities do not sum to 1 at " + where);
                if (t == horizon) {
                    if (!transitions[s][a].empty())
                        throw std::invalid_argument("mdp: layer-T state must have no transitions at " + where);
                    continue;
                }
                sum = 0.0;
                for (const auto& out : transitions[s][a]) {
                    if (out.p < 0.0) throw std::invalid_argument("mdp: negative transition probability at " + where);
                    if (out.state < 0 || out.state >= num_states)
                        throw std::invalid_argument("mdp: transition target out of range at " + where);
                    if (layer_of[out.state] != t + 1)
                        throw std::invalid_argument("mdp: transition from layer " + std::to_string(t) +
                                                    " must land in layer " + std::to_string(t + 1) + " at " + where);
                    sum += out.p;
                }
                if (transitions[s][a].empty() || std::abs(sum - 1.0) > kProbTol)
                    throw std::invalid_argument("mdp: transition probabilities do not sum to 1 at " + where);
            }
        }
    }

    double reward_mean(int s, int a) const {
        double m = 0.0;
        for (const auto& atom : rewards[s][a]) m += atom.p * atom.value;
        return m;
    }

    double reward_variance(int s, int a) const {
        const double m = reward_mean(s, a);
        double v = 0.0;
        for (const auto& atom : rewards[s][a]) v += atom.p * (atom.value - m) * (atom.value - m);
        return v;
    }

    void check_policy(const SoftmaxPolicy& policy) const {
        if (policy.num_states() != num_states || policy.num_actions() != num_actions)
            throw std::invalid_argument("policy dimensions do not match mdp");
    }
};

/// Enumeration support cap; overridable via the PGOPE_ENUM_CAP environment variable.
inline std::uint64_t enumeration_cap() {
    if (const char* env = std::getenv("PGOPE_ENUM_CAP")) {
        const long long v = std::atoll(env);
        if (v > 0) return static_cast<std::uint64_t>(v);
    }
    return 10'000'000ULL;
}

/// Draws one on-policy episode; deterministic given the rng state.
inline Trajectory sample_trajectory(const TabularMdp& mdp, const SoftmaxPolicy& policy, std::mt19937_64& rng) {
    mdp.check_policy(policy);
    auto pick = [&rng](double u_scale) {
        return std::uniform_real_distribution<double>(0.0, u_scale)(rng);
    };
    Trajectory traj;
    traj.steps.reserve(mdp.horizon + 1);
    int s = mdp.start_state;
    for (int t = 0; t <= mdp.horizon; ++t) {
        const Vec probs = policy.action_probs(s);
        double u = pick(1.0);
        int a = 0;
        for (; a < mdp.num_actions - 1; ++a) {
            u -= probs[a];
            if (u <= 0.0) break;
        }
        u = pick(1.0);
        const auto& rdist = mdp.rewards[s][a];
        double r = rdist.back().value;
        for (const auto& atom : rdist) {
            u -= atom.p;
            if (u <= 0.0) {
                r = atom.value;
                break;
            }
        }
        traj.steps.push_back({s, a, r});
        if (t < mdp.horizon) {
            u = pick(1.0);
            const auto& tdist = mdp.transitions[s][a];
            int next = tdist.back().state;
            for (const auto& out : tdist) {
                u -= out.p;
                if (u <= 0.0) {
                    next = out.state;
                    break;
                }
            }
            s = next;
        }
    }
    return traj;
}

/// Brute-force oracle: every positive-probability trajectory with its probability,
/// including reward randomness. Errors if the support exceeds the cap.
inline std::vector<std::pair<Trajectory, double>> enumerate_trajectories(const TabularMdp& mdp,
                                                                         const SoftmaxPolicy& policy,
                                                                         std::uint64_t cap = enumeration_cap()) {
    mdp.check_policy(policy);
    std::vector<std::pair<Trajectory, double>> out;
    std::vector<Step> stack(mdp.horizon + 1);

    // Cached action probabilities per state.
    std::vector<Vec> probs(mdp.num_states);
    for (int s = 0; s < mdp.num_states; ++s) probs[s] = policy.action_probs(s);

    auto dfs = [&](auto&& self, int s, int t, double p) -> void {
        for (int a = 0; a < mdp.num_actions; ++a) {
            const double pa = p * probs[s][a];
            if (pa == 0.0) continue;
            for (const auto& atom : mdp.rewards[s][a]) {
                if (atom.p == 0.0) continue;
                const double pr = pa * atom.p;
                stack[t] = {s, a, atom.value};
                if (t == mdp.horizon) {
                    if (out.size() >= cap) throw std::runtime_error("enumerate_trajectories: support cap exceeded");
                    out.emplace_back(Trajectory{std::vector<Step>(stack.begin(), stack.begin() + t + 1)}, pr);
                } else {
                    for (const auto& next : mdp.transitions[s][a]) {
                        if (next.p == 0.0) continue;
                        self(self, next.state, t + 1, pr * next.p);
                    }
                }
            }
        }
    };
    dfs(dfs, mdp.start_state, 0, 1.0);
    return out;
}

inline double discounted_return(const TabularMdp& mdp, const Trajectory& traj) {
    double g = 0.0, w = 1.0;
    for (const Step& step : traj.steps) {
        g += w * step.reward;
        w *= mdp.gamma;
    }
    return g;
}

}  // namespace pgope
