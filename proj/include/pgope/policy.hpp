#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "pgope/linalg.hpp"

namespace pgope {

/// Tabular softmax policy. Parameters are the per-(state, action) logits,
/// flattened state-major / action-minor into theta in R^d with
/// d = num_states * num_actions. The flattening order is part of the public
/// contract: every gradient vector in this library uses it.
class SoftmaxPolicy {
public:
    SoftmaxPolicy(int num_states, int num_actions, Vec logits)
        : num_states_(num_states), num_actions_(num_actions), logits_(std::move(logits)) {
        if (num_states_ <= 0 || num_actions_ <= 0)
            throw std::invalid_argument("SoftmaxPolicy: state/action counts must be positive");
        if (static_cast<int>(logits_.size()) != dim())
            throw std::invalid_argument("SoftmaxPolicy: logits size does not match num_states*num_actions");
        if (!all_finite(logits_)) throw std::invalid_argument("SoftmaxPolicy: non-finite logit");
    }

    SoftmaxPolicy(int num_states, int num_actions)
        : SoftmaxPolicy(num_states, num_actions, zeros(static_cast<std::size_t>(num_states) * num_actions)) {}

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int dim() const { return num_states_ * num_actions_; }
    const Vec& logits() const { return logits_; }

    int coord(int s, int a) const { return s * num_actions_ + a; }

    /// Softmax of the state's logit row; strictly positive, sums to one.
    Vec action_probs(int s) const {
        check_state(s);
        const double* row = &logits_[static_cast<std::size_t>(s) * num_actions_];
        double mx = row[0];
        for (int a = 1; a < num_actions_; ++a) mx = std::max(mx, row[a]);
        Vec p(num_actions_);
        double z = 0.0;
        for (int a = 0; a < num_actions_; ++a) {
            p[a] = std::exp(row[a] - mx);
            z += p[a];
        }
        for (int a = 0; a < num_actions_; ++a) p[a] /= z;
        return p;
    }

    double prob(int s, int a) const {
        check_action(a);
        return action_probs(s)[a];
    }

    /// Score function: coordinate (s, b) of grad log pi(a|s) is 1{b=a} - pi(b|s);
    /// coordinates of other states are zero.
    Vec grad_log_prob(int s, int a) const {
        check_action(a);
        const Vec p = action_probs(s);
        Vec g = zeros(dim());
        for (int b = 0; b < num_actions_; ++b) g[coord(s, b)] = -p[b];
        g[coord(s, a)] += 1.0;
        return g;
    }

    /// Returns a copy with theta_i shifted by eps; this policy is unchanged.
    SoftmaxPolicy perturb(int i, double eps) const {
        if (i < 0 || i >= dim()) throw std::out_of_range("SoftmaxPolicy::perturb: coordinate out of range");
        Vec l = logits_;
        l[i] += eps;
        return SoftmaxPolicy(num_states_, num_actions_, std::move(l));
    }

private:
    void check_state(int s) const {
        if (s < 0 || s >= num_states_) throw std::out_of_range("SoftmaxPolicy: state out of range");
    }
    void check_action(int a) const {
        if (a < 0 || a >= num_actions_) throw std::out_of_range("SoftmaxPolicy: action out of range");
    }

    int num_states_;
    int num_actions_;
    Vec logits_;
};

}  // namespace pgope
