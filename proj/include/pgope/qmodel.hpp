#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "pgope/dp.hpp"

namespace pgope {

/// Approximate value object supplying Qtilde(s,a), Vtilde(s), grad Qtilde(s,a),
/// grad Vtilde(s). The variant fixes the theta-dependence semantics: the 0th- and
/// 1st-order information are independently chosen degrees of freedom.
///
///   Zero          Qtilde == 0, grad Qtilde == 0.
///   Constant      fixed q-table, grad Qtilde == 0 at every theta.
///   StateBaseline Qtilde(s,a) = b(s), grad Qtilde == 0.
///   FrozenLinear  Qtilde(theta') = q_table + <q_grad_table, theta' - anchor>;
///                 grad Qtilde = q_grad_table at every theta'.
///   ExactDP       Qtilde = exact Q^{pi_theta'} recomputed by DP; grad Qtilde exact.
///
/// Vtilde(s) is always derived: sum_a pi(a|s) Qtilde(s,a). Queries past the horizon
/// never reach the model; estimators substitute zero at layer T+1.
class QModel {
public:
    enum class Variant { Zero, Constant, StateBaseline, FrozenLinear, ExactDP };

    static QModel zero() { return QModel(Variant::Zero); }

    static QModel constant(std::vector<Vec> q_table) {
        QModel m(Variant::Constant);
        m.q_table_ = std::move(q_table);
        return m;
    }

    static QModel state_baseline(Vec b) {
        QModel m(Variant::StateBaseline);
        m.baseline_ = std::move(b);
        return m;
    }

    static QModel frozen_linear(std::vector<Vec> q_table, std::vector<std::vector<Vec>> q_grad_table, Vec anchor_logits) {
        QModel m(Variant::FrozenLinear);
        m.q_table_ = std::move(q_table);
        m.q_grad_table_ = std::move(q_grad_table);
        m.anchor_ = std::move(anchor_logits);
        return m;
    }

    static QModel exact_dp(const TabularMdp& mdp) {
        QModel m(Variant::ExactDP);
        m.mdp_ = std::make_shared<TabularMdp>(mdp);
        m.cache_ = std::make_shared<Cache>();
        return m;
    }

    Variant variant() const { return variant_; }

    double q_value(const SoftmaxPolicy& policy, int s, int a) const {
        switch (variant_) {
            case Variant::Zero:
                return 0.0;
            case Variant::Constant:
                return q_table_[s][a];
            case Variant::StateBaseline:
                return baseline_[s];
            case Variant::FrozenLinear: {
                double v = q_table_[s][a];
                const Vec& th = policy.logits();
                const Vec& g = q_grad_table_[s][a];
                for (std::size_t i = 0; i < th.size(); ++i) v += g[i] * (th[i] - anchor_[i]);
                return v;
            }
            case Variant::ExactDP:
                return tables(policy).values.q[s][a];
        }
        return 0.0;
    }

    double v_value(const SoftmaxPolicy& policy, int s) const {
        const Vec probs = policy.action_probs(s);
        double v = 0.0;
        for (int a = 0; a < policy.num_actions(); ++a) v += probs[a] * q_value(policy, s, a);
        return v;
    }

    Vec q_grad(const SoftmaxPolicy& policy, int s, int a) const {
        switch (variant_) {
            case Variant::Zero:
            case Variant::Constant:
            case Variant::StateBaseline:
                return zeros(policy.dim());
            case Variant::FrozenLinear:
                return q_grad_table_[s][a];
            case Variant::ExactDP:
                return tables(policy).grads->q_grad[s][a];
        }
        return zeros(policy.dim());
    }

    /// Product rule over Vtilde(s) = sum_a pi(a|s) Qtilde(s,a): both the explicit
    /// pi_theta dependence and the model's own theta dependence contribute.
    Vec v_grad(const SoftmaxPolicy& policy, int s) const {
        const Vec probs = policy.action_probs(s);
        Vec g = zeros(policy.dim());
        for (int a = 0; a < policy.num_actions(); ++a) {
            axpy(g, probs[a] * q_value(policy, s, a), policy.grad_log_prob(s, a));
            if (variant_ == Variant::FrozenLinear || variant_ == Variant::ExactDP)
                axpy(g, probs[a], q_grad(policy, s, a));
        }
        return g;
    }

    /// Freezes the current Qtilde values into a Constant model (grad Qtilde == 0).
    QModel constant_snapshot(const SoftmaxPolicy& policy, const TabularMdp& mdp) const {
        std::vector<Vec> table(mdp.num_states, zeros(mdp.num_actions));
        for (int s = 0; s < mdp.num_states; ++s)
            for (int a = 0; a < mdp.num_actions; ++a) table[s][a] = q_value(policy, s, a);
        return constant(std::move(table));
    }

private:
    explicit QModel(Variant v) : variant_(v) {}

    struct Entry {
        ValueTables values;
        std::shared_ptr<GradientTables> grads;  // computed lazily
    };
    struct Cache {
        std::mutex mu;
        std::map<Vec, std::shared_ptr<Entry>> by_logits;
    };

    struct TablesView {
        const ValueTables& values;
        std::shared_ptr<GradientTables> grads;
    };

    TablesView tables(const SoftmaxPolicy& policy) const {
        std::shared_ptr<Entry> entry;
        {
            std::lock_guard<std::mutex> lock(cache_->mu);
            auto& slot = cache_->by_logits[policy.logits()];
            if (!slot) {
                slot = std::make_shared<Entry>();
                slot->values = value_tables(*mdp_, policy);
            }
            entry = slot;
        }
        if (!entry->grads) {
            auto grads = std::make_shared<GradientTables>(gradient_tables(*mdp_, policy));
            std::lock_guard<std::mutex> lock(cache_->mu);
            if (!entry->grads) entry->grads = std::move(grads);
        }
        return {entry->values, entry->grads};
    }

    Variant variant_;
    std::vector<Vec> q_table_;
    std::vector<std::vector<Vec>> q_grad_table_;
    Vec baseline_;
    Vec anchor_;
    std::shared_ptr<TabularMdp> mdp_;
    std::shared_ptr<Cache> cache_;
};

/// Constant model holding the exact Q of `policy`, optionally perturbed by
/// independent Gaussian noise drawn once at construction.
inline QModel noisy_constant(const TabularMdp& mdp, const SoftmaxPolicy& policy, double noise, std::mt19937_64& rng) {
    const ValueTables vt = value_tables(mdp, policy);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> table(mdp.num_states, zeros(mdp.num_actions));
    for (int s = 0; s < mdp.num_states; ++s)
        for (int a = 0; a < mdp.num_actions; ++a) table[s][a] = vt.q[s][a] + (noise > 0 ? noise * gauss(rng) : 0.0);
    return QModel::constant(std::move(table));
}

/// FrozenLinear model anchored at `policy`, with value and gradient tables taken
/// from the exact DP solution and perturbed by independent noise. The two noise
/// draws are independent: the 0th- and 1st-order errors are uncorrelated.
inline QModel noisy_frozen_linear(const TabularMdp& mdp, const SoftmaxPolicy& policy, double value_noise,
                                  double grad_noise, std::mt19937_64& rng) {
    const ValueTables vt = value_tables(mdp, policy);
    const GradientTables gt = gradient_tables(mdp, policy);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Vec> table(mdp.num_states, zeros(mdp.num_actions));
    std::vector<std::vector<Vec>> grad_table(mdp.num_states, std::vector<Vec>(mdp.num_actions, zeros(policy.dim())));
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            table[s][a] = vt.q[s][a] + (value_noise > 0 ? value_noise * gauss(rng) : 0.0);
            grad_table[s][a] = gt.q_grad[s][a];
            if (grad_noise > 0)
                for (double& g : grad_table[s][a]) g += grad_noise * gauss(rng);
        }
    }
    return QModel::frozen_linear(std::move(table), std::move(grad_table), policy.logits());
}

}  // namespace pgope
