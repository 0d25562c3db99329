#pragma once

// Within-task model estimators and the cross-task meta-updates.

#include "metaplan/mdp.hpp"
#include "metaplan/task_gen.hpp"

#include <cstdint>

namespace metaplan {

/// Count-based estimate counts / m.
inline TransitionModel<double> empirical_model(const SampleBatch& batch) {
    if (batch.m < 1) throw InvalidInput("empirical_model: batch has m < 1");
    Matrix<double> p = batch.counts.cast<double>() / static_cast<double>(batch.m);
    return TransitionModel<double>(batch.states, batch.actions, std::move(p));
}

/// Mixing weight on the prior, 1 / (sigma^2 (1 + 1/t) m + 1).
inline double mixing_rate(double sigma, std::int64_t m, std::int64_t t) {
    if (sigma < 0.0) throw InvalidInput("mixing_rate: sigma must be nonnegative");
    if (m < 1 || t < 1) throw InvalidInput("mixing_rate: m and t must be at least 1");
    const double md = static_cast<double>(m);
    const double td = static_cast<double>(t);
    return 1.0 / (sigma * sigma * (1.0 + 1.0 / td) * md + 1.0);
}

/**
 * Minimiser of ||empirical - P||^2 + lambda ||P - prior||^2 over the simplex,
 * with alpha = lambda / (1 + lambda): the convex combination
 * alpha * prior + (1 - alpha) * empirical.
 */
template <typename Scalar>
TransitionModel<Scalar> rls_estimate(const TransitionModel<Scalar>& empirical, const TransitionModel<Scalar>& prior,
                                     Scalar alpha) {
    if (!empirical.same_shape(prior)) throw InvalidInput("rls_estimate: shape mismatch");
    if (!(alpha >= Scalar(0) && alpha <= Scalar(1))) throw InvalidInput("rls_estimate: alpha must lie in [0,1]");
    if (alpha == Scalar(0)) return empirical;
    if (alpha == Scalar(1)) return prior;
    Matrix<Scalar> p = alpha * prior.probs() + (Scalar(1) - alpha) * empirical.probs();
    return TransitionModel<Scalar>(empirical.states(), empirical.actions(), std::move(p));
}

/// Result of one within-task estimation step.
template <typename Scalar>
struct ModelEstimate {
    TransitionModel<Scalar> model;
    Scalar alpha = Scalar(0);
    TransitionModel<Scalar> empirical;
};

/// Settings for turning Welford aggregates into sigma-hat.
struct SigmaHatOptions {
    SigmaConvention convention = SigmaConvention::variance;
    double initial = 0.05; // used until two tasks have been observed
};

/**
 * Meta-learner state carried across tasks.
 *
 * `prior` is the average of the per-task empirical models seen so far
 * (uniform before the first task). The Welford aggregates track the same
 * stream entrywise so that sigma_hat(s,a) can be read off at any time.
 */
struct PriorState {
    TransitionModel<double> prior;
    std::int64_t task_count = 0;
    Matrix<double> sigma_hat;   // S x A
    Matrix<double> welford_mean; // (S*A) x S
    Matrix<double> welford_m2;   // (S*A) x S
    std::int64_t welford_count = 0;

    static PriorState initial(Index states, Index actions, double sigma_hat_init) {
        PriorState st;
        st.prior = TransitionModel<double>::uniform(states, actions);
        st.sigma_hat = Matrix<double>::Constant(states, actions, sigma_hat_init);
        st.welford_mean = Matrix<double>::Zero(states * actions, states);
        st.welford_m2 = Matrix<double>::Zero(states * actions, states);
        return st;
    }

    double sigma_hat_max() const { return sigma_hat.maxCoeff(); }
};

/// Running average of empirical models: prior <- (1 - 1/t) prior + (1/t) empirical.
inline PriorState update_prior(PriorState state, const TransitionModel<double>& empirical) {
    if (!state.prior.same_shape(empirical)) throw InvalidInput("update_prior: shape mismatch");
    const std::int64_t t = state.task_count + 1;
    if (t == 1) {
        state.prior = empirical;
    } else {
        const double w = 1.0 / static_cast<double>(t);
        Matrix<double> p = (1.0 - w) * state.prior.probs() + w * empirical.probs();
        // the average of simplex rows is on the simplex; renormalise away rounding drift
        p.array().colwise() /= p.rowwise().sum().array();
        state.prior = TransitionModel<double>(empirical.states(), empirical.actions(), std::move(p));
    }
    state.task_count = t;
    return state;
}

/**
 * Welford recursion over the stream of per-task empirical models, entrywise.
 *
 * After n >= 2 observations sigma_hat(s,a) is the configured convention
 * applied to max_{s'} M2(s,a,s') / n (population variance). With a single
 * observation the variance is undefined and sigma_hat keeps `opts.initial`.
 */
inline PriorState welford_update(PriorState state, const TransitionModel<double>& empirical,
                                 const SigmaHatOptions& opts) {
    const auto& x = empirical.probs();
    if (x.rows() != state.welford_mean.rows() || x.cols() != state.welford_mean.cols()) {
        throw InvalidInput("welford_update: shape mismatch");
    }
    state.welford_count += 1;
    const double n = static_cast<double>(state.welford_count);
    const Matrix<double> delta = x - state.welford_mean;
    state.welford_mean += delta / n;
    state.welford_m2.array() += delta.array() * (x - state.welford_mean).array();
    state.welford_m2 = state.welford_m2.cwiseMax(0.0);

    const Index n_states = empirical.states();
    const Index n_actions = empirical.actions();
    if (state.welford_count < 2) {
        state.sigma_hat = Matrix<double>::Constant(n_states, n_actions, opts.initial);
        return state;
    }
    for (Index s = 0; s < n_states; ++s) {
        for (Index a = 0; a < n_actions; ++a) {
            const double var = state.welford_m2.row(empirical.row_index(s, a)).maxCoeff() / n;
            state.sigma_hat(s, a) = apply_sigma_convention(var, opts.convention);
        }
    }
    return state;
}

/// Population variance max_{s'} M2 / n per (s,a), before any convention is applied.
inline Matrix<double> welford_variance(const PriorState& state, Index states, Index actions) {
    Matrix<double> var = Matrix<double>::Zero(states, actions);
    if (state.welford_count < 1) return var;
    for (Index s = 0; s < states; ++s) {
        for (Index a = 0; a < actions; ++a) {
            var(s, a) = state.welford_m2.row(s * actions + a).maxCoeff() / static_cast<double>(state.welford_count);
        }
    }
    return var;
}

} // namespace metaplan
