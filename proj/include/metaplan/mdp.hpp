#pragma once

// Tabular MDPs and exact dynamic programming.
//
// Transition models are stored as a dense (S*A) x S row-stochastic matrix,
// row s*A + a holding P(.|s,a). Rewards are a dense S x A table. With this
// layout one Bellman backup is a single matrix-vector product.

#include "metaplan/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace metaplan {

using Index = Eigen::Index;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Per-state values V(s).
template <typename Scalar>
using ValueFunction = Vector<Scalar>;

/// Tolerance used when checking that rows lie on the probability simplex.
template <typename Scalar>
constexpr Scalar simplex_tolerance() {
    if constexpr (std::numeric_limits<Scalar>::digits >= 53) {
        return Scalar(1e-9);
    } else {
        return Scalar(1e-4);
    }
}

template <typename Scalar>
class TransitionModel {
public:
    TransitionModel() = default;

    TransitionModel(Index states, Index actions, Matrix<Scalar> probs)
        : states_(states), actions_(actions), probs_(std::move(probs)) {
        if (states < 1 || actions < 1) {
            throw InvalidInput("TransitionModel: need at least one state and one action");
        }
        if (probs_.rows() != states * actions || probs_.cols() != states) {
            throw InvalidInput("TransitionModel: expected a (S*A) x S matrix, got " +
                               std::to_string(probs_.rows()) + "x" + std::to_string(probs_.cols()));
        }
        for (Index r = 0; r < probs_.rows(); ++r) {
            if ((probs_.row(r).array() < Scalar(0)).any()) {
                throw InvalidInput("TransitionModel: negative probability in row " + std::to_string(r));
            }
            const Scalar total = probs_.row(r).sum();
            if (!(std::abs(total - Scalar(1)) <= simplex_tolerance<Scalar>())) {
                throw InvalidInput("TransitionModel: row " + std::to_string(r) + " sums to " +
                                   std::to_string(static_cast<double>(total)));
            }
        }
    }

    static TransitionModel uniform(Index states, Index actions) {
        Matrix<Scalar> p = Matrix<Scalar>::Constant(states * actions, states, Scalar(1) / Scalar(states));
        return TransitionModel(states, actions, std::move(p));
    }

    Index states() const noexcept { return states_; }
    Index actions() const noexcept { return actions_; }
    Index row_index(Index s, Index a) const noexcept { return s * actions_ + a; }

    const Matrix<Scalar>& probs() const noexcept { return probs_; }

    auto row(Index s, Index a) const { return probs_.row(row_index(s, a)); }

    Scalar operator()(Index s, Index a, Index next) const { return probs_(row_index(s, a), next); }

    bool same_shape(const TransitionModel& other) const noexcept {
        return states_ == other.states_ && actions_ == other.actions_;
    }

private:
    Index states_ = 0;
    Index actions_ = 0;
    Matrix<Scalar> probs_;
};

template <typename Scalar>
class RewardTable {
public:
    RewardTable() = default;

    explicit RewardTable(Matrix<Scalar> rewards, Scalar rmax = Scalar(1))
        : rewards_(std::move(rewards)), rmax_(rmax) {
        if (!(rmax_ > Scalar(0))) {
            throw InvalidInput("RewardTable: rmax must be positive");
        }
        if (rewards_.size() == 0) {
            throw InvalidInput("RewardTable: empty table");
        }
        if ((rewards_.array() < Scalar(0)).any() || (rewards_.array() > rmax_).any()) {
            throw InvalidInput("RewardTable: rewards must lie in [0, rmax]");
        }
    }

    Index states() const noexcept { return rewards_.rows(); }
    Index actions() const noexcept { return rewards_.cols(); }
    Scalar rmax() const noexcept { return rmax_; }
    const Matrix<Scalar>& table() const noexcept { return rewards_; }
    Scalar operator()(Index s, Index a) const { return rewards_(s, a); }

private:
    Matrix<Scalar> rewards_;
    Scalar rmax_ = Scalar(1);
};

template <typename Scalar>
struct MdpInstance {
    TransitionModel<Scalar> transitions;
    RewardTable<Scalar> rewards;
    Scalar gamma_eval = Scalar(0.99);

    MdpInstance() = default;

    MdpInstance(TransitionModel<Scalar> p, RewardTable<Scalar> r, Scalar gamma)
        : transitions(std::move(p)), rewards(std::move(r)), gamma_eval(gamma) {
        if (!(gamma_eval > Scalar(0) && gamma_eval < Scalar(1))) {
            throw InvalidInput("MdpInstance: gamma_eval must lie in (0,1)");
        }
        if (transitions.states() != rewards.states() || transitions.actions() != rewards.actions()) {
            throw InvalidInput("MdpInstance: transition and reward shapes disagree");
        }
    }

    Index states() const noexcept { return transitions.states(); }
    Index actions() const noexcept { return transitions.actions(); }

    /// Same rewards and evaluation discount, different dynamics.
    MdpInstance with_transitions(TransitionModel<Scalar> p) const {
        return MdpInstance(std::move(p), rewards, gamma_eval);
    }
};

/// Deterministic stationary policy, one action index per state.
struct Policy {
    std::vector<Index> actions;

    Index size() const noexcept { return static_cast<Index>(actions.size()); }
    Index operator[](Index s) const { return actions[static_cast<std::size_t>(s)]; }
    bool operator==(const Policy&) const = default;
};

namespace detail {

template <typename Scalar>
void check_discount(Scalar gamma, const char* who) {
    if (!(gamma >= Scalar(0) && gamma < Scalar(1))) {
        throw InvalidInput(std::string(who) + ": discount must lie in [0,1)");
    }
}

template <typename Scalar>
void check_policy(const MdpInstance<Scalar>& mdp, const Policy& policy, const char* who) {
    if (policy.size() != mdp.states()) {
        throw InvalidInput(std::string(who) + ": policy has " + std::to_string(policy.size()) +
                           " entries for " + std::to_string(mdp.states()) + " states");
    }
    for (Index a : policy.actions) {
        if (a < 0 || a >= mdp.actions()) {
            throw InvalidInput(std::string(who) + ": policy action out of range");
        }
    }
}

template <typename Scalar>
void check_values(const MdpInstance<Scalar>& mdp, const ValueFunction<Scalar>& v, const char* who) {
    if (v.size() != mdp.states()) {
        throw InvalidInput(std::string(who) + ": value function has wrong length");
    }
}

} // namespace detail

/// Q(s,a) = R(s,a) + gamma * <P(s,a,.), V>, as an S x A table.
template <typename Scalar>
Matrix<Scalar> q_values(const MdpInstance<Scalar>& mdp, const ValueFunction<Scalar>& v, Scalar gamma) {
    detail::check_values(mdp, v, "q_values");
    const Vector<Scalar> expected = mdp.transitions.probs() * v;
    const Eigen::Map<const Matrix<Scalar>> next(expected.data(), mdp.states(), mdp.actions());
    return mdp.rewards.table() + gamma * next;
}

/// Greedy improvement step; ties go to the lowest action index.
template <typename Scalar>
Policy greedy_policy(const MdpInstance<Scalar>& mdp, const ValueFunction<Scalar>& v, Scalar gamma) {
    const Matrix<Scalar> q = q_values(mdp, v, gamma);
    Policy policy;
    policy.actions.resize(static_cast<std::size_t>(mdp.states()));
    for (Index s = 0; s < mdp.states(); ++s) {
        Index best = 0;
        for (Index a = 1; a < mdp.actions(); ++a) {
            if (q(s, a) > q(s, best)) best = a;
        }
        policy.actions[static_cast<std::size_t>(s)] = best;
    }
    return policy;
}

/// Transition matrix P_pi (S x S) and reward vector R_pi induced by a policy.
template <typename Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>> policy_dynamics(const MdpInstance<Scalar>& mdp, const Policy& policy) {
    detail::check_policy(mdp, policy, "policy_dynamics");
    const Index n = mdp.states();
    Matrix<Scalar> p(n, n);
    Vector<Scalar> r(n);
    for (Index s = 0; s < n; ++s) {
        p.row(s) = mdp.transitions.row(s, policy[s]);
        r(s) = mdp.rewards(s, policy[s]);
    }
    return {std::move(p), std::move(r)};
}

/// Sup norm of T*V - V for the Bellman optimality operator T*.
template <typename Scalar>
Scalar bellman_residual(const MdpInstance<Scalar>& mdp, const ValueFunction<Scalar>& v, Scalar gamma) {
    const Vector<Scalar> backed = q_values(mdp, v, gamma).rowwise().maxCoeff();
    return (backed - v).cwiseAbs().maxCoeff();
}

/**
 * Iterative policy evaluation.
 *
 * Applies V <- R_pi + gamma P_pi V from V = 0 until successive iterates differ
 * by at most `tol` in sup norm. The returned iterate therefore has Bellman
 * residual at most gamma * tol.
 */
template <typename Scalar>
ValueFunction<Scalar> policy_evaluation(const MdpInstance<Scalar>& mdp, const Policy& policy, Scalar gamma,
                                        Scalar tol = Scalar(1e-10), std::int64_t max_iters = 10'000'000) {
    detail::check_discount(gamma, "policy_evaluation");
    if (!(tol > Scalar(0))) throw InvalidInput("policy_evaluation: tol must be positive");
    const auto [p, r] = policy_dynamics(mdp, policy);

    ValueFunction<Scalar> v = r;
    if (gamma == Scalar(0)) return v;
    ValueFunction<Scalar> next(v.size());
    Scalar delta = std::numeric_limits<Scalar>::infinity();
    for (std::int64_t it = 0; it < max_iters; ++it) {
        next.noalias() = r;
        next.noalias() += gamma * (p * v);
        delta = (next - v).cwiseAbs().maxCoeff();
        v.swap(next);
        if (delta <= tol) return v;
    }
    throw ConvergenceError("policy_evaluation did not converge", static_cast<double>(delta));
}

template <typename Scalar>
struct PlanningSolution {
    ValueFunction<Scalar> values;
    Policy policy;
    std::int64_t iterations = 0;
    Scalar residual = Scalar(0);
};

/**
 * Value iteration from V = 0 with a sup-norm stopping rule.
 *
 * Stops once ||V_{k+1} - V_k|| <= tol, so the returned values are within
 * gamma * tol / (1 - gamma) of the optimal value function. The policy is
 * greedy with respect to the returned values.
 */
template <typename Scalar>
PlanningSolution<Scalar> value_iteration(const MdpInstance<Scalar>& mdp, Scalar gamma, Scalar tol = Scalar(1e-10),
                                         std::int64_t max_iters = 100'000) {
    detail::check_discount(gamma, "value_iteration");
    if (!(tol > Scalar(0))) throw InvalidInput("value_iteration: tol must be positive");
    if (max_iters < 1) throw InvalidInput("value_iteration: max_iters must be positive");

    ValueFunction<Scalar> v = ValueFunction<Scalar>::Zero(mdp.states());
    Scalar delta = std::numeric_limits<Scalar>::infinity();
    for (std::int64_t it = 1; it <= max_iters; ++it) {
        ValueFunction<Scalar> next = q_values(mdp, v, gamma).rowwise().maxCoeff();
        delta = (next - v).cwiseAbs().maxCoeff();
        v.swap(next);
        if (delta <= tol) {
            Policy policy = greedy_policy(mdp, v, gamma);
            return {std::move(v), std::move(policy), it, delta};
        }
    }
    throw ConvergenceError("value_iteration exceeded max_iters", static_cast<double>(delta));
}

} // namespace metaplan
