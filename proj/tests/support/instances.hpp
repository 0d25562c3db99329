#pragma once

// Small random instances for tests, built with a plain std::mt19937 so they do
// not depend on the library's own generators.

#include "metaplan/mdp.hpp"

#include <Eigen/Dense>

#include <random>

namespace testing_support {

using metaplan::Index;
using metaplan::Matrix;

inline Matrix<double> random_stochastic(Index rows, Index cols, std::mt19937& gen, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix<double> p(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) p(r, c) = u(gen) < zero_prob ? 0.0 : u(gen) + 1e-3;
        if (p.row(r).sum() == 0.0) p(r, 0) = 1.0;
        p.row(r) /= p.row(r).sum();
    }
    return p;
}

inline metaplan::MdpInstance<double> random_mdp(Index s, Index a, std::mt19937& gen, double gamma_eval = 0.99) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix<double> r(s, a);
    for (Index i = 0; i < s; ++i) {
        for (Index j = 0; j < a; ++j) r(i, j) = u(gen);
    }
    return {metaplan::TransitionModel<double>(s, a, random_stochastic(s * a, s, gen, 0.3)),
            metaplan::RewardTable<double>(r), gamma_eval};
}

inline metaplan::Policy random_policy(Index s, Index a, std::mt19937& gen) {
    std::uniform_int_distribution<Index> pick(0, a - 1);
    metaplan::Policy p;
    for (Index i = 0; i < s; ++i) p.actions.push_back(pick(gen));
    return p;
}

// Exact V^pi from a dense solve of (I - gamma P_pi) V = R_pi.
inline Eigen::VectorXd solve_policy(const metaplan::MdpInstance<double>& mdp, const metaplan::Policy& pi, double gamma) {
    const Index s = mdp.states();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(s, s);
    Eigen::VectorXd r(s);
    for (Index i = 0; i < s; ++i) {
        r(i) = mdp.rewards(i, pi[i]);
        for (Index j = 0; j < s; ++j) a(i, j) -= gamma * mdp.transitions(i, pi[i], j);
    }
    return a.partialPivLu().solve(r);
}

// Every deterministic policy, in lexicographic order of actions.
inline std::vector<metaplan::Policy> all_policies(Index s, Index a) {
    std::vector<metaplan::Policy> out;
    metaplan::Policy p;
    p.actions.assign(static_cast<std::size_t>(s), 0);
    while (true) {
        out.push_back(p);
        Index i = 0;
        while (i < s && ++p.actions[static_cast<std::size_t>(i)] == a) p.actions[static_cast<std::size_t>(i++)] = 0;
        if (i == s) break;
    }
    return out;
}

} // namespace testing_support
