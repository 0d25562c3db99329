#include "metaplan/mdp.hpp"

#include "../support/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace metaplan;

TEST(BellmanProperty, ResidualWithinToleranceOnRandomMdps) {
    std::mt19937 gen(2024);
    std::uniform_int_distribution<int> states(2, 15), actions(1, 4);
    std::uniform_real_distribution<double> discount(0.0, 0.99);
    for (int rep = 0; rep < 100; ++rep) {
        const auto mdp = testing_support::random_mdp(states(gen), actions(gen), gen);
        const double g = discount(gen);
        const auto sol = value_iteration(mdp, g, 1e-10);
        EXPECT_LE(bellman_residual(mdp, sol.values, g), 1e-10) << "instance " << rep;
    }
}

TEST(BellmanProperty, MatchesPolicyEnumeration) {
    std::mt19937 gen(77);
    std::uniform_int_distribution<int> states(1, 6), actions(1, 3);
    std::uniform_real_distribution<double> discount(0.0, 0.95);
    for (int rep = 0; rep < 20; ++rep) {
        const Index s = states(gen), a = actions(gen);
        const auto mdp = testing_support::random_mdp(s, a, gen);
        const double g = discount(gen);
        Eigen::VectorXd best = Eigen::VectorXd::Constant(s, -1.0);
        for (const auto& pi : testing_support::all_policies(s, a)) {
            best = best.cwiseMax(testing_support::solve_policy(mdp, pi, g));
        }
        const auto sol = value_iteration(mdp, g, 1e-12);
        const double slack = 1e-8;
        EXPECT_LE((sol.values - best).cwiseAbs().maxCoeff(), slack) << "instance " << rep;
        EXPECT_LE((testing_support::solve_policy(mdp, sol.policy, g) - best).cwiseAbs().maxCoeff(), slack)
            << "instance " << rep;
    }
}
