#include "metaplan/horizon.hpp"
#include "metaplan/mdp.hpp"

#include "../support/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace metaplan;

// V_gamma <= V_gamma_eval <= V_gamma + bias(gamma) for every state and policy,
// with values from an exact dense solve.
TEST(DiscountSandwich, HoldsPerState) {
    std::mt19937 gen(31);
    std::uniform_int_distribution<int> states(2, 12), actions(1, 4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const Index s = states(gen), a = actions(gen);
        const double gamma_eval = 0.5 + 0.49 * u(gen);
        const double gamma = gamma_eval * u(gen);
        const auto mdp = testing_support::random_mdp(s, a, gen, gamma_eval);
        const auto pi = testing_support::random_policy(s, a, gen);
        const Eigen::VectorXd lo = testing_support::solve_policy(mdp, pi, gamma);
        const Eigen::VectorXd mid = testing_support::solve_policy(mdp, pi, gamma_eval);
        const double bias = gamma_bias(gamma, gamma_eval, 1.0);
        for (Index i = 0; i < s; ++i) {
            EXPECT_LE(lo(i), mid(i) + 1e-8) << "instance " << rep << " state " << i;
            EXPECT_LE(mid(i), lo(i) + bias + 1e-8) << "instance " << rep << " state " << i;
        }
    }
}
