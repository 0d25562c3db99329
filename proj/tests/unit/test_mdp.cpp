#include "metaplan/mdp.hpp"

#include "../support/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace metaplan;
using testing_support::all_policies;
using testing_support::random_mdp;
using testing_support::solve_policy;

namespace {

MdpInstance<double> single_state(std::vector<double> rewards, double gamma_eval = 0.9) {
    const auto a = static_cast<Index>(rewards.size());
    Matrix<double> r(1, a);
    for (Index j = 0; j < a; ++j) r(0, j) = rewards[static_cast<std::size_t>(j)];
    return {TransitionModel<double>(1, a, Matrix<double>::Ones(a, 1)), RewardTable<double>(r), gamma_eval};
}

// s0 -> s1 -> s1, one action, R(s0) = 0, R(s1) = 1.
MdpInstance<double> two_state_chain() {
    Matrix<double> p(2, 2);
    p << 0, 1, 0, 1;
    Matrix<double> r(2, 1);
    r << 0, 1;
    return {TransitionModel<double>(2, 1, p), RewardTable<double>(r), 0.95};
}

} // namespace

TEST(TransitionModel, RejectsBadRows) {
    Matrix<double> p(2, 2);
    p << 0.5, 0.6, 0.5, 0.5;
    EXPECT_THROW(TransitionModel<double>(2, 1, p), InvalidInput);
    p << -0.1, 1.1, 0.5, 0.5;
    EXPECT_THROW(TransitionModel<double>(2, 1, p), InvalidInput);
    EXPECT_THROW(TransitionModel<double>(2, 2, p), InvalidInput); // needs 4 rows
    EXPECT_THROW(TransitionModel<double>(0, 1, Matrix<double>(0, 0)), InvalidInput);
}

TEST(TransitionModel, IndexingIsStateMajor) {
    Matrix<double> p(4, 2);
    p << 1, 0, 0, 1, 0.25, 0.75, 0.5, 0.5;
    TransitionModel<double> m(2, 2, p);
    EXPECT_EQ(m.row_index(1, 0), 2);
    EXPECT_DOUBLE_EQ(m(1, 0, 1), 0.75);
    EXPECT_DOUBLE_EQ(m(0, 1, 1), 1.0);
}

TEST(RewardTable, RejectsOutOfRange) {
    Matrix<double> r(1, 2);
    r << 0.5, 1.5;
    EXPECT_THROW(RewardTable<double>{r}, InvalidInput);
    EXPECT_NO_THROW(RewardTable<double>(r, 2.0));
    r << -0.1, 0.5;
    EXPECT_THROW(RewardTable<double>{r}, InvalidInput);
}

TEST(MdpInstance, RejectsDiscountOutsideUnitInterval) {
    auto make = [](double g) { return single_state({0.5}, g); };
    EXPECT_THROW(make(0.0), InvalidInput);
    EXPECT_THROW(make(1.0), InvalidInput);
    EXPECT_NO_THROW(make(0.5));
}

TEST(PolicyEvaluation, GeometricSeries) {
    const auto mdp = single_state({1.0});
    const auto v = policy_evaluation(mdp, Policy{{0}}, 0.5);
    EXPECT_NEAR(v(0), 2.0, 1e-9);
}

TEST(PolicyEvaluation, ZeroDiscountIsImmediateReward) {
    std::mt19937 gen(3);
    const auto mdp = random_mdp(6, 3, gen);
    const auto pi = testing_support::random_policy(6, 3, gen);
    const auto v = policy_evaluation(mdp, pi, 0.0);
    for (Index s = 0; s < 6; ++s) EXPECT_EQ(v(s), mdp.rewards(s, pi[s]));
}

TEST(PolicyEvaluation, TwoStateChainByHand) {
    // V1 = 1 + 0.9 V1 => 10, V0 = 0 + 0.9 V1 => 9
    const auto v = policy_evaluation(two_state_chain(), Policy{{0, 0}}, 0.9);
    EXPECT_NEAR(v(0), 9.0, 1e-8);
    EXPECT_NEAR(v(1), 10.0, 1e-8);
}

TEST(PolicyEvaluation, MatchesDenseSolve) {
    std::mt19937 gen(11);
    for (int rep = 0; rep < 30; ++rep) {
        const Index s = 2 + rep % 19;
        const auto mdp = random_mdp(s, 2, gen);
        const auto pi = testing_support::random_policy(s, 2, gen);
        for (double g : {0.3, 0.9, 0.99}) {
            const double tol = 1e-10;
            const auto v = policy_evaluation(mdp, pi, g, tol);
            const Eigen::VectorXd exact = solve_policy(mdp, pi, g);
            // a residual of tol leaves at most tol / (1 - g) of error
            EXPECT_LE((v - exact).cwiseAbs().maxCoeff(), 10 * tol / (1 - g)) << "S=" << s << " gamma=" << g;
        }
    }
}

TEST(PolicyEvaluation, DimensionErrors) {
    const auto mdp = two_state_chain();
    EXPECT_THROW(policy_evaluation(mdp, Policy{{0}}, 0.5), InvalidInput);
    EXPECT_THROW(policy_evaluation(mdp, Policy{{0, 1}}, 0.5), InvalidInput);
    EXPECT_THROW(policy_evaluation(mdp, Policy{{0, 0}}, 1.0), InvalidInput);
    EXPECT_THROW(policy_evaluation(mdp, Policy{{0, 0}}, 0.5, 0.0), InvalidInput);
}

TEST(ValueIteration, BestArm) {
    const auto sol = value_iteration(single_state({0.2, 0.7}), 0.5);
    EXPECT_EQ(sol.policy.actions, std::vector<Index>{1});
    EXPECT_NEAR(sol.values(0), 1.4, 1e-9);
}

TEST(ValueIteration, ZeroDiscountIsMyopic) {
    std::mt19937 gen(5);
    const auto mdp = random_mdp(8, 3, gen);
    const auto sol = value_iteration(mdp, 0.0);
    for (Index s = 0; s < 8; ++s) {
        Index best = 0;
        for (Index a = 1; a < 3; ++a) {
            if (mdp.rewards(s, a) > mdp.rewards(s, best)) best = a;
        }
        EXPECT_EQ(sol.policy[s], best);
    }
}

TEST(ValueIteration, TiesGoToLowestAction) {
    const auto sol = value_iteration(single_state({0.5, 0.5, 0.5}), 0.9);
    EXPECT_EQ(sol.policy[0], 0);
}

TEST(ValueIteration, MatchesPolicyEnumeration) {
    std::mt19937 gen(42);
    const auto mdp = random_mdp(5, 2, gen);
    const auto sol = value_iteration(mdp, 0.9);
    Eigen::VectorXd best = Eigen::VectorXd::Constant(5, -1.0);
    for (const auto& pi : all_policies(5, 2)) best = best.cwiseMax(solve_policy(mdp, pi, 0.9));
    EXPECT_EQ(all_policies(5, 2).size(), 32u);
    const Eigen::VectorXd achieved = solve_policy(mdp, sol.policy, 0.9);
    EXPECT_LE((achieved - best).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LE((sol.values - best).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ValueIteration, ResidualWithinTolerance) {
    std::mt19937 gen(8);
    const auto mdp = random_mdp(10, 2, gen);
    const auto sol = value_iteration(mdp, 0.99, 1e-10);
    EXPECT_LE(bellman_residual(mdp, sol.values, 0.99), 1e-10);
}

TEST(ValueIteration, ConvergenceErrorCarriesResidual) {
    std::mt19937 gen(9);
    const auto mdp = random_mdp(4, 2, gen);
    try {
        value_iteration(mdp, 0.99, 1e-12, 5);
        FAIL() << "expected a convergence error";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual(), 1e-12);
    }
}

TEST(ValueIteration, WorksInSinglePrecision) {
    Matrix<float> r(1, 2);
    r << 0.2f, 0.7f;
    MdpInstance<float> mdp(TransitionModel<float>(1, 2, Matrix<float>::Ones(2, 1)), RewardTable<float>(r), 0.9f);
    const auto sol = value_iteration(mdp, 0.5f, 1e-6f);
    EXPECT_EQ(sol.policy[0], 1);
    EXPECT_NEAR(sol.values(0), 1.4f, 1e-5f);
}

TEST(GreedyPolicy, ZeroValuesPickBestReward) {
    std::mt19937 gen(13);
    const auto mdp = random_mdp(7, 3, gen);
    const ValueFunction<double> zero = ValueFunction<double>::Zero(7);
    const auto pi = greedy_policy(mdp, zero, 0.9);
    EXPECT_EQ(pi, greedy_policy(mdp, zero, 0.0));
    const ValueFunction<double> threes = ValueFunction<double>::Constant(7, 3.0);
    EXPECT_EQ(pi, greedy_policy(mdp, threes, 0.0));
}

TEST(GreedyPolicy, HandComputedQTable) {
    // Three states, two actions.
    // a0 stays put, a1 moves to the next state (cyclically).
    Matrix<double> p = Matrix<double>::Zero(6, 3);
    p(0, 0) = 1;
    p(1, 1) = 1;
    p(2, 1) = 1;
    p(3, 2) = 1;
    p(4, 2) = 1;
    p(5, 0) = 1;
    Matrix<double> r(3, 2);
    r << 0.1, 0.0, 0.5, 0.2, 0.3, 0.4;
    MdpInstance<double> mdp(TransitionModel<double>(3, 2, p), RewardTable<double>(r), 0.9);
    ValueFunction<double> v(3);
    v << 1.0, 2.0, 0.0;
    // Q(0,0) = 0.1 + 0.5*1 = 0.6,  Q(0,1) = 0 + 0.5*2 = 1.0
    // Q(1,0) = 0.5 + 0.5*2 = 1.5,  Q(1,1) = 0.2 + 0.5*0 = 0.2
    // Q(2,0) = 0.3 + 0 = 0.3,      Q(2,1) = 0.4 + 0.5*1 = 0.9
    const Matrix<double> q = q_values(mdp, v, 0.5);
    Matrix<double> expected(3, 2);
    expected << 0.6, 1.0, 1.5, 0.2, 0.3, 0.9;
    EXPECT_LE((q - expected).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(greedy_policy(mdp, v, 0.5).actions, (std::vector<Index>{1, 0, 1}));
}

TEST(GreedyPolicy, RejectsWrongLength) {
    const auto mdp = two_state_chain();
    const ValueFunction<double> v = ValueFunction<double>::Zero(3);
    EXPECT_THROW(greedy_policy(mdp, v, 0.5), InvalidInput);
}
