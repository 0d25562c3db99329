#include "metaplan/estimation.hpp"

#include "../support/instances.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace metaplan;

namespace {

// ||empirical - P||^2 + lambda ||P - prior||^2 summed over all (s,a) rows
double objective(const Matrix<double>& p, const Matrix<double>& empirical, const Matrix<double>& prior, double lambda) {
    return (empirical - p).squaredNorm() + lambda * (p - prior).squaredNorm();
}

} // namespace

TEST(RlsOptimality, ClosedFormBeatsTangentPerturbations) {
    std::mt19937 gen(5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    const Index s = 6, a = 2;
    for (int instance = 0; instance < 5; ++instance) {
        const TransitionModel<double> empirical(s, a, testing_support::random_stochastic(s * a, s, gen, 0.3));
        const TransitionModel<double> prior(s, a, testing_support::random_stochastic(s * a, s, gen));
        const double alpha = u(gen);
        const double lambda = alpha / (1.0 - alpha);
        const Matrix<double> p_hat = rls_estimate(empirical, prior, alpha).probs();
        const double best = objective(p_hat, empirical.probs(), prior.probs(), lambda);
        for (int k = 0; k < 1000; ++k) {
            Matrix<double> d(s * a, s);
            for (Index i = 0; i < d.size(); ++i) d.data()[i] = normal(gen);
            // project each row onto the sum-zero tangent space of the simplex
            d.colwise() -= d.rowwise().mean();
            d /= d.norm();
            for (double eps : {1e-3, -1e-3}) {
                EXPECT_LE(best, objective(p_hat + eps * d, empirical.probs(), prior.probs(), lambda))
                    << "instance " << instance << " direction " << k;
            }
        }
    }
}
