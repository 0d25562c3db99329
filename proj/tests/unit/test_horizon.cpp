#include "metaplan/horizon.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace metaplan;

namespace {

BoundParams params(std::int64_t m = 5, std::int64_t t = 15, double sigma = 0.01) {
    BoundParams p;
    p.m = m;
    p.t_tasks = t;
    p.sigma = sigma;
    return p;
}

} // namespace

TEST(GammaBias, ZeroAtEvaluationDiscount) { EXPECT_EQ(gamma_bias(0.99, 0.99), 0.0); }

TEST(GammaBias, MyopicValue) { EXPECT_DOUBLE_EQ(gamma_bias(0.0, 0.5, 1.0), 1.0); }

TEST(GammaBias, ScalesWithRmax) { EXPECT_DOUBLE_EQ(gamma_bias(0.2, 0.9, 3.0), 3.0 * gamma_bias(0.2, 0.9, 1.0)); }

TEST(GammaBias, DecreasingOnGrid) {
    double prev = gamma_bias(0.0, 0.95);
    for (int i = 1; i < 20; ++i) {
        const double cur = gamma_bias(std::min(0.95, 0.05 * i), 0.95);
        EXPECT_LT(cur, prev);
        prev = cur;
    }
}

TEST(GammaBias, RejectsGammaAboveEvaluation) {
    EXPECT_THROW(gamma_bias(0.995, 0.99), InvalidInput);
    EXPECT_THROW(gamma_bias(-0.1, 0.99), InvalidInput);
}

TEST(SingleTaskBound, MyopicIsPureBias) {
    EXPECT_DOUBLE_EQ(theorem1_bound(0.0, params()), gamma_bias(0.0, 0.99));
}

TEST(SingleTaskBound, MatchesIndependentEvaluation) {
    auto p = params(7);
    p.delta = 0.1;
    p.rmax = 2.0;
    const double g = 0.8;
    const double log_pi = 10.0 * std::log(2.0);
    const double expected = (0.99 - g) / (0.01 * (1 - g)) +
                            2 * g * 2.0 / ((1 - g) * (1 - g)) * std::sqrt(1.0 / 14.0 * (std::log(2 * 20 / 0.1) + log_pi));
    EXPECT_NEAR(theorem1_bound(g, p), expected, 1e-12 * expected);
}

TEST(SingleTaskBound, LargeSampleLimitIsBias) {
    const auto p = params(1'000'000'000'000);
    EXPECT_NEAR(theorem1_bound(0.9, p), gamma_bias(0.9, 0.99), 1e-3);
}

TEST(SingleTaskBound, MoreSamplesTighten) {
    EXPECT_LT(theorem1_bound(0.9, params(50)), theorem1_bound(0.9, params(5)));
}

TEST(SingleTaskBound, ExplicitPolicyCountAndLogFactor) {
    auto p = params();
    p.policy_count_log = 0.0;
    const auto base = theorem1_terms(0.5, p);
    p.log_factor = 3.0;
    const auto scaled = theorem1_terms(0.5, p);
    EXPECT_DOUBLE_EQ(scaled.bias, base.bias);
    EXPECT_NEAR(scaled.uncertainty, 3.0 * base.uncertainty, 1e-12);
}

TEST(AveragedBound, MatchesIndependentEvaluation) {
    const auto p = params(5, 15, 0.2);
    const double g = 0.6, s = 0.2, m = 5, t = 15;
    const double bracket = (s + (s + std::sqrt(s * s + 1 / m)) / std::sqrt(t)) / (s * s * m + 1) +
                           s * s * m * std::sqrt(1 / m) / (s * s * m + 1);
    const double expected = (0.99 - g) / (0.01 * (1 - g)) + 2 * g * 10 / ((1 - g) * (1 - g)) * bracket;
    EXPECT_NEAR(theorem2_bound(g, p), expected, 1e-12 * expected);
}

TEST(AveragedBound, MyopicIsPureBias) {
    const auto terms = theorem2_terms(0.0, params());
    EXPECT_EQ(terms.uncertainty, 0.0);
    EXPECT_DOUBLE_EQ(terms.bias, gamma_bias(0.0, 0.99));
}

TEST(AveragedBound, IdenticalTasksRecoverPooledRate) {
    for (std::int64_t m : {1, 5, 40}) {
        for (std::int64_t t : {1, 3, 15}) {
            auto p = params(m, t, 0.0);
            EXPECT_NEAR(theorem2_bracket(p), std::sqrt(1.0 / static_cast<double>(m * t)), 1e-15);
            EXPECT_NEAR(theorem2_bracket(p), theorem2_bracket_identical_tasks(m, t), 1e-15);
        }
    }
    // doubling m T divides the bracket by sqrt 2
    EXPECT_NEAR(theorem2_bracket(params(5, 15, 0.0)) / theorem2_bracket(params(10, 15, 0.0)), std::sqrt(2.0), 1e-12);
}

TEST(AveragedBound, UnitSigmaMatchesUnstructuredExpansion) {
    // With sigma = Sigma = 1 each piece of the bracket carries an extra m / (m + 1)
    // against the leading-order expansion (1/m)(1 + (1 + sqrt(1 + 1/m)) / sqrt T) + 1/sqrt m.
    for (std::int64_t m : {1, 5, 20}) {
        for (std::int64_t t : {1, 15}) {
            const double md = static_cast<double>(m);
            const double exact = theorem2_bracket(params(m, t, 1.0));
            const double expansion = (1 / md) * (1 + (1 + std::sqrt(1 + 1 / md)) / std::sqrt(double(t))) + 1 / std::sqrt(md);
            EXPECT_NEAR(exact, md / (md + 1) * expansion, 1e-14);
            EXPECT_NEAR(theorem2_bracket_unstructured(m, t), expansion, 1e-14);
        }
    }
}

TEST(BoundParams, ValidationNamesEveryViolation) {
    BoundParams p;
    p.m = 0;
    p.delta = 1.0;
    p.cap_sigma = 2.0;
    try {
        p.validate();
        FAIL();
    } catch (const InvalidInput& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("m>=1"), std::string::npos);
        EXPECT_NE(msg.find("delta"), std::string::npos);
        EXPECT_NE(msg.find("Sigma"), std::string::npos);
    }
}

TEST(ConstantC, WorkedExample) { EXPECT_DOUBLE_EQ(constant_c(4, 1, 0.0), 0.5); }

TEST(ConstantC, NonincreasingInTasks) {
    for (double s : {0.0, 0.01, 0.1, 0.5}) {
        double prev = constant_c(5, 1, s);
        for (std::int64_t t = 2; t <= 50; ++t) {
            const double cur = constant_c(5, t, s);
            EXPECT_LE(cur, prev);
            prev = cur;
        }
    }
}

TEST(ConstantC, MatchesHighPrecisionEvaluation) {
    using big = boost::multiprecision::cpp_bin_float_50;
    const big sigma("0.01");
    const big m(5), t(15);
    const big inv_sqrt_m = 1 / boost::multiprecision::sqrt(m);
    const big shrink = sigma * sigma * m + 1;
    const big expected = (1 / boost::multiprecision::sqrt(t)) * (sigma + inv_sqrt_m) / shrink +
                         sigma * sigma * m * inv_sqrt_m / shrink;
    EXPECT_NEAR(constant_c(5, 15, 0.01), expected.convert_to<double>(), 1e-15);
}

TEST(DiscountMinimiser, PiecewiseCases) {
    EXPECT_EQ(prop1_gamma(2.0), 0.0);
    EXPECT_EQ(prop1_gamma(1.0), 0.0);
    EXPECT_EQ(prop1_gamma(0.25), 1.0);
    EXPECT_NEAR(prop1_gamma(0.75), 1.0 / 7.0, 1e-15);
    EXPECT_DOUBLE_EQ(prop1_gamma(0.5), 1.0 / 3.0);
    EXPECT_THROW(prop1_gamma(-0.1), InvalidInput);
}

TEST(DiscountMinimiser, InteriorCaseIsStationaryPointOfShape) {
    // dU/dgamma = -1/(g-1)^2 + c (1+g)/(1-g)^3 vanishes at the interior minimiser
    for (double c : {0.55, 0.7, 0.9}) {
        const double g = prop1_gamma(c);
        const double h = 1e-6;
        const double slope = (bound_shape(g + h, c, 0.99) - bound_shape(g - h, c, 0.99)) / (2 * h);
        EXPECT_NEAR(slope, 0.0, 1e-5);
    }
}

TEST(BoundGuided, Cases) {
    EXPECT_DOUBLE_EQ(bound_guided_gamma(1.5, 0.3, 0.99), 0.3);
    EXPECT_DOUBLE_EQ(bound_guided_gamma(0.25, 0.1, 0.99), 0.99);
    EXPECT_NEAR(bound_guided_gamma(0.75, 0.4, 0.99), 0.4 + 1.0 / 7.0, 1e-15);
    EXPECT_THROW(bound_guided_gamma(0.75, 1.0, 0.99), InvalidInput);
}

TEST(PhaseSchedule, PhaseLengthToDiscount) {
    // T_t = (SA / L) (alpha m (t - 1) + (1 - alpha) m); S A = 4, L = 1, m = 8, alpha = 1, t = 2 gives 32
    EXPECT_DOUBLE_EQ(dong_phase_length(8, 1.0, 2, 2, 2, 1.0), 32.0);
    EXPECT_NEAR(dong_gamma(8, 1.0, 2, 2, 2, 1.0, 0.99), 0.5, 1e-15);
    EXPECT_NEAR(dong_gamma(1, 0.0, 1, 2, 2, 1.0, 0.99), 0.0, 1e-15);
}

TEST(PhaseSchedule, NoMetaScheduleIsConstantAfterFirstTask) {
    const double g2 = dong_gamma(5, 0.0, 2, 10, 2, 100, 0.99);
    for (std::int64_t t = 3; t < 20; ++t) EXPECT_EQ(dong_gamma(5, 0.0, t, 10, 2, 100, 0.99), g2);
    EXPECT_DOUBLE_EQ(dong_phase_length(5, 0.0, 2, 10, 2, 100), 20.0 * 5 / 100);
}

TEST(PhaseSchedule, FirstTaskUsesBatchSize) { EXPECT_DOUBLE_EQ(dong_phase_length(5, 0.7, 1, 10, 2, 100), 5.0); }

TEST(PhaseSchedule, ClampedToEvaluationDiscount) { EXPECT_EQ(dong_gamma(1'000'000, 1.0, 1000, 10, 2, 1.0, 0.9), 0.9); }

TEST(PhaseSchedule, DefaultTrajectoryLength) {
    EXPECT_EQ(default_l_max(0.99), 100.0);
    EXPECT_EQ(default_l_max(0.9), 10.0);
    EXPECT_EQ(default_l_max(0.95), 20.0);
}

TEST(GammaGrid, DefaultShape) {
    const auto g = default_gamma_grid(0.99);
    ASSERT_EQ(g.size(), 21u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_NEAR(g[19], 0.95, 1e-15);
    EXPECT_EQ(g.back(), 0.99);
    EXPECT_EQ(default_gamma_grid(0.5).back(), 0.5);
    EXPECT_EQ(default_gamma_grid(0.5).size(), 11u);
}

TEST(Hindsight, SingleColumn) {
    Matrix<double> loss(3, 1);
    loss << 0.3, 0.1, 0.2;
    for (auto mode : {HindsightMode::best_fixed, HindsightMode::dynamic_best}) {
        const auto c = hindsight_select(loss, {0.7}, mode);
        EXPECT_EQ(c.gamma, (std::vector<double>{0.7, 0.7, 0.7}));
        EXPECT_NEAR(c.mean_loss(), 0.2, 1e-15);
    }
}

TEST(Hindsight, DominantColumnAgrees) {
    Matrix<double> loss(3, 3);
    loss << 0.5, 0.1, 0.4, 0.6, 0.2, 0.3, 0.9, 0.0, 0.8;
    const auto a = hindsight_select(loss, {0.1, 0.5, 0.9}, HindsightMode::best_fixed);
    const auto b = hindsight_select(loss, {0.1, 0.5, 0.9}, HindsightMode::dynamic_best);
    EXPECT_EQ(a.column, b.column);
    EXPECT_EQ(a.gamma[0], 0.5);
}

TEST(Hindsight, DynamicBeatsFixedAgainstEnumeration) {
    Matrix<double> loss(3, 3);
    loss << 0.1, 0.5, 0.9, 0.6, 0.2, 0.7, 0.8, 0.7, 0.3;
    const std::vector<double> grid{0.0, 0.5, 0.9};
    const auto fixed = hindsight_select(loss, grid, HindsightMode::best_fixed);
    const auto dyn = hindsight_select(loss, grid, HindsightMode::dynamic_best);
    // enumerate all 27 per-task assignments and all 3 constant ones
    double best_any = 1e9, best_const = 1e9;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                const double mean = (loss(0, i) + loss(1, j) + loss(2, k)) / 3.0;
                best_any = std::min(best_any, mean);
                if (i == j && j == k) best_const = std::min(best_const, mean);
            }
        }
    }
    EXPECT_NEAR(dyn.mean_loss(), best_any, 1e-15);
    EXPECT_NEAR(fixed.mean_loss(), best_const, 1e-15);
    EXPECT_LE(dyn.mean_loss(), fixed.mean_loss());
}

TEST(Hindsight, TiesGoToSmallerDiscount) {
    Matrix<double> loss(2, 3);
    loss << 0.2, 0.1, 0.1, 0.0, 0.0, 0.5;
    const std::vector<double> grid{0.0, 0.5, 0.9};
    EXPECT_EQ(hindsight_select(loss, grid, HindsightMode::dynamic_best).gamma, (std::vector<double>{0.5, 0.0}));
    Matrix<double> flat = Matrix<double>::Constant(2, 3, 0.4);
    EXPECT_EQ(hindsight_select(flat, grid, HindsightMode::best_fixed).gamma[0], 0.0);
}

TEST(Hindsight, RejectsBadShapes) {
    EXPECT_THROW(hindsight_select(Matrix<double>(0, 2), {0.1, 0.2}, HindsightMode::best_fixed), InvalidInput);
    EXPECT_THROW(hindsight_select(Matrix<double>::Zero(2, 2), {0.1}, HindsightMode::best_fixed), InvalidInput);
}

TEST(GammaSchedule, ParseAndLabel) {
    EXPECT_EQ(GammaSchedule::parse("fixed:0.99", 0.99).label(), "fixed_0.99");
    EXPECT_EQ(GammaSchedule::parse("fixed", 0.9).parameter(), 0.9);
    EXPECT_EQ(GammaSchedule::parse("dong", 0.99).label(), "dong");
    EXPECT_EQ(GammaSchedule::parse("dong:50", 0.99).label(), "dong_50");
    EXPECT_EQ(GammaSchedule::parse("bound_guided", 0.99).label(), "bound_guided_0.3");
    EXPECT_EQ(GammaSchedule::parse("bound_guided:0.4", 0.99).parameter(), 0.4);
    EXPECT_TRUE(GammaSchedule::parse("best_fixed", 0.99).is_hindsight());
    EXPECT_EQ(GammaSchedule::parse("dynamic_best", 0.99).kind(), GammaSchedule::Kind::dynamic_best);
    for (const char* bad : {"fixed:0.995", "fixed:x", "fixed:0.5z", "best_fixed:1", "nope", "bound_guided:1.2"}) {
        EXPECT_THROW(GammaSchedule::parse(bad, 0.99), InvalidInput) << bad;
    }
}

TEST(GammaSchedule, SelectStaysWithinEvaluationDiscount) {
    std::mt19937 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<GammaSchedule> schedules{GammaSchedule::fixed(0.5), GammaSchedule::dong(0.0),
                                               GammaSchedule::dong(1.0), GammaSchedule::bound_guided(0.3)};
    for (int rep = 0; rep < 200; ++rep) {
        ScheduleContext ctx;
        ctx.t = 1 + rep % 30;
        ctx.alpha = u(gen);
        ctx.sigma = u(gen);
        ctx.m = 1 + rep % 9;
        for (const auto& s : schedules) {
            const double g = s.select(ctx);
            EXPECT_GE(g, 0.0);
            EXPECT_LE(g, ctx.gamma_eval);
        }
    }
    EXPECT_THROW(GammaSchedule::best_fixed().select(ScheduleContext{}), InvalidInput);
}

TEST(GammaSchedule, BoundGuidedUsesConstant) {
    ScheduleContext ctx;
    ctx.t = 4;
    ctx.m = 1;
    ctx.sigma = 0.0;
    // C = (1/2)(1) = 0.5 so the offset is 1/3
    EXPECT_NEAR(GammaSchedule::bound_guided(0.3).select(ctx), 0.3 + 1.0 / 3.0, 1e-15);
}
