#include "metaplan/task_gen.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include <cmath>
#include <numeric>
#include <vector>

namespace metaplan {

std::string to_string(SigmaConvention c) { return c == SigmaConvention::variance ? "variance" : "stddev"; }

SigmaConvention parse_sigma_convention(const std::string& name) {
    if (name == "variance") return SigmaConvention::variance;
    if (name == "stddev") return SigmaConvention::stddev;
    throw InvalidInput("unknown sigma convention '" + name + "' (expected variance or stddev)");
}

double apply_sigma_convention(double variance, SigmaConvention c) {
    return c == SigmaConvention::variance ? variance : std::sqrt(variance);
}

Vector<double> sigma_of_dirichlet(const Eigen::Ref<const Eigen::RowVectorXd>& mean_row, double a0) {
    if (!(a0 > 0.0)) throw InvalidInput("sigma_of_dirichlet: a0 must be positive");
    return (mean_row.array() * (1.0 - mean_row.array()) / (a0 + 1.0)).transpose().matrix();
}

MetaDistribution make_meta_distribution(TransitionModel<double> mean, Matrix<double> concentration,
                                        SigmaConvention convention) {
    const Index n_states = mean.states();
    const Index n_actions = mean.actions();
    if (concentration.rows() != n_states || concentration.cols() != n_actions) {
        throw InvalidInput("make_meta_distribution: concentration must be S x A");
    }
    if (!(concentration.array() > 0.0).all()) {
        throw InvalidInput("make_meta_distribution: concentration must be positive");
    }
    Matrix<double> sigma(n_states, n_actions);
    for (Index s = 0; s < n_states; ++s) {
        for (Index a = 0; a < n_actions; ++a) {
            const double var = sigma_of_dirichlet(mean.row(s, a), concentration(s, a)).maxCoeff();
            sigma(s, a) = apply_sigma_convention(var, convention);
        }
    }
    return MetaDistribution{std::move(mean), std::move(concentration), std::move(sigma), convention};
}

MetaDistribution make_meta_distribution(TransitionModel<double> mean, double a0, SigmaConvention convention) {
    Matrix<double> conc = Matrix<double>::Constant(mean.states(), mean.actions(), a0);
    return make_meta_distribution(std::move(mean), std::move(conc), convention);
}

double concentration_for_sigma(const TransitionModel<double>& mean, double target, SigmaConvention convention) {
    if (!(target > 0.0)) throw InvalidInput("concentration_for_sigma: target sigma must be positive");
    const double spread = (mean.probs().array() * (1.0 - mean.probs().array())).maxCoeff();
    const double variance = convention == SigmaConvention::variance ? target : target * target;
    const double a0 = spread / variance - 1.0;
    if (!(a0 > 0.0)) {
        throw InvalidInput("concentration_for_sigma: target sigma " + std::to_string(target) +
                           " is not reachable for this mean model");
    }
    return a0;
}

TransitionModel<double> random_chain_mdp(Index states, Index actions, Index zeroed, RngStream& rng) {
    if (states < 1 || actions < 1) throw InvalidInput("random_chain_mdp: need S >= 1 and A >= 1");
    if (zeroed < 0 || zeroed >= states) throw InvalidInput("random_chain_mdp: need 0 <= k < S");

    auto& eng = rng.engine();
    boost::random::uniform_01<double> unit;
    Matrix<double> probs = Matrix<double>::Zero(states * actions, states);
    std::vector<Index> order(static_cast<std::size_t>(states));
    for (Index r = 0; r < states * actions; ++r) {
        std::iota(order.begin(), order.end(), Index{0});
        // partial Fisher-Yates: the first k entries are the zeroed states
        for (Index i = 0; i < zeroed; ++i) {
            boost::random::uniform_int_distribution<Index> pick(i, states - 1);
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(eng))]);
        }
        for (Index i = zeroed; i < states; ++i) {
            probs(r, order[static_cast<std::size_t>(i)]) = 1.0 - unit(eng);
        }
        probs.row(r) /= probs.row(r).sum();
    }
    return TransitionModel<double>(states, actions, std::move(probs));
}

RewardTable<double> random_rewards(Index states, Index actions, RngStream& rng, double rmax) {
    auto& eng = rng.engine();
    boost::random::uniform_01<double> unit;
    Matrix<double> r(states, actions);
    for (Index s = 0; s < states; ++s) {
        for (Index a = 0; a < actions; ++a) r(s, a) = rmax * unit(eng);
    }
    return RewardTable<double>(std::move(r), rmax);
}

TransitionModel<double> sample_task(const MetaDistribution& dist, RngStream& rng) {
    const auto& mean = dist.mean;
    auto& eng = rng.engine();
    Matrix<double> probs = Matrix<double>::Zero(mean.probs().rows(), mean.states());
    for (Index s = 0; s < mean.states(); ++s) {
        for (Index a = 0; a < mean.actions(); ++a) {
            const Index r = mean.row_index(s, a);
            const double a0 = dist.concentration(s, a);
            double total = 0.0;
            // Very small shapes can underflow every draw to zero; redraw in that case.
            while (!(total > 0.0)) {
                for (Index j = 0; j < mean.states(); ++j) {
                    const double shape = mean(s, a, j) * a0;
                    if (shape > 0.0) {
                        boost::random::gamma_distribution<double> g(shape, 1.0);
                        probs(r, j) = g(eng);
                    }
                }
                total = probs.row(r).sum();
            }
            probs.row(r) /= total;
        }
    }
    return TransitionModel<double>(mean.states(), mean.actions(), std::move(probs));
}

SampleBatch sample_batch(const TransitionModel<double>& model, std::int64_t m, RngStream& rng) {
    if (m < 1) throw InvalidInput("sample_batch: m must be at least 1");
    const Index n = model.states();
    SampleBatch batch;
    batch.states = n;
    batch.actions = model.actions();
    batch.m = m;
    batch.counts.setZero(model.probs().rows(), n);

    auto& eng = rng.engine();
    boost::random::uniform_01<double> unit;
    Eigen::RowVectorXd cdf(n);
    for (Index r = 0; r < model.probs().rows(); ++r) {
        std::partial_sum(model.probs().row(r).begin(), model.probs().row(r).end(), cdf.begin());
        Index last_positive = 0;
        for (Index j = 0; j < n; ++j) {
            if (model.probs()(r, j) > 0.0) last_positive = j;
        }
        for (std::int64_t i = 0; i < m; ++i) {
            const double u = unit(eng);
            Index j = 0;
            while (j < n && !(cdf(j) > u)) ++j;
            batch.counts(r, j < n ? j : last_positive) += 1;
        }
    }
    return batch;
}

} // namespace metaplan
