#pragma once

// Random chain MDPs, Dirichlet task distributions and generative-model batches.

#include "metaplan/mdp.hpp"
#include "metaplan/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace metaplan {

/// How a Dirichlet coordinate variance is turned into a task-similarity value.
enum class SigmaConvention { variance, stddev };

std::string to_string(SigmaConvention c);
SigmaConvention parse_sigma_convention(const std::string& name);

/// Map a per-coordinate variance onto the configured sigma scale.
double apply_sigma_convention(double variance, SigmaConvention c);

/**
 * Dirichlet meta-distribution centred on a mean model.
 *
 * Row (s,a) of a task is drawn from Dir(P^o(s,a,.) * a0(s,a)); sigma(s,a) is
 * the largest per-coordinate similarity value of that row.
 */
struct MetaDistribution {
    TransitionModel<double> mean;
    Matrix<double> concentration; // S x A, total Dirichlet mass per row
    Matrix<double> sigma;         // S x A, convention already applied
    SigmaConvention convention = SigmaConvention::variance;

    double sigma_max() const { return sigma.maxCoeff(); }
};

MetaDistribution make_meta_distribution(TransitionModel<double> mean, double a0,
                                        SigmaConvention convention = SigmaConvention::variance);

MetaDistribution make_meta_distribution(TransitionModel<double> mean, Matrix<double> concentration,
                                        SigmaConvention convention = SigmaConvention::variance);

/// The a0 for which the largest similarity value of `mean` equals `target`.
double concentration_for_sigma(const TransitionModel<double>& mean, double target, SigmaConvention convention);

/// sigma_i = p_i (1 - p_i) / (a0 + 1) for each coordinate of a simplex row.
Vector<double> sigma_of_dirichlet(const Eigen::Ref<const Eigen::RowVectorXd>& mean_row, double a0);

/// Random chain MDP: per (s,a), k next states get probability zero and the rest
/// are uniform on (0,1] before normalisation.
TransitionModel<double> random_chain_mdp(Index states, Index actions, Index zeroed, RngStream& rng);

/// Rewards drawn uniformly on [0, rmax] per (s,a).
RewardTable<double> random_rewards(Index states, Index actions, RngStream& rng, double rmax = 1.0);

/// Draw one task transition model from the meta-distribution.
TransitionModel<double> sample_task(const MetaDistribution& dist, RngStream& rng);

/// m i.i.d. next-state samples per (s,a), stored as counts.
struct SampleBatch {
    Index states = 0;
    Index actions = 0;
    std::int64_t m = 0;
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> counts; // (S*A) x S
};

SampleBatch sample_batch(const TransitionModel<double>& model, std::int64_t m, RngStream& rng);

} // namespace metaplan
