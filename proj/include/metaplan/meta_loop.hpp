#pragma once

// Planning loss and the online meta-learning drivers.

#include "metaplan/estimation.hpp"
#include "metaplan/horizon.hpp"
#include "metaplan/mdp.hpp"
#include "metaplan/task_gen.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace metaplan {

/**
 * Planning loss ||V*_{M,gamma_eval} - V^{pi_hat}_{M,gamma_eval}||_inf, where
 * pi_hat is optimal for the true rewards with `est_model` at discount `gamma`.
 * Both value functions are computed on the true model at gamma_eval.
 */
double planning_loss(const MdpInstance<double>& true_mdp, const TransitionModel<double>& est_model, double gamma,
                     double tol = 1e-10);

/**
 * Planning-loss evaluator bound to one true task.
 *
 * Solves the true task once and memoises the evaluation of every distinct
 * planned policy, so sweeping a discount grid costs one value iteration per
 * grid point plus one evaluation per distinct policy.
 */
class PlanningEvaluator {
public:
    explicit PlanningEvaluator(MdpInstance<double> true_mdp, double tol = 1e-10);

    double loss(const TransitionModel<double>& est_model, double gamma);
    double loss_of(const Policy& policy);

    const MdpInstance<double>& mdp() const noexcept { return mdp_; }
    const Policy& optimal_policy() const noexcept { return optimal_policy_; }
    const ValueFunction<double>& optimal_values() const noexcept { return optimal_values_; }

private:
    MdpInstance<double> mdp_;
    double tol_;
    Policy optimal_policy_;
    ValueFunction<double> optimal_values_;
    std::map<std::vector<Index>, double> cache_;
};

enum class AlgorithmVariant { pomrl_known_sigma, ada_pomrl, oracle_prior, no_meta, aggregating };

std::string to_string(AlgorithmVariant v);
AlgorithmVariant parse_variant(const std::string& name);
const std::vector<AlgorithmVariant>& all_variants();

/// The fixed parts of one experiment: meta-distribution, shared rewards, gamma_eval.
struct TaskFamily {
    MetaDistribution dist;
    RewardTable<double> rewards;
    double gamma_eval = 0.99;
};

/// Tasks, batches and true-task evaluators for one run, shared by all variants.
struct TaskStream {
    std::vector<TransitionModel<double>> tasks;
    std::vector<SampleBatch> batches;
    std::vector<PlanningEvaluator> evaluators;

    std::int64_t size() const noexcept { return static_cast<std::int64_t>(tasks.size()); }
};

/// Task t (1-based) is drawn from substream {1, t}; its batch from {2, t}.
TaskStream generate_task_stream(const TaskFamily& family, std::int64_t tasks, std::int64_t m, const RngStream& rng,
                                double planner_tol = 1e-10);

struct RunSettings {
    std::int64_t tasks = 15;
    std::int64_t m = 5;
    std::vector<double> gamma_grid = default_gamma_grid(0.99);
    SigmaHatOptions sigma_hat{};
    double planner_tol = 1e-10;
};

struct RunRecord {
    std::string variant;
    std::string schedule;
    std::uint64_t seed = 0;
    std::vector<double> gamma_grid;
    Matrix<double> per_task_loss; // tasks x grid
    std::vector<double> chosen_gamma;
    std::vector<double> chosen_loss;
    std::vector<double> alpha_trace;
    std::vector<double> sigma_hat_trace;

    std::int64_t tasks() const noexcept { return per_task_loss.rows(); }
    /// Grid column of a discount, or -1 when it is not on the grid.
    Index grid_index(double gamma) const;
};

/// Run one variant with several schedules on a shared task stream. The loss
/// grid is computed once; each schedule adds its chosen discount per task.
std::vector<RunRecord> run_variant_schedules(AlgorithmVariant variant, const TaskFamily& family, TaskStream& stream,
                                             const RunSettings& settings, const std::vector<GammaSchedule>& schedules,
                                             std::uint64_t seed);

RunRecord run_variant(AlgorithmVariant variant, const TaskFamily& family, const RunSettings& settings,
                      const GammaSchedule& schedule, const RngStream& rng);

/// Mean over tasks of the recorded loss at a grid discount.
double task_averaged_regret(const RunRecord& record, double gamma);

/// Mean over tasks of the schedule's chosen loss.
double chosen_mean_loss(const RunRecord& record);

} // namespace metaplan
