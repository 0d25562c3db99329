#include "metaplan/meta_loop.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace metaplan {

double planning_loss(const MdpInstance<double>& true_mdp, const TransitionModel<double>& est_model, double gamma,
                     double tol) {
    PlanningEvaluator evaluator(true_mdp, tol);
    return evaluator.loss(est_model, gamma);
}

PlanningEvaluator::PlanningEvaluator(MdpInstance<double> true_mdp, double tol) : mdp_(std::move(true_mdp)), tol_(tol) {
    optimal_policy_ = value_iteration(mdp_, mdp_.gamma_eval, tol_).policy;
    optimal_values_ = policy_evaluation(mdp_, optimal_policy_, mdp_.gamma_eval, tol_);
    cache_.emplace(optimal_policy_.actions, 0.0);
}

double PlanningEvaluator::loss_of(const Policy& policy) {
    if (auto it = cache_.find(policy.actions); it != cache_.end()) return it->second;
    const ValueFunction<double> v = policy_evaluation(mdp_, policy, mdp_.gamma_eval, tol_);
    const double gap = (optimal_values_ - v).cwiseAbs().maxCoeff();
    cache_.emplace(policy.actions, gap);
    return gap;
}

double PlanningEvaluator::loss(const TransitionModel<double>& est_model, double gamma) {
    if (!(gamma >= 0.0 && gamma <= mdp_.gamma_eval)) {
        throw InvalidInput("planning_loss: need 0 <= gamma <= gamma_eval");
    }
    if (!est_model.same_shape(mdp_.transitions)) throw InvalidInput("planning_loss: model shape mismatch");
    const MdpInstance<double> planned = mdp_.with_transitions(est_model);
    return loss_of(value_iteration(planned, gamma, tol_).policy);
}

std::string to_string(AlgorithmVariant v) {
    switch (v) {
    case AlgorithmVariant::pomrl_known_sigma: return "pomrl";
    case AlgorithmVariant::ada_pomrl: return "ada_pomrl";
    case AlgorithmVariant::oracle_prior: return "oracle";
    case AlgorithmVariant::no_meta: return "no_meta";
    case AlgorithmVariant::aggregating: return "aggregating";
    }
    return "unknown";
}

AlgorithmVariant parse_variant(const std::string& name) {
    for (auto v : all_variants()) {
        if (to_string(v) == name) return v;
    }
    if (name == "pomrl_known_sigma") return AlgorithmVariant::pomrl_known_sigma;
    if (name == "oracle_prior") return AlgorithmVariant::oracle_prior;
    throw InvalidInput("unknown variant '" + name + "'");
}

const std::vector<AlgorithmVariant>& all_variants() {
    static const std::vector<AlgorithmVariant> v{AlgorithmVariant::oracle_prior, AlgorithmVariant::pomrl_known_sigma,
                                                 AlgorithmVariant::ada_pomrl, AlgorithmVariant::no_meta,
                                                 AlgorithmVariant::aggregating};
    return v;
}

TaskStream generate_task_stream(const TaskFamily& family, std::int64_t tasks, std::int64_t m, const RngStream& rng,
                                double planner_tol) {
    if (tasks < 1) throw InvalidInput("generate_task_stream: need at least one task");
    if (m < 1) throw InvalidInput("generate_task_stream: m must be at least 1");
    TaskStream stream;
    for (std::int64_t t = 1; t <= tasks; ++t) {
        auto task_rng = rng.substream({1, static_cast<std::uint64_t>(t)});
        auto batch_rng = rng.substream({2, static_cast<std::uint64_t>(t)});
        stream.tasks.push_back(sample_task(family.dist, task_rng));
        stream.batches.push_back(sample_batch(stream.tasks.back(), m, batch_rng));
        stream.evaluators.emplace_back(MdpInstance<double>(stream.tasks.back(), family.rewards, family.gamma_eval),
                                       planner_tol);
    }
    return stream;
}

Index RunRecord::grid_index(double gamma) const {
    for (std::size_t j = 0; j < gamma_grid.size(); ++j) {
        if (std::abs(gamma_grid[j] - gamma) <= 1e-12) return static_cast<Index>(j);
    }
    return -1;
}

namespace {

void check_settings(const TaskFamily& family, const RunSettings& settings) {
    if (settings.tasks < 1) throw InvalidInput("run_variant: need T >= 1");
    if (settings.m < 1) throw InvalidInput("run_variant: need m >= 1");
    if (settings.gamma_grid.empty()) throw InvalidInput("run_variant: empty gamma grid");
    for (double g : settings.gamma_grid) {
        if (!(g >= 0.0 && g <= family.gamma_eval)) throw InvalidInput("run_variant: grid values must lie in [0, gamma_eval]");
    }
}

[[noreturn]] void rethrow_with_task(std::int64_t t) {
    const std::string where = "task " + std::to_string(t) + ": ";
    try {
        throw;
    } catch (const ConvergenceError& e) {
        throw ConvergenceError(where + e.what(), e.residual());
    } catch (const InvalidInput& e) {
        throw InvalidInput(where + e.what());
    } catch (const std::exception& e) {
        throw std::runtime_error(where + e.what());
    }
}

} // namespace

std::vector<RunRecord> run_variant_schedules(AlgorithmVariant variant, const TaskFamily& family, TaskStream& stream,
                                             const RunSettings& settings, const std::vector<GammaSchedule>& schedules,
                                             std::uint64_t seed) {
    check_settings(family, settings);
    if (stream.size() < settings.tasks) throw InvalidInput("run_variant: task stream is shorter than T");
    if (schedules.empty()) throw InvalidInput("run_variant: no schedules given");

    const Index n_states = family.dist.mean.states();
    const Index n_actions = family.dist.mean.actions();
    const std::int64_t m = settings.m;
    const double sigma_true = family.dist.sigma_max();
    const auto n_grid = static_cast<Index>(settings.gamma_grid.size());

    std::vector<RunRecord> records(schedules.size());
    for (std::size_t k = 0; k < schedules.size(); ++k) {
        auto& rec = records[k];
        rec.variant = to_string(variant);
        rec.schedule = schedules[k].label();
        rec.seed = seed;
        rec.gamma_grid = settings.gamma_grid;
        rec.per_task_loss.resize(settings.tasks, n_grid);
    }
    Matrix<double> grid_loss(settings.tasks, n_grid);

    PriorState state = PriorState::initial(n_states, n_actions, settings.sigma_hat.initial);
    Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pooled =
        decltype(pooled)::Zero(n_states * n_actions, n_states);

    for (std::int64_t t = 1; t <= settings.tasks; ++t) {
        try {
            const auto ti = static_cast<std::size_t>(t - 1);
            const SampleBatch& batch = stream.batches[ti];
            const TransitionModel<double> empirical = empirical_model(batch);

            double alpha = 0.0;
            double sigma_used = sigma_true;
            TransitionModel<double> estimate = empirical;
            switch (variant) {
            case AlgorithmVariant::no_meta:
                break;
            case AlgorithmVariant::pomrl_known_sigma:
                alpha = t == 1 ? 0.0 : mixing_rate(sigma_true, m, t - 1);
                estimate = rls_estimate(empirical, state.prior, alpha);
                break;
            case AlgorithmVariant::ada_pomrl:
                sigma_used = state.sigma_hat_max();
                alpha = t == 1 ? 0.0 : mixing_rate(sigma_used, m, t - 1);
                estimate = rls_estimate(empirical, state.prior, alpha);
                break;
            case AlgorithmVariant::oracle_prior:
                alpha = mixing_rate(sigma_true, m, t);
                estimate = rls_estimate(empirical, family.dist.mean, alpha);
                break;
            case AlgorithmVariant::aggregating:
                if (t > 1) {
                    alpha = 1.0;
                    Matrix<double> p = pooled.cast<double>() / static_cast<double>(m * (t - 1));
                    estimate = TransitionModel<double>(n_states, n_actions, std::move(p));
                }
                break;
            }

            auto& evaluator = stream.evaluators[ti];
            for (Index j = 0; j < n_grid; ++j) {
                grid_loss(t - 1, j) = evaluator.loss(estimate, settings.gamma_grid[static_cast<std::size_t>(j)]);
            }

            const ScheduleContext ctx{t, m, alpha, sigma_used, static_cast<std::int64_t>(n_states),
                                      static_cast<std::int64_t>(n_actions), family.gamma_eval};
            for (std::size_t k = 0; k < schedules.size(); ++k) {
                auto& rec = records[k];
                rec.alpha_trace.push_back(alpha);
                rec.sigma_hat_trace.push_back(sigma_used);
                if (schedules[k].is_hindsight()) continue;
                const double gamma = schedules[k].select(ctx);
                const Index j = rec.grid_index(gamma);
                rec.chosen_gamma.push_back(gamma);
                rec.chosen_loss.push_back(j >= 0 ? grid_loss(t - 1, j) : evaluator.loss(estimate, gamma));
            }

            // meta-updates happen after planning
            state = update_prior(std::move(state), empirical);
            state = welford_update(std::move(state), empirical, settings.sigma_hat);
            pooled += batch.counts;
        } catch (...) {
            rethrow_with_task(t);
        }
    }

    for (std::size_t k = 0; k < schedules.size(); ++k) {
        auto& rec = records[k];
        rec.per_task_loss = grid_loss;
        if (schedules[k].is_hindsight()) {
            const auto mode = schedules[k].kind() == GammaSchedule::Kind::best_fixed ? HindsightMode::best_fixed
                                                                                      : HindsightMode::dynamic_best;
            const HindsightChoice choice = hindsight_select(grid_loss, settings.gamma_grid, mode);
            rec.chosen_gamma = choice.gamma;
            rec.chosen_loss = choice.loss;
        }
    }
    return records;
}

RunRecord run_variant(AlgorithmVariant variant, const TaskFamily& family, const RunSettings& settings,
                      const GammaSchedule& schedule, const RngStream& rng) {
    check_settings(family, settings);
    TaskStream stream = generate_task_stream(family, settings.tasks, settings.m, rng, settings.planner_tol);
    return std::move(run_variant_schedules(variant, family, stream, settings, {schedule}, rng.seed()).front());
}

double task_averaged_regret(const RunRecord& record, double gamma) {
    const Index j = record.grid_index(gamma);
    if (j < 0) throw InvalidInput("task_averaged_regret: gamma is not on the record's grid");
    return record.per_task_loss.col(j).mean();
}

double chosen_mean_loss(const RunRecord& record) {
    if (record.chosen_loss.empty()) return 0.0;
    return std::accumulate(record.chosen_loss.begin(), record.chosen_loss.end(), 0.0) /
           static_cast<double>(record.chosen_loss.size());
}

} // namespace metaplan
