#pragma once

// Guidance-discount selection: planning-loss bounds, the bound-derived
// constant C and its closed-form minimiser, phase schedules and hindsight
// selectors.

#include "metaplan/mdp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace metaplan {

struct BoundParams {
    std::int64_t m = 5;
    std::int64_t t_tasks = 1;
    std::int64_t s_count = 10;
    std::int64_t a_count = 2;
    double sigma = 0.0;
    double cap_sigma = 1.0; // diameter of the feasible model set
    double delta = 0.05;
    double gamma_eval = 0.99;
    double rmax = 1.0;
    std::optional<double> policy_count_log; // defaults to S log A
    double log_factor = 1.0;                 // multiplier standing in for stripped poly-log terms

    void validate() const;
    double policy_log() const;
};

/// Bias and uncertainty parts of a planning-loss bound at one discount.
struct BoundTerms {
    double bias = 0.0;
    double uncertainty = 0.0;
    double total() const { return bias + uncertainty; }
};

/// (gamma_eval - gamma) / ((1 - gamma_eval)(1 - gamma)) * rmax.
double gamma_bias(double gamma, double gamma_eval, double rmax = 1.0);

/// Single-task bound for the count-based estimator with m samples per (s,a).
BoundTerms theorem1_terms(double gamma, const BoundParams& p);
double theorem1_bound(double gamma, const BoundParams& p);

/// Task-averaged bound for the meta-learned estimator, poly-log factors set
/// to `log_factor` (1 by default); a shape rather than a certified bound.
BoundTerms theorem2_terms(double gamma, const BoundParams& p);
double theorem2_bound(double gamma, const BoundParams& p);

/// Uncertainty bracket of the task-averaged bound (without the 2 gamma S / (1-gamma)^2 factor).
double theorem2_bracket(const BoundParams& p);

/// Closed forms of the bracket when all tasks coincide (sigma = 0) and when
/// there is no shared structure (sigma = Sigma = 1).
double theorem2_bracket_identical_tasks(std::int64_t m, std::int64_t t_tasks, double cap_sigma = 1.0);
double theorem2_bracket_unstructured(std::int64_t m, std::int64_t t_tasks);

/// Problem-dependent constant of the bound as a function of gamma:
/// (1/sqrt t)(sigma + 1/sqrt m)/(sigma^2 m + 1) + sigma^2 m (1/sqrt m)/(sigma^2 m + 1).
double constant_c(std::int64_t m, std::int64_t t, double sigma);

/// U(gamma) = 1/(1-gamma_eval) + 1/(gamma-1) + c gamma/(1-gamma)^2.
double bound_shape(double gamma, double c, double gamma_eval);

/// Minimiser of U over [0,1]: 0 if c >= 1, 1 if c < 1/2, (1-c)/(1+c) otherwise.
double prop1_gamma(double c);

/// min(gamma_eval, gamma0 + prop1_gamma(c)).
double bound_guided_gamma(double c, double gamma0, double gamma_eval);

/// Phase-length schedule: T_1 = m, T_t = (SA/L)((1-alpha) m + alpha m (t-1)) for
/// t >= 2, gamma = 1 - T_t^{-1/5} clamped to [0, gamma_eval].
double dong_phase_length(std::int64_t m, double alpha_t, std::int64_t t, std::int64_t s_count, std::int64_t a_count,
                         double l_max);
double dong_gamma(std::int64_t m, double alpha_t, std::int64_t t, std::int64_t s_count, std::int64_t a_count,
                  double l_max, double gamma_eval);

/// Default trajectory length for the phase schedule: ceil(1 / (1 - gamma_eval)).
double default_l_max(double gamma_eval);

/// {0.00, 0.05, ..., 0.95} plus gamma_eval.
std::vector<double> default_gamma_grid(double gamma_eval = 0.99);

enum class HindsightMode { best_fixed, dynamic_best };

struct HindsightChoice {
    std::vector<std::size_t> column; // chosen grid column per task
    std::vector<double> gamma;       // chosen discount per task
    std::vector<double> loss;        // achieved loss per task
    double mean_loss() const;
};

/// Rows are tasks, columns follow `grid`. Ties resolve to the smaller discount.
HindsightChoice hindsight_select(const Matrix<double>& loss_grid, const std::vector<double>& grid, HindsightMode mode);

/// Inputs a schedule may consult when choosing the discount for task t.
struct ScheduleContext {
    std::int64_t t = 1;
    std::int64_t m = 5;
    double alpha = 0.0;
    double sigma = 0.0;
    std::int64_t s_count = 10;
    std::int64_t a_count = 2;
    double gamma_eval = 0.99;
};

class GammaSchedule {
public:
    enum class Kind { fixed, dong, bound_guided, best_fixed, dynamic_best };

    static GammaSchedule fixed(double gamma);
    static GammaSchedule dong(double l_max);
    static GammaSchedule bound_guided(double gamma0);
    static GammaSchedule best_fixed();
    static GammaSchedule dynamic_best();

    /// Parses "fixed:0.99", "fixed" (= gamma_eval), "dong", "dong:100",
    /// "bound_guided", "bound_guided:0.3", "best_fixed", "dynamic_best".
    static GammaSchedule parse(const std::string& spec, double gamma_eval, double default_gamma0 = 0.3);

    Kind kind() const noexcept { return kind_; }
    double parameter() const noexcept { return param_; }
    bool is_hindsight() const noexcept { return kind_ == Kind::best_fixed || kind_ == Kind::dynamic_best; }

    /// Discount chosen online for one task; hindsight kinds throw.
    double select(const ScheduleContext& ctx) const;

    /// Stable label used in file outputs, e.g. "fixed_0.99" or "bound_guided_0.3".
    std::string label() const;

private:
    GammaSchedule(Kind k, double p) : kind_(k), param_(p) {}
    Kind kind_;
    double param_;
};

} // namespace metaplan
