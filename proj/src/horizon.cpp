#include "metaplan/horizon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace metaplan {

namespace {

void check_guidance(double gamma, double gamma_eval, const char* who) {
    if (!(gamma >= 0.0 && gamma <= gamma_eval)) {
        throw InvalidInput(std::string(who) + ": need 0 <= gamma <= gamma_eval");
    }
}

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

} // namespace

void BoundParams::validate() const {
    std::string bad;
    if (m < 1) bad += " m>=1";
    if (t_tasks < 1) bad += " T>=1";
    if (s_count < 1 || a_count < 1) bad += " S,A>=1";
    if (sigma < 0.0) bad += " sigma>=0";
    if (!(cap_sigma > 0.0 && cap_sigma <= 1.0)) bad += " Sigma in (0,1]";
    if (!(delta > 0.0 && delta < 1.0)) bad += " delta in (0,1)";
    if (!(gamma_eval > 0.0 && gamma_eval < 1.0)) bad += " gamma_eval in (0,1)";
    if (!(rmax > 0.0)) bad += " rmax>0";
    if (policy_count_log && *policy_count_log < 0.0) bad += " log|Pi|>=0";
    if (!bad.empty()) throw InvalidInput("BoundParams: violated" + bad);
}

double BoundParams::policy_log() const {
    return policy_count_log.value_or(static_cast<double>(s_count) * std::log(static_cast<double>(a_count)));
}

double gamma_bias(double gamma, double gamma_eval, double rmax) {
    if (!(gamma_eval < 1.0)) throw InvalidInput("gamma_bias: gamma_eval must be below 1");
    check_guidance(gamma, gamma_eval, "gamma_bias");
    return (gamma_eval - gamma) / ((1.0 - gamma_eval) * (1.0 - gamma)) * rmax;
}

BoundTerms theorem1_terms(double gamma, const BoundParams& p) {
    p.validate();
    check_guidance(gamma, p.gamma_eval, "theorem1_bound");
    const double sa = static_cast<double>(p.s_count * p.a_count);
    const double log_term = std::log(2.0 * sa / p.delta) + p.policy_log();
    const double width = std::sqrt(p.cap_sigma / (2.0 * static_cast<double>(p.m)) * log_term);
    BoundTerms out;
    out.bias = gamma_bias(gamma, p.gamma_eval, 1.0);
    out.uncertainty = p.log_factor * 2.0 * gamma * p.rmax / ((1.0 - gamma) * (1.0 - gamma)) * width;
    return out;
}

double theorem1_bound(double gamma, const BoundParams& p) { return theorem1_terms(gamma, p).total(); }

double theorem2_bracket(const BoundParams& p) {
    const double s = p.sigma;
    const double m = static_cast<double>(p.m);
    const double inv_sqrt_t = 1.0 / std::sqrt(static_cast<double>(p.t_tasks));
    const double shrink = s * s * m + 1.0;
    const double first = (s + inv_sqrt_t * (s + std::sqrt(s * s + p.cap_sigma / m))) / shrink;
    const double second = s * s * m * std::sqrt(p.cap_sigma / m) / shrink;
    return first + second;
}

BoundTerms theorem2_terms(double gamma, const BoundParams& p) {
    p.validate();
    check_guidance(gamma, p.gamma_eval, "theorem2_bound");
    BoundTerms out;
    out.bias = gamma_bias(gamma, p.gamma_eval, 1.0);
    out.uncertainty = p.log_factor * 2.0 * gamma * static_cast<double>(p.s_count) / ((1.0 - gamma) * (1.0 - gamma)) *
                      theorem2_bracket(p);
    return out;
}

double theorem2_bound(double gamma, const BoundParams& p) { return theorem2_terms(gamma, p).total(); }

double theorem2_bracket_identical_tasks(std::int64_t m, std::int64_t t_tasks, double cap_sigma) {
    return std::sqrt(cap_sigma / (static_cast<double>(m) * static_cast<double>(t_tasks)));
}

double theorem2_bracket_unstructured(std::int64_t m, std::int64_t t_tasks) {
    const double md = static_cast<double>(m);
    const double inv_sqrt_t = 1.0 / std::sqrt(static_cast<double>(t_tasks));
    return (1.0 / md) * (1.0 + inv_sqrt_t * (1.0 + std::sqrt(1.0 + 1.0 / md))) + 1.0 / std::sqrt(md);
}

double constant_c(std::int64_t m, std::int64_t t, double sigma) {
    if (m < 1 || t < 1) throw InvalidInput("constant_c: m and t must be at least 1");
    if (sigma < 0.0) throw InvalidInput("constant_c: sigma must be nonnegative");
    const double md = static_cast<double>(m);
    const double inv_sqrt_m = 1.0 / std::sqrt(md);
    const double shrink = sigma * sigma * md + 1.0;
    return (1.0 / std::sqrt(static_cast<double>(t))) * (sigma + inv_sqrt_m) / shrink +
           sigma * sigma * md * inv_sqrt_m / shrink;
}

double bound_shape(double gamma, double c, double gamma_eval) {
    return 1.0 / (1.0 - gamma_eval) + 1.0 / (gamma - 1.0) + c * gamma / ((1.0 - gamma) * (1.0 - gamma));
}

double prop1_gamma(double c) {
    if (c < 0.0) throw InvalidInput("prop1_gamma: c must be nonnegative");
    if (c >= 1.0) return 0.0;
    if (c < 0.5) return 1.0;
    return (1.0 - c) / (1.0 + c);
}

double bound_guided_gamma(double c, double gamma0, double gamma_eval) {
    if (!(gamma0 >= 0.0 && gamma0 < 1.0)) throw InvalidInput("bound_guided_gamma: gamma0 must lie in [0,1)");
    return std::min(gamma_eval, gamma0 + prop1_gamma(c));
}

double dong_phase_length(std::int64_t m, double alpha_t, std::int64_t t, std::int64_t s_count, std::int64_t a_count,
                         double l_max) {
    if (m < 1 || t < 1) throw InvalidInput("dong_gamma: m and t must be at least 1");
    if (!(l_max > 0.0)) throw InvalidInput("dong_gamma: l_max must be positive");
    const double md = static_cast<double>(m);
    if (t == 1) return md;
    const double effective = (1.0 - alpha_t) * md + alpha_t * md * static_cast<double>(t - 1);
    const double phase = static_cast<double>(s_count * a_count) / l_max * effective;
    return phase > 0.0 ? phase : md;
}

double dong_gamma(std::int64_t m, double alpha_t, std::int64_t t, std::int64_t s_count, std::int64_t a_count,
                  double l_max, double gamma_eval) {
    const double phase = dong_phase_length(m, alpha_t, t, s_count, a_count, l_max);
    return std::clamp(1.0 - std::pow(phase, -0.2), 0.0, gamma_eval);
}

double default_l_max(double gamma_eval) { return std::ceil(1.0 / (1.0 - gamma_eval) - 1e-9); }

std::vector<double> default_gamma_grid(double gamma_eval) {
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) {
        const double g = 0.05 * i;
        if (g < gamma_eval - 1e-12) grid.push_back(g);
    }
    grid.push_back(gamma_eval);
    return grid;
}

double HindsightChoice::mean_loss() const {
    if (loss.empty()) return 0.0;
    return std::accumulate(loss.begin(), loss.end(), 0.0) / static_cast<double>(loss.size());
}

namespace {

// strictly better, or equal loss at a smaller discount
bool prefer(double loss, double gamma, double best_loss, double best_gamma) {
    return loss < best_loss || (loss == best_loss && gamma < best_gamma);
}

} // namespace

HindsightChoice hindsight_select(const Matrix<double>& loss_grid, const std::vector<double>& grid, HindsightMode mode) {
    if (loss_grid.rows() < 1 || loss_grid.cols() < 1) throw InvalidInput("hindsight_select: empty loss grid");
    if (static_cast<std::size_t>(loss_grid.cols()) != grid.size()) {
        throw InvalidInput("hindsight_select: grid size does not match loss columns");
    }
    const auto tasks = static_cast<std::size_t>(loss_grid.rows());
    HindsightChoice out;
    out.column.resize(tasks);
    if (mode == HindsightMode::best_fixed) {
        const Eigen::RowVectorXd means = loss_grid.colwise().mean();
        std::size_t best = 0;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            if (prefer(means(static_cast<Index>(j)), grid[j], means(static_cast<Index>(best)), grid[best])) best = j;
        }
        std::fill(out.column.begin(), out.column.end(), best);
    } else {
        for (std::size_t i = 0; i < tasks; ++i) {
            std::size_t best = 0;
            const auto row = loss_grid.row(static_cast<Index>(i));
            for (std::size_t j = 1; j < grid.size(); ++j) {
                if (prefer(row(static_cast<Index>(j)), grid[j], row(static_cast<Index>(best)), grid[best])) best = j;
            }
            out.column[i] = best;
        }
    }
    for (std::size_t i = 0; i < tasks; ++i) {
        out.gamma.push_back(grid[out.column[i]]);
        out.loss.push_back(loss_grid(static_cast<Index>(i), static_cast<Index>(out.column[i])));
    }
    return out;
}

GammaSchedule GammaSchedule::fixed(double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("fixed schedule: gamma must lie in [0,1)");
    return {Kind::fixed, gamma};
}

GammaSchedule GammaSchedule::dong(double l_max) {
    if (l_max < 0.0) throw InvalidInput("dong schedule: l_max must be positive (0 selects the default)");
    return {Kind::dong, l_max};
}

GammaSchedule GammaSchedule::bound_guided(double gamma0) {
    if (!(gamma0 >= 0.0 && gamma0 < 1.0)) throw InvalidInput("bound_guided schedule: gamma0 must lie in [0,1)");
    return {Kind::bound_guided, gamma0};
}

GammaSchedule GammaSchedule::best_fixed() { return {Kind::best_fixed, 0.0}; }
GammaSchedule GammaSchedule::dynamic_best() { return {Kind::dynamic_best, 0.0}; }

GammaSchedule GammaSchedule::parse(const std::string& spec, double gamma_eval, double default_gamma0) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const bool has_arg = colon != std::string::npos;
    double arg = 0.0;
    if (has_arg) {
        try {
            std::size_t used = 0;
            arg = std::stod(spec.substr(colon + 1), &used);
            if (used != spec.size() - colon - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw InvalidInput("schedule '" + spec + "': bad numeric parameter");
        }
    }
    if (name == "fixed") {
        const double g = has_arg ? arg : gamma_eval;
        if (g > gamma_eval) throw InvalidInput("schedule '" + spec + "': gamma exceeds gamma_eval");
        return fixed(g);
    }
    if (name == "dong") return dong(has_arg ? arg : 0.0);
    if (name == "bound_guided") return bound_guided(has_arg ? arg : default_gamma0);
    if (name == "best_fixed" && !has_arg) return best_fixed();
    if (name == "dynamic_best" && !has_arg) return dynamic_best();
    throw InvalidInput("unknown schedule '" + spec + "'");
}

double GammaSchedule::select(const ScheduleContext& ctx) const {
    switch (kind_) {
    case Kind::fixed:
        if (param_ > ctx.gamma_eval) throw InvalidInput("fixed schedule: gamma exceeds gamma_eval");
        return param_;
    case Kind::dong: {
        const double l_max = param_ > 0.0 ? param_ : default_l_max(ctx.gamma_eval);
        return dong_gamma(ctx.m, ctx.alpha, ctx.t, ctx.s_count, ctx.a_count, l_max, ctx.gamma_eval);
    }
    case Kind::bound_guided:
        return bound_guided_gamma(constant_c(ctx.m, ctx.t, ctx.sigma), param_, ctx.gamma_eval);
    case Kind::best_fixed:
    case Kind::dynamic_best:
        break;
    }
    throw InvalidInput("hindsight schedules choose after the run, not per task");
}

std::string GammaSchedule::label() const {
    switch (kind_) {
    case Kind::fixed: return "fixed_" + format_number(param_);
    case Kind::dong: return param_ > 0.0 ? "dong_" + format_number(param_) : "dong";
    case Kind::bound_guided: return "bound_guided_" + format_number(param_);
    case Kind::best_fixed: return "best_fixed";
    case Kind::dynamic_best: return "dynamic_best";
    }
    return "unknown";
}

} // namespace metaplan
