#pragma once

#include "metaplan/horizon.hpp"
#include "metaplan/meta_loop.hpp"
#include "metaplan/task_gen.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace metaplan {

/// Raised with every violated constraint of a configuration, one per line.
class ValidationError : public InvalidInput {
public:
    explicit ValidationError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Named task-similarity regimes: strong 0.01, medium 0.025, loose 0.047.
double sigma_for_regime(const std::string& name);

struct ExperimentConfig {
    std::int64_t s_count = 10;
    std::int64_t a_count = 2;
    std::int64_t k_zeroed = 5;
    std::int64_t m = 5;
    std::int64_t tasks = 15;
    std::int64_t seeds = 100;
    std::uint64_t base_seed = 0;
    std::optional<double> a0;            // total Dirichlet mass; overrides sigma_target
    double sigma_target = 0.01;           // a0 solved per run so that max sigma hits this
    double gamma_eval = 0.99;
    std::vector<double> gamma_grid = default_gamma_grid(0.99);
    std::vector<std::string> variants{"oracle", "pomrl", "ada_pomrl", "no_meta"};
    std::vector<std::string> schedules{"fixed"};
    SigmaConvention sigma_convention = SigmaConvention::variance;
    std::optional<double> sigma_hat_init; // defaults to 0.5 / S
    double gamma0 = 0.3;
    std::optional<double> l_max;          // defaults to ceil(1/(1-gamma_eval))
    double rmax = 1.0;
    double planner_tol = 1e-10;
    std::string output_dir = "results";

    /// Every violated constraint; empty when the config is usable.
    std::vector<std::string> violations() const;
    void validate() const;

    double effective_sigma_hat_init() const { return sigma_hat_init.value_or(0.5 / static_cast<double>(s_count)); }
    std::vector<AlgorithmVariant> parsed_variants() const;
    std::vector<GammaSchedule> parsed_schedules() const;
    RunSettings run_settings() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Overlay the keys present in `j` onto `base`; unknown keys are rejected.
ExperimentConfig merge_config(ExperimentConfig base, const nlohmann::json& j);

ExperimentConfig load_config(const std::string& path);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "METAPLAN_OUTPUT_DIR";

/// Built-in defaults, then $METAPLAN_OUTPUT_DIR, then the config file, then
/// `overrides` (typically command-line flags). Later layers win.
ExperimentConfig resolve_config(const std::optional<std::string>& file, const nlohmann::json& overrides);

/// Fresh per-run task family: mean model, rewards and concentration for one seed.
struct FamilyInfo {
    TaskFamily family;
    double a0 = 0.0;
};
FamilyInfo make_task_family(const ExperimentConfig& config, std::uint64_t seed);

} // namespace metaplan
