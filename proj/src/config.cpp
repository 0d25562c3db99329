#include "metaplan/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

namespace metaplan {

namespace {

std::string join_lines(const std::vector<std::string>& problems) {
    std::string out = "invalid configuration:";
    for (const auto& p : problems) out += "\n  - " + p;
    return out;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "s_count", "a_count",          "k_zeroed",       "m",      "tasks",  "seeds",       "base_seed",
        "a0",      "sigma_target",     "sigma_regime",   "gamma_eval", "gamma_grid", "variants", "schedules",
        "sigma_convention", "sigma_hat_init", "gamma0", "l_max", "rmax", "planner_tol", "output_dir"};
    return keys;
}

} // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : InvalidInput(join_lines(problems)), problems_(std::move(problems)) {}

double sigma_for_regime(const std::string& name) {
    if (name == "strong") return 0.01;
    if (name == "medium") return 0.025;
    if (name == "loose") return 0.047;
    throw InvalidInput("unknown sigma regime '" + name + "' (expected strong, medium or loose)");
}

std::vector<std::string> ExperimentConfig::violations() const {
    std::vector<std::string> v;
    if (s_count < 1) v.push_back("s_count must be >= 1");
    if (a_count < 1) v.push_back("a_count must be >= 1");
    if (k_zeroed < 0 || k_zeroed >= s_count) v.push_back("k_zeroed must satisfy 0 <= k_zeroed < s_count");
    if (m < 1) v.push_back("m must be >= 1");
    if (tasks < 1) v.push_back("tasks must be >= 1");
    if (seeds < 1) v.push_back("seeds must be >= 1");
    if (a0 && !(*a0 > 0.0)) v.push_back("a0 must be positive");
    if (!a0 && !(sigma_target > 0.0)) v.push_back("sigma_target must be positive");
    const bool gamma_ok = gamma_eval > 0.0 && gamma_eval < 1.0;
    if (!gamma_ok) v.push_back("gamma_eval must lie in (0,1)");
    if (gamma_grid.empty()) v.push_back("gamma_grid must not be empty");
    for (double g : gamma_grid) {
        if (!(g >= 0.0 && g <= gamma_eval)) {
            v.push_back("gamma_grid value " + std::to_string(g) + " outside [0, gamma_eval]");
        }
    }
    if (variants.empty()) v.push_back("variants must not be empty");
    for (const auto& name : variants) {
        try {
            parse_variant(name);
        } catch (const InvalidInput& e) {
            v.push_back(e.what());
        }
    }
    if (schedules.empty()) v.push_back("schedules must not be empty");
    if (gamma_ok) {
        for (const auto& s : schedules) {
            try {
                GammaSchedule::parse(s, gamma_eval, gamma0);
            } catch (const InvalidInput& e) {
                v.push_back(e.what());
            }
        }
    }
    if (sigma_hat_init && *sigma_hat_init < 0.0) v.push_back("sigma_hat_init must be nonnegative");
    if (!(gamma0 >= 0.0 && gamma0 < 1.0)) v.push_back("gamma0 must lie in [0,1)");
    if (l_max && !(*l_max > 0.0)) v.push_back("l_max must be positive");
    if (!(rmax > 0.0)) v.push_back("rmax must be positive");
    if (!(planner_tol > 0.0)) v.push_back("planner_tol must be positive");
    if (output_dir.empty()) v.push_back("output_dir must not be empty");
    return v;
}

void ExperimentConfig::validate() const {
    auto problems = violations();
    if (!problems.empty()) throw ValidationError(std::move(problems));
}

std::vector<AlgorithmVariant> ExperimentConfig::parsed_variants() const {
    std::vector<AlgorithmVariant> out;
    for (const auto& name : variants) out.push_back(parse_variant(name));
    return out;
}

std::vector<GammaSchedule> ExperimentConfig::parsed_schedules() const {
    std::vector<GammaSchedule> out;
    for (const auto& s : schedules) {
        auto sched = GammaSchedule::parse(s, gamma_eval, gamma0);
        if (sched.kind() == GammaSchedule::Kind::dong && sched.parameter() == 0.0 && l_max) {
            sched = GammaSchedule::dong(*l_max);
        }
        out.push_back(sched);
    }
    return out;
}

RunSettings ExperimentConfig::run_settings() const {
    RunSettings rs;
    rs.tasks = tasks;
    rs.m = m;
    rs.gamma_grid = gamma_grid;
    rs.sigma_hat = SigmaHatOptions{sigma_convention, effective_sigma_hat_init()};
    rs.planner_tol = planner_tol;
    return rs;
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    j = nlohmann::json{{"s_count", c.s_count},
                       {"a_count", c.a_count},
                       {"k_zeroed", c.k_zeroed},
                       {"m", c.m},
                       {"tasks", c.tasks},
                       {"seeds", c.seeds},
                       {"base_seed", c.base_seed},
                       {"sigma_target", c.sigma_target},
                       {"gamma_eval", c.gamma_eval},
                       {"gamma_grid", c.gamma_grid},
                       {"variants", c.variants},
                       {"schedules", c.schedules},
                       {"sigma_convention", to_string(c.sigma_convention)},
                       {"gamma0", c.gamma0},
                       {"rmax", c.rmax},
                       {"planner_tol", c.planner_tol},
                       {"output_dir", c.output_dir}};
    j["a0"] = c.a0 ? nlohmann::json(*c.a0) : nlohmann::json(nullptr);
    j["sigma_hat_init"] = c.sigma_hat_init ? nlohmann::json(*c.sigma_hat_init) : nlohmann::json(nullptr);
    j["l_max"] = c.l_max ? nlohmann::json(*c.l_max) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) { c = merge_config(ExperimentConfig{}, j); }

ExperimentConfig merge_config(ExperimentConfig c, const nlohmann::json& j) {
    if (!j.is_object()) throw InvalidInput("config must be a JSON object");
    std::vector<std::string> problems;
    for (const auto& [key, _] : j.items()) {
        if (!known_keys().count(key)) problems.push_back("unknown config key '" + key + "'");
    }
    if (!problems.empty()) throw ValidationError(std::move(problems));

    auto opt = [&](const char* key, std::optional<double>& field) {
        if (!j.contains(key)) return;
        if (j[key].is_null()) field.reset();
        else field = j[key].get<double>();
    };
    try {
        if (j.contains("s_count")) c.s_count = j["s_count"].get<std::int64_t>();
        if (j.contains("a_count")) c.a_count = j["a_count"].get<std::int64_t>();
        if (j.contains("k_zeroed")) c.k_zeroed = j["k_zeroed"].get<std::int64_t>();
        if (j.contains("m")) c.m = j["m"].get<std::int64_t>();
        if (j.contains("tasks")) c.tasks = j["tasks"].get<std::int64_t>();
        if (j.contains("seeds")) c.seeds = j["seeds"].get<std::int64_t>();
        if (j.contains("base_seed")) c.base_seed = j["base_seed"].get<std::uint64_t>();
        opt("a0", c.a0);
        if (j.contains("sigma_target")) c.sigma_target = j["sigma_target"].get<double>();
        if (j.contains("sigma_regime")) c.sigma_target = sigma_for_regime(j["sigma_regime"].get<std::string>());
        if (j.contains("gamma_eval")) {
            const double previous = c.gamma_eval;
            c.gamma_eval = j["gamma_eval"].get<double>();
            // a grid still at its default follows gamma_eval
            if (!j.contains("gamma_grid") && c.gamma_grid == default_gamma_grid(previous) && c.gamma_eval > 0.0 &&
                c.gamma_eval < 1.0) {
                c.gamma_grid = default_gamma_grid(c.gamma_eval);
            }
        }
        if (j.contains("gamma_grid")) c.gamma_grid = j["gamma_grid"].get<std::vector<double>>();
        if (j.contains("variants")) c.variants = j["variants"].get<std::vector<std::string>>();
        if (j.contains("schedules")) c.schedules = j["schedules"].get<std::vector<std::string>>();
        if (j.contains("sigma_convention")) {
            c.sigma_convention = parse_sigma_convention(j["sigma_convention"].get<std::string>());
        }
        opt("sigma_hat_init", c.sigma_hat_init);
        if (j.contains("gamma0")) c.gamma0 = j["gamma0"].get<double>();
        opt("l_max", c.l_max);
        if (j.contains("rmax")) c.rmax = j["rmax"].get<double>();
        if (j.contains("planner_tol")) c.planner_tol = j["planner_tol"].get<double>();
        if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError({std::string("config type error: ") + e.what()});
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError({"config file " + path + " is not valid JSON: " + e.what()});
    }
    return merge_config(ExperimentConfig{}, j);
}

ExperimentConfig resolve_config(const std::optional<std::string>& file, const nlohmann::json& overrides) {
    ExperimentConfig c;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) c.output_dir = env;
    if (file) {
        std::ifstream in(*file);
        if (!in) throw std::runtime_error("cannot open config file " + *file);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError({"config file " + *file + " is not valid JSON: " + e.what()});
        }
        c = merge_config(c, j);
    }
    if (!overrides.is_null()) c = merge_config(c, overrides);
    return c;
}

FamilyInfo make_task_family(const ExperimentConfig& config, std::uint64_t seed) {
    RngStream root(seed);
    auto mean_rng = root.substream({0, 1});
    auto reward_rng = root.substream({0, 2});
    TransitionModel<double> mean = random_chain_mdp(config.s_count, config.a_count, config.k_zeroed, mean_rng);
    RewardTable<double> rewards = random_rewards(config.s_count, config.a_count, reward_rng, config.rmax);
    const double a0 = config.a0 ? *config.a0 : concentration_for_sigma(mean, config.sigma_target, config.sigma_convention);
    MetaDistribution dist = make_meta_distribution(std::move(mean), a0, config.sigma_convention);
    return FamilyInfo{TaskFamily{std::move(dist), std::move(rewards), config.gamma_eval}, a0};
}

} // namespace metaplan
