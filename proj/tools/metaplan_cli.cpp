// metaplan command-line interface: generate, run, sweep, plot, bounds.

#include "metaplan/config.hpp"
#include "metaplan/figures.hpp"
#include "metaplan/serialize.hpp"
#include "metaplan/sweep.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

using namespace metaplan;
using nlohmann::json;

namespace {

// Every ExperimentConfig field as an optional flag; only flags actually given
// end up in the override layer.
struct ConfigFlags {
    std::optional<std::string> file;
    std::optional<std::int64_t> s_count, a_count, k_zeroed, m, tasks, seeds;
    std::optional<std::uint64_t> base_seed;
    std::optional<double> a0, sigma_target, gamma_eval, sigma_hat_init, gamma0, l_max, rmax, planner_tol;
    std::optional<std::string> sigma_regime, sigma_convention, output_dir;
    std::vector<double> gamma_grid;
    std::vector<std::string> variants, schedules;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", file, "JSON config file (flags override it)");
        app->add_option("--s-count", s_count, "number of states");
        app->add_option("--a-count", a_count, "number of actions");
        app->add_option("--k-zeroed", k_zeroed, "zeroed next states per (s,a) in the mean model");
        app->add_option("-m,--m", m, "samples per (s,a) per task");
        app->add_option("-T,--tasks", tasks, "tasks per run");
        app->add_option("--seeds", seeds, "independent runs");
        app->add_option("--base-seed", base_seed, "seed of the first run");
        app->add_option("--a0", a0, "Dirichlet concentration (overrides the sigma target)");
        app->add_option("--sigma-target", sigma_target, "target max sigma of the task distribution");
        app->add_option("--sigma-regime", sigma_regime, "strong, medium or loose");
        app->add_option("--gamma-eval", gamma_eval, "evaluation discount");
        app->add_option("--gamma-grid", gamma_grid, "guidance discounts evaluated for every task")->delimiter(',');
        app->add_option("--variants", variants, "oracle, pomrl, ada_pomrl, no_meta, aggregating")->delimiter(',');
        app->add_option("--schedules", schedules,
                        "fixed[:g], dong[:L], bound_guided[:g0], best_fixed, dynamic_best")
            ->delimiter(',');
        app->add_option("--sigma-convention", sigma_convention, "variance or stddev");
        app->add_option("--sigma-hat-init", sigma_hat_init, "initial sigma-hat for ada_pomrl");
        app->add_option("--gamma0", gamma0, "offset of the bound-guided schedule");
        app->add_option("--l-max", l_max, "trajectory length of the phase schedule");
        app->add_option("--rmax", rmax, "reward upper bound");
        app->add_option("--planner-tol", planner_tol, "value-iteration tolerance");
        app->add_option("-o,--output-dir", output_dir, "output directory (default $METAPLAN_OUTPUT_DIR or results)");
    }

    json overrides() const {
        json j = json::object();
        auto put = [&](const char* key, const auto& v) {
            if (v) j[key] = *v;
        };
        put("s_count", s_count);
        put("a_count", a_count);
        put("k_zeroed", k_zeroed);
        put("m", m);
        put("tasks", tasks);
        put("seeds", seeds);
        put("base_seed", base_seed);
        put("a0", a0);
        put("sigma_target", sigma_target);
        put("sigma_regime", sigma_regime);
        put("gamma_eval", gamma_eval);
        put("sigma_convention", sigma_convention);
        put("sigma_hat_init", sigma_hat_init);
        put("gamma0", gamma0);
        put("l_max", l_max);
        put("rmax", rmax);
        put("planner_tol", planner_tol);
        put("output_dir", output_dir);
        if (!gamma_grid.empty()) j["gamma_grid"] = gamma_grid;
        if (!variants.empty()) j["variants"] = variants;
        if (!schedules.empty()) j["schedules"] = schedules;
        return j;
    }

    ExperimentConfig resolve() const { return resolve_config(file, overrides()); }
};

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_files(const SweepFiles& f) {
    std::cout << "wrote " << f.raw.string() << " (sha256 " << f.raw_sha256 << ")\n"
              << "wrote " << f.aggregate.string() << "\n"
              << "wrote " << f.schedule.string() << "\n"
              << "wrote " << f.runs.string() << "\n"
              << "wrote " << f.config.string() << "\n";
}

int cmd_generate(const ConfigFlags& flags, std::uint64_t seed, bool sample) {
    const ExperimentConfig c = flags.resolve();
    c.validate();
    const FamilyInfo info = make_task_family(c, seed);
    const auto& dist = info.family.dist;
    json out{{"seed", seed},
             {"a0", info.a0},
             {"sigma_convention", to_string(dist.convention)},
             {"sigma_max", dist.sigma_max()},
             {"sigma", matrix_to_json(dist.sigma)},
             {"mean_model", matrix_to_json(dist.mean.probs())},
             {"rewards", matrix_to_json(info.family.rewards.table())}};
    if (sample) {
        const TaskStream stream = generate_task_stream(info.family, 1, c.m, RngStream(seed), c.planner_tol);
        out["sample_task"] = matrix_to_json(stream.tasks.front().probs());
        out["sample_task_deviation"] = (stream.tasks.front().probs() - dist.mean.probs()).cwiseAbs().maxCoeff();
    }
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_run(const ConfigFlags& flags, unsigned jobs, bool dump_records) {
    const ExperimentConfig c = flags.resolve();
    SweepFiles files;
    const SweepResult result = run_sweep(c, jobs, &files);
    print_files(files);
    if (dump_records) {
        json records = json::array();
        for (const auto& run : result.runs) {
            for (const auto& r : run.records) records.push_back(run_record_to_json(r));
        }
        const auto path = std::filesystem::path(c.output_dir) / "records.json";
        write_file_atomic(path, records.dump() + "\n");
        std::cout << "wrote " << path.string() << "\n";
    }
    for (const auto& [variant, schedule] : result.aggregate.series()) {
        double mean = 0.0;
        for (std::int64_t t = 1; t <= result.aggregate.tasks; ++t) {
            mean += result.aggregate.schedule_cell(variant, schedule, t).mean_loss;
        }
        std::printf("%-12s %-22s task-averaged loss %.6f\n", variant.c_str(), schedule.c_str(),
                    mean / static_cast<double>(result.aggregate.tasks));
    }
    return 0;
}

int cmd_sweep(const ConfigFlags& flags, unsigned jobs, const std::vector<std::string>& regimes,
              const std::vector<std::int64_t>& m_values, const std::vector<std::int64_t>& t_values) {
    const ExperimentConfig base = flags.resolve();
    struct Point {
        std::string label;
        ExperimentConfig config;
    };
    std::vector<Point> points;
    const std::vector<std::string> regime_axis = regimes.empty() ? std::vector<std::string>{""} : regimes;
    const std::vector<std::int64_t> m_axis = m_values.empty() ? std::vector<std::int64_t>{base.m} : m_values;
    const std::vector<std::int64_t> t_axis = t_values.empty() ? std::vector<std::int64_t>{base.tasks} : t_values;
    for (const auto& regime : regime_axis) {
        for (auto m : m_axis) {
            for (auto t : t_axis) {
                ExperimentConfig c = base;
                std::string label;
                if (!regime.empty()) {
                    c.sigma_target = sigma_for_regime(regime);
                    c.a0.reset();
                    label += regime;
                }
                if (!m_values.empty()) {
                    c.m = m;
                    label += (label.empty() ? "" : "_") + std::string("m") + std::to_string(m);
                }
                if (!t_values.empty()) {
                    c.tasks = t;
                    label += (label.empty() ? "" : "_") + std::string("T") + std::to_string(t);
                }
                if (label.empty()) label = "base";
                c.output_dir = (std::filesystem::path(base.output_dir) / label).string();
                points.push_back({label, c});
            }
        }
    }
    // validate every point before doing any work
    std::vector<std::string> problems;
    for (const auto& p : points) {
        for (const auto& v : p.config.violations()) problems.push_back(p.label + ": " + v);
    }
    if (!problems.empty()) throw ValidationError(problems);
    for (const auto& p : points) {
        std::cout << "== " << p.label << "\n";
        SweepFiles files;
        run_sweep(p.config, jobs, &files);
        print_files(files);
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::vector<std::string>& figures,
             const std::optional<std::string>& output) {
    std::vector<LabeledResult> results;
    for (const auto& in : inputs) {
        const std::filesystem::path dir(in);
        const auto label = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
        results.push_back({label, read_aggregate(dir / "aggregate.csv", dir / "schedule.csv")});
    }
    const std::filesystem::path out = output ? std::filesystem::path(*output) : std::filesystem::path(inputs.front());
    for (const auto& name : figures) {
        const FigureId id = parse_figure_id(name);
        const auto path = id == FigureId::fig4 ? emit_figure(id, results, out) : emit_figure(id, {results.front()}, out);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Meta-learned transition priors and adaptive planning horizons on random tabular MDPs"};
    app.require_subcommand(1);

    ConfigFlags generate_flags, run_flags, sweep_flags;
    unsigned jobs = default_jobs();

    auto* generate = app.add_subcommand("generate", "sample a task distribution and print it as JSON");
    generate_flags.attach(generate);
    std::uint64_t generate_seed = 0;
    bool generate_sample = false;
    generate->add_option("--seed", generate_seed, "seed of the sampled distribution");
    generate->add_flag("--sample-task", generate_sample, "also draw one task from it");

    auto* run = app.add_subcommand("run", "run one configuration and write CSV results");
    run_flags.attach(run);
    bool dump_records = false;
    run->add_option("-j,--jobs", jobs, "worker threads");
    run->add_flag("--records", dump_records, "also write every run record as JSON");

    auto* sweep = app.add_subcommand("sweep", "run a grid of sigma regimes and/or m, T values");
    sweep_flags.attach(sweep);
    std::vector<std::string> regimes;
    std::vector<std::int64_t> m_values, t_values;
    sweep->add_option("-j,--jobs", jobs, "worker threads");
    sweep->add_option("--regimes", regimes, "strong, medium, loose")->delimiter(',');
    sweep->add_option("--m-values", m_values, "samples per (s,a)")->delimiter(',');
    sweep->add_option("--t-values", t_values, "tasks per run")->delimiter(',');

    auto* plot = app.add_subcommand("plot", "render SVG figures from stored results");
    std::vector<std::string> inputs, figures;
    std::optional<std::string> plot_output;
    plot->add_option("-i,--input", inputs, "result directories (fig4 uses one per regime)")->required()->delimiter(',');
    plot->add_option("-f,--figure", figures, "fig3a, fig3b, fig3c, fig4, fig5")->required()->delimiter(',');
    plot->add_option("-o,--output-dir", plot_output, "where to write SVGs (default: first input)");

    auto* bounds = app.add_subcommand("bounds", "print bound curves as CSV");
    BoundParams bp;
    std::vector<double> bound_grid;
    std::optional<std::string> bounds_output;
    bounds->add_option("-m,--m", bp.m, "samples per (s,a)");
    bounds->add_option("-T,--tasks", bp.t_tasks, "tasks seen");
    bounds->add_option("--s-count", bp.s_count, "states");
    bounds->add_option("--a-count", bp.a_count, "actions");
    bounds->add_option("--sigma", bp.sigma, "task similarity");
    bounds->add_option("--cap-sigma", bp.cap_sigma, "diameter of the model set");
    bounds->add_option("--delta", bp.delta, "failure probability");
    bounds->add_option("--gamma-eval", bp.gamma_eval, "evaluation discount");
    bounds->add_option("--rmax", bp.rmax, "reward upper bound");
    bounds->add_option("--log-factor", bp.log_factor, "multiplier for the stripped log terms");
    bounds->add_option("--grid", bound_grid, "discounts (default 0, 0.05, ..., gamma_eval)")->delimiter(',');
    bounds->add_option("-o,--output", bounds_output, "CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*generate) return cmd_generate(generate_flags, generate_seed, generate_sample);
        if (*run) return cmd_run(run_flags, jobs, dump_records);
        if (*sweep) return cmd_sweep(sweep_flags, jobs, regimes, m_values, t_values);
        if (*plot) return cmd_plot(inputs, figures, plot_output);
        if (*bounds) {
            const auto grid = bound_grid.empty() ? default_gamma_grid(bp.gamma_eval) : bound_grid;
            const std::string csv = bound_report(bp, grid);
            if (bounds_output) {
                write_file_atomic(*bounds_output, csv);
                std::cout << "wrote " << *bounds_output << "\n";
            } else {
                std::cout << csv;
            }
            return 0;
        }
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
