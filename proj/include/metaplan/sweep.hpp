#pragma once

// Seeded sweep execution, aggregation and CSV persistence.

#include "metaplan/config.hpp"
#include "metaplan/meta_loop.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace metaplan {

/// All records produced by one seed.
struct SeedRun {
    std::uint64_t seed = 0;
    double a0 = 0.0;
    double sigma = 0.0; // achieved max sigma of the meta-distribution
    std::vector<RunRecord> records;
};

/// Mean and spread of the grid losses of one (variant, schedule, task, gamma).
struct AggregateCell {
    std::string variant;
    std::string schedule;
    std::int64_t task = 0;
    double gamma = 0.0;
    double mean_loss = 0.0;
    double stderr_loss = 0.0;
    std::int64_t n_runs = 0;
    double mean_opt_gamma = 0.0; // mean over runs of the per-run grid argmin at this task

    double std_loss() const;
};

/// Mean and spread of a schedule's chosen discount and loss per task.
struct ScheduleCell {
    std::string variant;
    std::string schedule;
    std::int64_t task = 0;
    double mean_gamma = 0.0;
    double mean_loss = 0.0;
    double stderr_loss = 0.0;
    std::int64_t n_runs = 0;

    double std_loss() const;
};

/// Summary statistics over runs; standard error is sample std / sqrt(runs).
struct AggregateResult {
    std::vector<double> gamma_grid;
    std::int64_t tasks = 0;
    std::vector<AggregateCell> cells;
    std::vector<ScheduleCell> schedule_cells;

    /// Series lookups; throw InvalidInput naming the missing (variant, schedule).
    const AggregateCell& cell(const std::string& variant, const std::string& schedule, std::int64_t task,
                              double gamma) const;
    const ScheduleCell& schedule_cell(const std::string& variant, const std::string& schedule,
                                      std::int64_t task) const;
    bool has_series(const std::string& variant, const std::string& schedule) const;
    std::vector<std::pair<std::string, std::string>> series() const;
};

struct Stats {
    double mean = 0.0;
    double std = 0.0; // sample standard deviation (n - 1)
    double stderr_ = 0.0;
    std::int64_t n = 0;
};
Stats summarize(const std::vector<double>& xs);

AggregateResult aggregate(const std::vector<SeedRun>& runs);

struct SweepResult {
    ExperimentConfig config;
    std::vector<SeedRun> runs;
    AggregateResult aggregate;
};

/// Execute seeds x variants x schedules; runs are spread over `jobs` threads and
/// the output does not depend on `jobs`.
SweepResult execute_sweep(const ExperimentConfig& config, unsigned jobs = 1);

/// Run one seed: sample the family and task stream, then every variant/schedule.
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);

// --- persistence ---------------------------------------------------------

std::string raw_csv(const std::vector<SeedRun>& runs);
std::string aggregate_csv(const AggregateResult& result);
std::string schedule_csv(const AggregateResult& result);
std::string runs_csv(const std::vector<SeedRun>& runs);

/// Parse files written by aggregate_csv / schedule_csv back into a result.
AggregateResult read_aggregate(const std::filesystem::path& aggregate_file,
                               const std::filesystem::path& schedule_file);

/// Raw rows (seed, variant, schedule, task, gamma, loss, chosen).
struct RawRow {
    std::uint64_t seed = 0;
    std::string variant;
    std::string schedule;
    std::int64_t task = 0;
    double gamma = 0.0;
    double loss = 0.0;
    bool chosen = false;
};
std::vector<RawRow> parse_raw_csv(const std::string& text);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Write `contents` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Files written by run_sweep.
struct SweepFiles {
    std::filesystem::path raw;
    std::filesystem::path aggregate;
    std::filesystem::path schedule;
    std::filesystem::path runs;
    std::filesystem::path config;
    std::string raw_sha256;
};

SweepFiles write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

/// Validate, execute and persist. Invalid configs raise ValidationError before any work.
SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs = 1, SweepFiles* files = nullptr);

} // namespace metaplan
