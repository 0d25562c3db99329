#include "metaplan/sweep.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace metaplan {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::vector<std::vector<std::string>> read_rows(const std::string& text, const std::string& header) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw InvalidInput("unexpected CSV header (expected '" + header + "')");
    }
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (!line.empty()) rows.push_back(split(line));
    }
    return rows;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t argmin_column(const Matrix<double>& losses, Index row, const std::vector<double>& grid) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < grid.size(); ++j) {
        const double l = losses(row, static_cast<Index>(j));
        const double b = losses(row, static_cast<Index>(best));
        if (l < b || (l == b && grid[j] < grid[best])) best = j;
    }
    return best;
}

constexpr const char* kRawHeader = "seed,variant,schedule,task,gamma,loss,chosen";
constexpr const char* kAggregateHeader = "variant,schedule,task,gamma,mean_loss,stderr,n_runs,mean_opt_gamma";
constexpr const char* kScheduleHeader = "variant,schedule,task,mean_gamma,mean_loss,stderr,n_runs";

} // namespace

double AggregateCell::std_loss() const { return stderr_loss * std::sqrt(static_cast<double>(n_runs)); }
double ScheduleCell::std_loss() const { return stderr_loss * std::sqrt(static_cast<double>(n_runs)); }

Stats summarize(const std::vector<double>& xs) {
    Stats s;
    s.n = static_cast<std::int64_t>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.stderr_ = s.std / std::sqrt(static_cast<double>(s.n));
    }
    return s;
}

const AggregateCell& AggregateResult::cell(const std::string& variant, const std::string& schedule,
                                           std::int64_t task, double gamma) const {
    for (const auto& c : cells) {
        if (c.variant == variant && c.schedule == schedule && c.task == task && std::abs(c.gamma - gamma) <= 1e-12) {
            return c;
        }
    }
    throw InvalidInput("no aggregate series for (" + variant + ", " + schedule + ") at task " + std::to_string(task) +
                       ", gamma " + fmt(gamma));
}

const ScheduleCell& AggregateResult::schedule_cell(const std::string& variant, const std::string& schedule,
                                                   std::int64_t task) const {
    for (const auto& c : schedule_cells) {
        if (c.variant == variant && c.schedule == schedule && c.task == task) return c;
    }
    throw InvalidInput("no schedule series for (" + variant + ", " + schedule + ") at task " + std::to_string(task));
}

bool AggregateResult::has_series(const std::string& variant, const std::string& schedule) const {
    return std::any_of(cells.begin(), cells.end(),
                       [&](const AggregateCell& c) { return c.variant == variant && c.schedule == schedule; });
}

std::vector<std::pair<std::string, std::string>> AggregateResult::series() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& c : schedule_cells) {
        std::pair<std::string, std::string> key{c.variant, c.schedule};
        if (std::find(out.begin(), out.end(), key) == out.end()) out.push_back(key);
    }
    return out;
}

AggregateResult aggregate(const std::vector<SeedRun>& runs) {
    AggregateResult out;
    if (runs.empty() || runs.front().records.empty()) return out;
    const auto& first = runs.front().records.front();
    out.gamma_grid = first.gamma_grid;
    out.tasks = first.tasks();

    const std::size_t n_series = runs.front().records.size();
    for (const auto& run : runs) {
        if (run.records.size() != n_series) throw InvalidInput("aggregate: runs disagree on the number of series");
    }
    for (std::size_t k = 0; k < n_series; ++k) {
        const auto& proto = runs.front().records[k];
        for (std::int64_t t = 0; t < out.tasks; ++t) {
            std::vector<double> opt;
            for (const auto& run : runs) {
                const auto& rec = run.records[k];
                opt.push_back(rec.gamma_grid[argmin_column(rec.per_task_loss, t, rec.gamma_grid)]);
            }
            const double mean_opt = summarize(opt).mean;
            for (std::size_t j = 0; j < out.gamma_grid.size(); ++j) {
                std::vector<double> xs;
                for (const auto& run : runs) xs.push_back(run.records[k].per_task_loss(t, static_cast<Index>(j)));
                const Stats s = summarize(xs);
                out.cells.push_back(
                    {proto.variant, proto.schedule, t + 1, out.gamma_grid[j], s.mean, s.stderr_, s.n, mean_opt});
            }
            std::vector<double> gammas, losses;
            for (const auto& run : runs) {
                gammas.push_back(run.records[k].chosen_gamma[static_cast<std::size_t>(t)]);
                losses.push_back(run.records[k].chosen_loss[static_cast<std::size_t>(t)]);
            }
            const Stats s = summarize(losses);
            out.schedule_cells.push_back(
                {proto.variant, proto.schedule, t + 1, summarize(gammas).mean, s.mean, s.stderr_, s.n});
        }
    }
    return out;
}

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
    FamilyInfo info = make_task_family(config, seed);
    const RunSettings settings = config.run_settings();
    TaskStream stream = generate_task_stream(info.family, settings.tasks, settings.m, RngStream(seed),
                                             settings.planner_tol);
    const auto schedules = config.parsed_schedules();
    SeedRun run;
    run.seed = seed;
    run.a0 = info.a0;
    run.sigma = info.family.dist.sigma_max();
    for (auto variant : config.parsed_variants()) {
        auto recs = run_variant_schedules(variant, info.family, stream, settings, schedules, seed);
        for (auto& r : recs) run.records.push_back(std::move(r));
    }
    return run;
}

SweepResult execute_sweep(const ExperimentConfig& config, unsigned jobs) {
    config.validate();
    const auto n = static_cast<std::size_t>(config.seeds);
    std::vector<SeedRun> runs(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                runs[i] = run_seed(config, config.base_seed + i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    SweepResult result;
    result.config = config;
    result.aggregate = aggregate(runs);
    result.runs = std::move(runs);
    return result;
}

std::string raw_csv(const std::vector<SeedRun>& runs) {
    std::string out = std::string(kRawHeader) + "\n";
    for (const auto& run : runs) {
        for (const auto& rec : run.records) {
            for (std::int64_t t = 0; t < rec.tasks(); ++t) {
                const double chosen = rec.chosen_gamma[static_cast<std::size_t>(t)];
                const Index chosen_col = rec.grid_index(chosen);
                const std::string prefix = std::to_string(run.seed) + "," + rec.variant + "," + rec.schedule + "," +
                                           std::to_string(t + 1) + ",";
                for (std::size_t j = 0; j < rec.gamma_grid.size(); ++j) {
                    out += prefix + fmt(rec.gamma_grid[j]) + "," + fmt(rec.per_task_loss(t, static_cast<Index>(j))) +
                           "," + (static_cast<Index>(j) == chosen_col ? "1" : "0") + "\n";
                }
                if (chosen_col < 0) {
                    out += prefix + fmt(chosen) + "," + fmt(rec.chosen_loss[static_cast<std::size_t>(t)]) + ",1\n";
                }
            }
        }
    }
    return out;
}

std::string aggregate_csv(const AggregateResult& result) {
    std::string out = std::string(kAggregateHeader) + "\n";
    for (const auto& c : result.cells) {
        out += c.variant + "," + c.schedule + "," + std::to_string(c.task) + "," + fmt(c.gamma) + "," +
               fmt(c.mean_loss) + "," + fmt(c.stderr_loss) + "," + std::to_string(c.n_runs) + "," +
               fmt(c.mean_opt_gamma) + "\n";
    }
    return out;
}

std::string schedule_csv(const AggregateResult& result) {
    std::string out = std::string(kScheduleHeader) + "\n";
    for (const auto& c : result.schedule_cells) {
        out += c.variant + "," + c.schedule + "," + std::to_string(c.task) + "," + fmt(c.mean_gamma) + "," +
               fmt(c.mean_loss) + "," + fmt(c.stderr_loss) + "," + std::to_string(c.n_runs) + "\n";
    }
    return out;
}

std::string runs_csv(const std::vector<SeedRun>& runs) {
    std::string out = "seed,a0,sigma\n";
    for (const auto& r : runs) out += std::to_string(r.seed) + "," + fmt(r.a0) + "," + fmt(r.sigma) + "\n";
    return out;
}

std::vector<RawRow> parse_raw_csv(const std::string& text) {
    std::vector<RawRow> rows;
    for (const auto& f : read_rows(text, kRawHeader)) {
        if (f.size() != 7) throw InvalidInput("raw CSV row with " + std::to_string(f.size()) + " fields");
        rows.push_back({std::stoull(f[0]), f[1], f[2], std::stoll(f[3]), std::stod(f[4]), std::stod(f[5]), f[6] == "1"});
    }
    return rows;
}

AggregateResult read_aggregate(const std::filesystem::path& aggregate_file, const std::filesystem::path& schedule_file) {
    AggregateResult out;
    for (const auto& f : read_rows(slurp(aggregate_file), kAggregateHeader)) {
        if (f.size() != 8) throw InvalidInput("aggregate CSV row with wrong field count");
        AggregateCell c{f[0], f[1], std::stoll(f[2]), std::stod(f[3]), std::stod(f[4]),
                        std::stod(f[5]), std::stoll(f[6]), std::stod(f[7])};
        out.tasks = std::max(out.tasks, c.task);
        if (std::none_of(out.gamma_grid.begin(), out.gamma_grid.end(),
                         [&](double g) { return std::abs(g - c.gamma) <= 1e-12; })) {
            out.gamma_grid.push_back(c.gamma);
        }
        out.cells.push_back(std::move(c));
    }
    std::sort(out.gamma_grid.begin(), out.gamma_grid.end());
    for (const auto& f : read_rows(slurp(schedule_file), kScheduleHeader)) {
        if (f.size() != 7) throw InvalidInput("schedule CSV row with wrong field count");
        out.schedule_cells.push_back(
            {f[0], f[1], std::stoll(f[2]), std::stod(f[3]), std::stod(f[4]), std::stod(f[5]), std::stoll(f[6])});
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << contents;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move " + tmp + " to " + path.string() + ": " + ec.message());
    }
}

SweepFiles write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string());
    }
    SweepFiles files{dir / "raw.csv", dir / "aggregate.csv", dir / "schedule.csv", dir / "runs.csv", dir / "config.json",
                     ""};
    const std::string raw = raw_csv(result.runs);
    files.raw_sha256 = sha256_hex(raw);
    write_file_atomic(files.raw, raw);
    write_file_atomic(files.aggregate, aggregate_csv(result.aggregate));
    write_file_atomic(files.schedule, schedule_csv(result.aggregate));
    write_file_atomic(files.runs, runs_csv(result.runs));
    nlohmann::json echo;
    echo["config"] = result.config;
    echo["raw_sha256"] = files.raw_sha256;
    echo["format_version"] = 1;
    write_file_atomic(files.config, echo.dump(2) + "\n");
    return files;
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned jobs, SweepFiles* files) {
    config.validate();
    const std::filesystem::path dir(config.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir.string());
    }
    SweepResult result = execute_sweep(config, jobs);
    SweepFiles written = write_sweep_outputs(result, dir);
    if (files) *files = written;
    return result;
}

} // namespace metaplan
