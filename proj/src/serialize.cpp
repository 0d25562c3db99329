#include "metaplan/serialize.hpp"

#include <cstdio>

namespace metaplan {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

template <typename T>
T field(const nlohmann::json& j, const char* key) {
    if (!j.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("bad field '") + key + "': " + e.what());
    }
}

void check_version(const nlohmann::json& j, int expected, const char* what) {
    const int v = field<int>(j, "version");
    if (v != expected) {
        throw InvalidInput(std::string(what) + ": unsupported version " + std::to_string(v) + " (expected " +
                           std::to_string(expected) + ")");
    }
}

} // namespace

nlohmann::json matrix_to_json(const Matrix<double>& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix<double> matrix_from_json(const nlohmann::json& j) {
    const auto rows = field<Index>(j, "rows");
    const auto cols = field<Index>(j, "cols");
    const auto data = field<std::vector<std::vector<double>>>(j, "data");
    if (rows < 0 || cols < 0 || static_cast<Index>(data.size()) != rows) throw InvalidInput("matrix: row count mismatch");
    Matrix<double> m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (static_cast<Index>(data[static_cast<std::size_t>(r)].size()) != cols) {
            throw InvalidInput("matrix: column count mismatch");
        }
        for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    return m;
}

nlohmann::json prior_state_to_json(const PriorState& state) {
    return nlohmann::json{{"version", kPriorStateVersion},
                          {"states", state.prior.states()},
                          {"actions", state.prior.actions()},
                          {"prior", matrix_to_json(state.prior.probs())},
                          {"task_count", state.task_count},
                          {"sigma_hat", matrix_to_json(state.sigma_hat)},
                          {"welford_mean", matrix_to_json(state.welford_mean)},
                          {"welford_m2", matrix_to_json(state.welford_m2)},
                          {"welford_count", state.welford_count}};
}

PriorState prior_state_from_json(const nlohmann::json& j) {
    check_version(j, kPriorStateVersion, "prior state");
    PriorState st;
    const auto states = field<Index>(j, "states");
    const auto actions = field<Index>(j, "actions");
    st.prior = TransitionModel<double>(states, actions, matrix_from_json(field<nlohmann::json>(j, "prior")));
    st.task_count = field<std::int64_t>(j, "task_count");
    st.sigma_hat = matrix_from_json(field<nlohmann::json>(j, "sigma_hat"));
    st.welford_mean = matrix_from_json(field<nlohmann::json>(j, "welford_mean"));
    st.welford_m2 = matrix_from_json(field<nlohmann::json>(j, "welford_m2"));
    st.welford_count = field<std::int64_t>(j, "welford_count");
    if (st.sigma_hat.rows() != states || st.sigma_hat.cols() != actions) throw InvalidInput("prior state: sigma_hat shape");
    if (st.welford_mean.rows() != states * actions || st.welford_mean.cols() != states ||
        st.welford_m2.rows() != states * actions || st.welford_m2.cols() != states) {
        throw InvalidInput("prior state: Welford aggregate shape");
    }
    if (st.task_count < 0 || st.welford_count < 0) throw InvalidInput("prior state: negative count");
    return st;
}

nlohmann::json run_record_to_json(const RunRecord& r) {
    return nlohmann::json{{"version", kRunRecordVersion},
                          {"variant", r.variant},
                          {"schedule", r.schedule},
                          {"seed", r.seed},
                          {"gamma_grid", r.gamma_grid},
                          {"per_task_loss", matrix_to_json(r.per_task_loss)},
                          {"chosen_gamma", r.chosen_gamma},
                          {"chosen_loss", r.chosen_loss},
                          {"alpha_trace", r.alpha_trace},
                          {"sigma_hat_trace", r.sigma_hat_trace}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
    check_version(j, kRunRecordVersion, "run record");
    RunRecord r;
    r.variant = field<std::string>(j, "variant");
    r.schedule = field<std::string>(j, "schedule");
    r.seed = field<std::uint64_t>(j, "seed");
    r.gamma_grid = field<std::vector<double>>(j, "gamma_grid");
    r.per_task_loss = matrix_from_json(field<nlohmann::json>(j, "per_task_loss"));
    r.chosen_gamma = field<std::vector<double>>(j, "chosen_gamma");
    r.chosen_loss = field<std::vector<double>>(j, "chosen_loss");
    r.alpha_trace = field<std::vector<double>>(j, "alpha_trace");
    r.sigma_hat_trace = field<std::vector<double>>(j, "sigma_hat_trace");
    if (r.per_task_loss.cols() != static_cast<Index>(r.gamma_grid.size())) {
        throw InvalidInput("run record: loss grid does not match gamma grid");
    }
    return r;
}

std::string run_record_csv(const RunRecord& r) {
    std::string out = "seed,task,gamma,loss,chosen\n";
    for (Index t = 0; t < r.tasks(); ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const Index chosen = ti < r.chosen_gamma.size() ? r.grid_index(r.chosen_gamma[ti]) : -1;
        const std::string prefix = std::to_string(r.seed) + "," + std::to_string(t + 1) + ",";
        for (std::size_t j = 0; j < r.gamma_grid.size(); ++j) {
            out += prefix + fmt(r.gamma_grid[j]) + "," + fmt(r.per_task_loss(t, static_cast<Index>(j))) + "," +
                   (static_cast<Index>(j) == chosen ? "1" : "0") + "\n";
        }
        if (ti < r.chosen_gamma.size() && chosen < 0) {
            out += prefix + fmt(r.chosen_gamma[ti]) + "," + fmt(r.chosen_loss[ti]) + ",1\n";
        }
    }
    return out;
}

} // namespace metaplan
