#pragma once

// JSON and CSV forms of meta-learner state and run records.

#include "metaplan/estimation.hpp"
#include "metaplan/meta_loop.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace metaplan {

inline constexpr int kPriorStateVersion = 1;
inline constexpr int kRunRecordVersion = 1;

nlohmann::json matrix_to_json(const Matrix<double>& m);
Matrix<double> matrix_from_json(const nlohmann::json& j);

/// Field-for-field checkpoint of a PriorState, tagged with kPriorStateVersion.
nlohmann::json prior_state_to_json(const PriorState& state);
/// Throws InvalidInput on a missing field or an unknown version.
PriorState prior_state_from_json(const nlohmann::json& j);

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Long format: seed,task,gamma,loss,chosen (one row per task and grid discount,
/// plus a chosen row when the schedule picked an off-grid discount).
std::string run_record_csv(const RunRecord& record);

} // namespace metaplan
