#pragma once

// SVG figure recipes over aggregated sweep results, and bound-curve tables.

#include "metaplan/horizon.hpp"
#include "metaplan/sweep.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace metaplan {

enum class FigureId { fig3a, fig3b, fig3c, fig4, fig5 };

std::string to_string(FigureId id);
FigureId parse_figure_id(const std::string& name);
const std::vector<FigureId>& all_figures();

enum class ErrorBars { std_dev, std_err };

/// What a figure shows and which error-bar convention its caption uses.
struct FigureRecipe {
    FigureId id;
    std::string title;
    std::string variant; // series every panel needs
    ErrorBars bars;
    std::string description;
};
const FigureRecipe& recipe(FigureId id);

/// One aggregated sweep with a panel label (fig4 takes one per task-similarity regime).
struct LabeledResult {
    std::string label;
    AggregateResult result;
};

/// Render a figure to SVG text. Throws InvalidInput naming the missing
/// (variant, schedule) when a required series is absent.
std::string render_figure(FigureId id, const std::vector<LabeledResult>& results);

/// Render, then write `<dir>/<id>.svg`. Nothing is written when rendering fails.
std::filesystem::path emit_figure(FigureId id, const std::vector<LabeledResult>& results,
                                  const std::filesystem::path& dir);

/// CSV with one row per discount: gamma, then bias, uncertainty and total for
/// the single-task bound and the task-averaged bound.
std::string bound_report(const BoundParams& params, const std::vector<double>& grid);

} // namespace metaplan
