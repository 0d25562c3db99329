#include "metaplan/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace metaplan {

namespace {

std::string num(double x, int precision = 6) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* colour(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#2ca02c", "#d62728", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

// Blue-to-red ramp for task-indexed curves.
std::string ramp(std::size_t i, std::size_t n) {
    const double f = n <= 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", static_cast<int>(40 + 200 * f), 60,
                  static_cast<int>(220 - 180 * f));
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double x) {
        if (std::isfinite(x)) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    Range padded() const {
        Range r = *this;
        if (!std::isfinite(r.lo)) return {0.0, 1.0};
        if (r.hi - r.lo < 1e-12) {
            const double w = std::max(std::abs(r.lo) * 0.1, 0.5);
            return {r.lo - w, r.hi + w};
        }
        const double pad = 0.05 * (r.hi - r.lo);
        return {r.lo - pad, r.hi + pad};
    }
};

std::vector<double> ticks(const Range& r) {
    const double span = r.hi - r.lo;
    const double raw = span / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
        out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    }
    return out;
}

struct Point {
    double x, y, err;
};

struct Curve {
    std::string label;
    std::string colour;
    std::vector<Point> points;
    bool mark_argmin = false;
    bool right_axis = false;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string y2_label; // non-empty enables a right-hand axis
    std::vector<Curve> curves;
};

class Svg {
public:
    Svg(double w, double h) : w_(w), h_(h) {}

    void text(double x, double y, const std::string& s, const char* anchor = "middle", int size = 12,
              double rotate = 0.0) {
        out_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
             << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
        if (rotate != 0.0) out_ << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y) << ")\"";
        out_ << ">" << escape(s) << "</text>\n";
    }
    void line(double x1, double y1, double x2, double y2, const std::string& stroke, double width = 1.0) {
        out_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
             << "\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width) << "\"/>\n";
    }
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, bool dashed) {
        out_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.6\"";
        if (dashed) out_ << " stroke-dasharray=\"5,3\"";
        out_ << " points=\"";
        for (const auto& [x, y] : pts) out_ << num(x) << "," << num(y) << " ";
        out_ << "\"/>\n";
    }
    void circle(double x, double y, double r, const std::string& fill, const std::string& cls = "point") {
        out_ << "<circle class=\"" << cls << "\" cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
             << "\" fill=\"" << fill << "\"/>\n";
    }
    void star(double x, double y, const std::string& fill) {
        out_ << "<path class=\"argmin\" d=\"M" << num(x) << "," << num(y - 6) << " L" << num(x + 5) << "," << num(y + 4)
             << " L" << num(x - 5) << "," << num(y + 4) << " Z\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"0.6\"/>\n";
    }
    void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke) {
        out_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
             << "\" fill=\"" << fill << "\" stroke=\"" << stroke << "\"/>\n";
    }
    void raw(const std::string& s) { out_ << s; }

    std::string str() const {
        std::ostringstream doc;
        doc << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w_) << "\" height=\"" << num(h_)
            << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\">\n"
            << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
            << out_.str() << "</svg>\n";
        return doc.str();
    }

private:
    double w_, h_;
    std::ostringstream out_;
};

constexpr double kPanelW = 600, kPanelH = 380;
constexpr double kLeft = 70, kRight = 190, kTop = 55, kBottom = 55;

void draw_panel(Svg& svg, const Panel& panel, double ox, double oy, const std::string& bars_note) {
    Range xr, yr, y2r;
    for (const auto& c : panel.curves) {
        for (const auto& p : c.points) {
            xr.add(p.x);
            (c.right_axis ? y2r : yr).add(p.y - p.err);
            (c.right_axis ? y2r : yr).add(p.y + p.err);
        }
    }
    xr = xr.padded();
    yr = yr.padded();
    y2r = y2r.padded();
    const double x0 = ox + kLeft, x1 = ox + kPanelW - kRight;
    const double y0 = oy + kPanelH - kBottom, y1 = oy + kTop;
    auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
    auto py = [&](double y, bool right) {
        const Range& r = right ? y2r : yr;
        return y0 - (y - r.lo) / (r.hi - r.lo) * (y0 - y1);
    };

    svg.text((x0 + x1) / 2, oy + 22, panel.title, "middle", 14);
    svg.line(x0, y0, x1, y0, "black");
    svg.line(x0, y0, x0, y1, "black");
    for (double t : ticks(xr)) {
        svg.line(px(t), y0, px(t), y0 + 4, "black");
        svg.text(px(t), y0 + 17, num(t, 4), "middle", 10);
    }
    for (double t : ticks(yr)) {
        svg.line(x0 - 4, py(t, false), x0, py(t, false), "black");
        svg.text(x0 - 6, py(t, false) + 3, num(t, 4), "end", 10);
    }
    svg.text((x0 + x1) / 2, y0 + 38, panel.x_label, "middle", 12);
    svg.text(ox + 18, (y0 + y1) / 2, panel.y_label, "middle", 12, -90);
    if (!panel.y2_label.empty()) {
        svg.line(x1, y0, x1, y1, "black");
        for (double t : ticks(y2r)) {
            svg.line(x1, py(t, true), x1 + 4, py(t, true), "black");
            svg.text(x1 + 6, py(t, true) + 3, num(t, 4), "start", 10);
        }
        svg.text(x1 + 48, (y0 + y1) / 2, panel.y2_label, "middle", 12, 90);
    }
    svg.text((x0 + x1) / 2, oy + 38, bars_note, "middle", 10);

    for (const auto& c : panel.curves) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : c.points) pts.emplace_back(px(p.x), py(p.y, c.right_axis));
        if (pts.size() > 1) svg.polyline(pts, c.colour, c.dashed);
        for (const auto& p : c.points) {
            if (p.err > 0.0) {
                const double xp = px(p.x);
                svg.line(xp, py(p.y - p.err, c.right_axis), xp, py(p.y + p.err, c.right_axis), c.colour, 0.8);
                svg.line(xp - 3, py(p.y - p.err, c.right_axis), xp + 3, py(p.y - p.err, c.right_axis), c.colour, 0.8);
                svg.line(xp - 3, py(p.y + p.err, c.right_axis), xp + 3, py(p.y + p.err, c.right_axis), c.colour, 0.8);
            }
            svg.circle(px(p.x), py(p.y, c.right_axis), 2.5, c.colour);
        }
        if (c.mark_argmin && !c.points.empty()) {
            const auto best = std::min_element(c.points.begin(), c.points.end(),
                                               [](const Point& a, const Point& b) { return a.y < b.y; });
            svg.star(px(best->x), py(best->y, c.right_axis), c.colour);
        }
    }

    // legend, capped so long task lists stay readable
    const std::size_t shown = std::min<std::size_t>(panel.curves.size(), 16);
    const double lx = x1 + (panel.y2_label.empty() ? 20 : 62), ly = y1 + 6;
    if (shown > 0) svg.rect(lx - 4, ly - 10, 124, 14.0 * static_cast<double>(shown) + 6, "white", "#cccccc");
    for (std::size_t i = 0; i < shown; ++i) {
        const auto& c = panel.curves[i];
        const double yy = ly + 14.0 * static_cast<double>(i);
        svg.line(lx, yy - 3, lx + 16, yy - 3, c.colour, 2.0);
        svg.text(lx + 20, yy + 1, c.label, "start", 10);
    }
}

std::string render_panels(const std::vector<Panel>& panels, const std::string& bars_note) {
    Svg svg(kPanelW * static_cast<double>(panels.size()), kPanelH);
    for (std::size_t i = 0; i < panels.size(); ++i) {
        draw_panel(svg, panels[i], kPanelW * static_cast<double>(i), 0.0, bars_note);
    }
    return svg.str();
}

double spread(double stderr_loss, std::int64_t n_runs, ErrorBars bars) {
    return bars == ErrorBars::std_err ? stderr_loss : stderr_loss * std::sqrt(static_cast<double>(n_runs));
}

// Grid losses do not depend on the schedule, so any schedule of the variant will do.
std::string any_schedule(const AggregateResult& r, const std::string& variant) {
    for (const auto& [v, s] : r.series()) {
        if (v == variant) return s;
    }
    throw InvalidInput("figure needs series (" + variant + ", any schedule), which the result does not contain");
}

const LabeledResult& single(const std::vector<LabeledResult>& results, FigureId id) {
    if (results.size() != 1) {
        throw InvalidInput(to_string(id) + " takes exactly one result, got " + std::to_string(results.size()));
    }
    return results.front();
}

Panel loss_vs_gamma(const AggregateResult& r, const std::string& variant, ErrorBars bars, const std::string& title) {
    const std::string sched = any_schedule(r, variant);
    Panel p{title, "guidance discount gamma", "planning loss", "", {}};
    for (std::int64_t t = 1; t <= r.tasks; ++t) {
        Curve c{"task " + std::to_string(t), ramp(static_cast<std::size_t>(t - 1), static_cast<std::size_t>(r.tasks)),
                {}, true, false, false};
        for (double g : r.gamma_grid) {
            const auto& cell = r.cell(variant, sched, t, g);
            c.points.push_back({g, cell.mean_loss, spread(cell.stderr_loss, cell.n_runs, bars)});
        }
        p.curves.push_back(std::move(c));
    }
    return p;
}

const char* bars_note(ErrorBars b) {
    return b == ErrorBars::std_dev ? "error bars: 1 standard deviation" : "error bars: 1 standard error";
}

} // namespace

std::string to_string(FigureId id) {
    switch (id) {
    case FigureId::fig3a: return "fig3a";
    case FigureId::fig3b: return "fig3b";
    case FigureId::fig3c: return "fig3c";
    case FigureId::fig4: return "fig4";
    case FigureId::fig5: return "fig5";
    }
    return "unknown";
}

FigureId parse_figure_id(const std::string& name) {
    for (auto id : all_figures()) {
        if (to_string(id) == name) return id;
    }
    throw InvalidInput("unknown figure '" + name + "' (expected fig3a, fig3b, fig3c, fig4 or fig5)");
}

const std::vector<FigureId>& all_figures() {
    static const std::vector<FigureId> ids{FigureId::fig3a, FigureId::fig3b, FigureId::fig3c, FigureId::fig4,
                                           FigureId::fig5};
    return ids;
}

const FigureRecipe& recipe(FigureId id) {
    static const std::vector<FigureRecipe> recipes{
        {FigureId::fig3a, "Per-task planning loss at gamma_eval", "ada_pomrl", ErrorBars::std_dev,
         "oracle, pomrl, ada_pomrl and no_meta loss per task at the largest grid discount"},
        {FigureId::fig3b, "ada-POMRL planning loss by task", "ada_pomrl", ErrorBars::std_err,
         "ada_pomrl loss against the discount, one curve per task, argmin marked"},
        {FigureId::fig3c, "ada-POMRL minimum loss and optimal discount", "ada_pomrl", ErrorBars::std_dev,
         "lowest mean loss per task (left axis) and mean per-run argmin discount (right axis)"},
        {FigureId::fig4, "ada-POMRL loss by task-similarity regime", "ada_pomrl", ErrorBars::std_dev,
         "one loss-against-discount panel per regime, argmin marked"},
        {FigureId::fig5, "Discount schedules", "pomrl", ErrorBars::std_err,
         "pomrl chosen loss per task for every schedule in the result"},
    };
    for (const auto& r : recipes) {
        if (r.id == id) return r;
    }
    throw InvalidInput("no recipe for figure");
}

std::string render_figure(FigureId id, const std::vector<LabeledResult>& results) {
    const FigureRecipe& rec = recipe(id);
    switch (id) {
    case FigureId::fig3a: {
        const auto& r = single(results, id).result;
        const double g = r.gamma_grid.empty() ? 0.0 : r.gamma_grid.back();
        Panel p{rec.title, "task", "planning loss at gamma = " + num(g, 4), "", {}};
        std::size_t k = 0;
        for (const std::string v : {"oracle", "pomrl", "ada_pomrl", "no_meta"}) {
            const std::string sched = any_schedule(r, v);
            Curve c{v, colour(k++), {}, false, false, false};
            for (std::int64_t t = 1; t <= r.tasks; ++t) {
                const auto& cell = r.cell(v, sched, t, g);
                c.points.push_back({static_cast<double>(t), cell.mean_loss, spread(cell.stderr_loss, cell.n_runs, rec.bars)});
            }
            p.curves.push_back(std::move(c));
        }
        return render_panels({p}, bars_note(rec.bars));
    }
    case FigureId::fig3b: {
        const auto& r = single(results, id).result;
        return render_panels({loss_vs_gamma(r, rec.variant, rec.bars, rec.title)}, bars_note(rec.bars));
    }
    case FigureId::fig3c: {
        const auto& r = single(results, id).result;
        const std::string sched = any_schedule(r, rec.variant);
        Panel p{rec.title, "task", "minimum planning loss", "optimal guidance discount", {}};
        Curve loss{"min loss", colour(0), {}, false, false, false};
        Curve gamma{"optimal gamma", colour(2), {}, false, true, true};
        for (std::int64_t t = 1; t <= r.tasks; ++t) {
            const AggregateCell* best = nullptr;
            for (double g : r.gamma_grid) {
                const auto& cell = r.cell(rec.variant, sched, t, g);
                if (!best || cell.mean_loss < best->mean_loss) best = &cell;
            }
            if (!best) throw InvalidInput("fig3c: empty discount grid");
            loss.points.push_back({static_cast<double>(t), best->mean_loss, spread(best->stderr_loss, best->n_runs, rec.bars)});
            gamma.points.push_back({static_cast<double>(t), best->mean_opt_gamma, 0.0});
        }
        p.curves = {loss, gamma};
        return render_panels({p}, bars_note(rec.bars));
    }
    case FigureId::fig4: {
        if (results.empty()) throw InvalidInput("fig4 needs at least one result");
        std::vector<Panel> panels;
        for (const auto& lr : results) panels.push_back(loss_vs_gamma(lr.result, rec.variant, rec.bars, lr.label));
        return render_panels(panels, bars_note(rec.bars));
    }
    case FigureId::fig5: {
        const auto& r = single(results, id).result;
        Panel p{rec.title, "task", "planning loss at chosen discount", "", {}};
        std::size_t k = 0;
        for (const auto& [v, s] : r.series()) {
            if (v != rec.variant) continue;
            Curve c{s, colour(k++), {}, false, false, false};
            for (std::int64_t t = 1; t <= r.tasks; ++t) {
                const auto& cell = r.schedule_cell(v, s, t);
                c.points.push_back({static_cast<double>(t), cell.mean_loss, spread(cell.stderr_loss, cell.n_runs, rec.bars)});
            }
            p.curves.push_back(std::move(c));
        }
        if (p.curves.empty()) {
            throw InvalidInput("figure needs series (" + rec.variant + ", any schedule), which the result does not contain");
        }
        return render_panels({p}, bars_note(rec.bars));
    }
    }
    throw InvalidInput("unknown figure");
}

std::filesystem::path emit_figure(FigureId id, const std::vector<LabeledResult>& results,
                                  const std::filesystem::path& dir) {
    const std::string svg = render_figure(id, results);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / (to_string(id) + ".svg");
    write_file_atomic(path, svg);
    return path;
}

std::string bound_report(const BoundParams& params, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidInput("bound_report: empty discount grid");
    params.validate();
    auto fmt = [](double x) { return num(x, 17); };
    std::string out = "gamma,thm1_bias,thm1_uncertainty,thm1_total,thm2_bias,thm2_uncertainty,thm2_total\n";
    for (double g : grid) {
        const BoundTerms a = theorem1_terms(g, params);
        const BoundTerms b = theorem2_terms(g, params);
        out += fmt(g) + "," + fmt(a.bias) + "," + fmt(a.uncertainty) + "," + fmt(a.total()) + "," + fmt(b.bias) + "," +
               fmt(b.uncertainty) + "," + fmt(b.total()) + "\n";
    }
    return out;
}

} // namespace metaplan
