#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hypergrowth/data_io.hpp"
#include "hypergrowth/diagnostics.hpp"
#include "hypergrowth/errors.hpp"
#include "hypergrowth/fitting.hpp"
#include "hypergrowth/model.hpp"

namespace hypergrowth {

using json = nlohmann::json;

// --- run configuration --------------------------------------------------------

enum class Command { Fit, Ratio, Diagnose, Report, Convert };

inline std::string to_string(Command c) {
    switch (c) {
        case Command::Fit: return "fit";
        case Command::Ratio: return "ratio";
        case Command::Diagnose: return "diagnose";
        case Command::Report: return "report";
        default: return "convert";
    }
}

/// Per-region analysis settings, normally loaded from regions.json next
/// to the data. Windows are the pre-divergence fit ranges; piecewise
/// regions carry breakpoint and bridge settings instead.
struct RegionAnalysis {
    std::string category = "developed";  // candidate-year bucket
    std::optional<YearInterval> gdp_window;
    std::optional<YearInterval> pop_window;
    bool piecewise = false;
    std::optional<double> gdp_breakpoint;  // unset + piecewise means Auto
    std::optional<double> pop_breakpoint;
    std::optional<YearInterval> gdp_search_window;
    std::optional<YearInterval> pop_search_window;
    double bridge_width = 20.0;
    int bridge_degree = 3;
};

using RegionAnalysisMap = std::map<std::string, RegionAnalysis>;

inline RegionAnalysisMap parse_region_analyses(const json& doc) {
    RegionAnalysisMap out;
    if (!doc.contains("regions")) return out;
    auto interval = [](const json& j) {
        return YearInterval{j.at(0).get<double>(), j.at(1).get<double>()};
    };
    for (const auto& [name, cfg] : doc.at("regions").items()) {
        RegionAnalysis ra;
        if (cfg.contains("category")) ra.category = cfg.at("category").get<std::string>();
        if (cfg.contains("gdp_window")) ra.gdp_window = interval(cfg.at("gdp_window"));
        if (cfg.contains("pop_window")) ra.pop_window = interval(cfg.at("pop_window"));
        if (cfg.contains("piecewise")) ra.piecewise = cfg.at("piecewise").get<bool>();
        if (cfg.contains("gdp_breakpoint") && cfg.at("gdp_breakpoint").is_number())
            ra.gdp_breakpoint = cfg.at("gdp_breakpoint").get<double>();
        if (cfg.contains("pop_breakpoint") && cfg.at("pop_breakpoint").is_number())
            ra.pop_breakpoint = cfg.at("pop_breakpoint").get<double>();
        if (cfg.contains("gdp_search_window"))
            ra.gdp_search_window = interval(cfg.at("gdp_search_window"));
        if (cfg.contains("pop_search_window"))
            ra.pop_search_window = interval(cfg.at("pop_search_window"));
        if (cfg.contains("bridge_width")) ra.bridge_width = cfg.at("bridge_width").get<double>();
        if (cfg.contains("bridge_degree")) ra.bridge_degree = cfg.at("bridge_degree").get<int>();
        out.emplace(name, std::move(ra));
    }
    return out;
}

inline RegionAnalysisMap load_region_analyses(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open regions config " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("regions config " + path + ": " + e.what());
    }
    return parse_region_analyses(doc);
}

struct RunConfig {
    Command command = Command::Fit;
    std::string input_path;
    std::string pop_input_path;  // optional second file for population
    std::string region;
    SeriesKind kind = SeriesKind::Gdp;
    std::optional<YearInterval> window;
    bool breakpoint_auto = false;
    std::optional<double> breakpoint;
    double bridge_width = 20.0;
    int bridge_degree = 3;
    DiagnosticOptions diagnostics;
    std::vector<double> candidates;  // takeoff candidate years
    double post_window = 100.0;      // years after a candidate to examine
    bool refine = false;
    bool all_regions = false;
    std::optional<double> grid_step;  // extra evaluation grid for report tables
    double convert_scale = 1.0;
    std::string format = "json";  // json | csv
    std::string output_path;      // empty = stdout
    std::string regions_config_path;

    void validate() const {
        if (window && !window->valid()) throw ValueError("window must satisfy lo <= hi");
        if (!(diagnostics.divergence_threshold > 0.0)) throw ValueError("threshold must be positive");
        if (diagnostics.persistence < 1) throw ValueError("persistence must be at least 1");
        if (!(bridge_width > 0.0)) throw ValueError("bridge width must be positive");
        if (bridge_degree != 1 && bridge_degree != 3) throw ValueError("bridge degree must be 1 or 3");
        if (format != "json" && format != "csv") throw ValueError("format must be json or csv");
    }
};

// --- report bundle --------------------------------------------------------------

struct PerYearRow {
    double year = 0.0;
    std::optional<double> observed;
    std::optional<double> fitted;
    std::optional<double> rel_residual;
    std::string segment = "segment1";
};

struct SegmentSummary {
    std::string label = "segment1";
    YearInterval window{0, 0};
    std::optional<double> a, k, singularity;         // single fitted series
    std::optional<double> a1, k1, a2, k2;            // ratio components (1 = gdp, 2 = pop)
    std::optional<double> gdp_singularity, pop_singularity;
    std::optional<std::string> monotonicity;
    std::optional<double> r_squared_reciprocal;      // single series / gdp side
    std::optional<double> pop_r_squared_reciprocal;  // population side
};

struct ReportBundle {
    std::string command;
    std::string region;
    std::string kind;
    std::vector<SegmentSummary> segments;
    std::optional<double> breakpoint;      // single-series piecewise fit
    std::optional<double> gdp_breakpoint;  // ratio piecewise
    std::optional<double> pop_breakpoint;
    std::optional<Diagnosis> diagnosis;
    std::vector<PerYearRow> table;
};

namespace detail {

inline json to_json(const StagnationVerdict& v) {
    json j;
    j["verdict"] = v.present() ? "present" : "absent";
    j["n_points"] = v.n_points;
    j["power"] = v.power == EvidencePower::Low
                     ? "low"
                     : (v.power == EvidencePower::Moderate ? "moderate" : "high");
    j["trend_hyperbolic"] = v.trend_hyperbolic;
    j["trend_flatness"] = v.trend_flatness;
    j["non_monotone"] = v.non_monotone;
    j["sign_runs"] = v.sign_runs;
    j["n_signs"] = v.n_signs;
    j["runs_p_proxy"] = v.runs_p_proxy;
    return j;
}

inline json to_json(const Diagnosis& d) {
    json j;
    j["reciprocal_r2"] = d.reciprocal_r2;
    j["stagnation"] = to_json(d.stagnation);
    j["takeoffs"] = json::array();
    for (const auto& t : d.takeoffs) {
        json tj;
        tj["candidate"] = t.candidate;
        tj["verdict"] = t.detected() ? "detected" : "not_detected";
        if (t.year) tj["year"] = *t.year;
        tj["pre_stagnation"] = to_json(t.pre_stagnation);
        j["takeoffs"].push_back(std::move(tj));
    }
    if (d.divergence) {
        j["divergence"] = {{"year", d.divergence->year},
                           {"direction", to_string(d.divergence->direction)}};
    } else {
        j["divergence"] = nullptr;
    }
    return j;
}

inline std::string sci4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

}  // namespace detail

inline json to_json(const ReportBundle& b) {
    json j;
    j["command"] = b.command;
    j["region"] = b.region;
    j["kind"] = b.kind;
    j["segments"] = json::array();
    for (const auto& s : b.segments) {
        json sj;
        sj["label"] = s.label;
        sj["window"] = {s.window.lo, s.window.hi};
        if (s.a) sj["a"] = *s.a;
        if (s.k) sj["k"] = *s.k;
        if (s.singularity) sj["singularity"] = *s.singularity;
        if (s.a1) sj["a1"] = *s.a1;
        if (s.k1) sj["k1"] = *s.k1;
        if (s.a2) sj["a2"] = *s.a2;
        if (s.k2) sj["k2"] = *s.k2;
        if (s.gdp_singularity) sj["gdp_singularity"] = *s.gdp_singularity;
        if (s.pop_singularity) sj["pop_singularity"] = *s.pop_singularity;
        if (s.monotonicity) sj["monotonicity"] = *s.monotonicity;
        if (s.r_squared_reciprocal) sj["r_squared_reciprocal"] = *s.r_squared_reciprocal;
        if (s.pop_r_squared_reciprocal)
            sj["pop_r_squared_reciprocal"] = *s.pop_r_squared_reciprocal;
        j["segments"].push_back(std::move(sj));
    }
    if (b.breakpoint) j["breakpoint"] = *b.breakpoint;
    if (b.gdp_breakpoint) j["gdp_breakpoint"] = *b.gdp_breakpoint;
    if (b.pop_breakpoint) j["pop_breakpoint"] = *b.pop_breakpoint;
    if (b.diagnosis) j["diagnosis"] = detail::to_json(*b.diagnosis);
    j["table"] = json::array();
    for (const auto& r : b.table) {
        json rj;
        rj["year"] = r.year;
        rj["observed"] = r.observed ? json(*r.observed) : json(nullptr);
        rj["fitted"] = r.fitted ? json(*r.fitted) : json(nullptr);
        rj["rel_residual"] = r.rel_residual ? json(*r.rel_residual) : json(nullptr);
        rj["segment"] = r.segment;
        j["table"].push_back(std::move(rj));
    }
    return j;
}

inline std::string table_csv(const ReportBundle& b) {
    std::ostringstream out;
    out << "year,observed,fitted,rel_residual,segment\n";
    for (const auto& r : b.table) {
        out << detail::format_double(r.year) << ',';
        if (r.observed) out << detail::format_double(*r.observed);
        out << ',';
        if (r.fitted) out << detail::format_double(*r.fitted);
        out << ',';
        if (r.rel_residual) out << detail::format_double(*r.rel_residual);
        out << ',' << r.segment << '\n';
    }
    return out.str();
}

/// Summary rows in the layout of the reference parameter table:
/// region, a1, k1, a2, k2, stagnation, takeoff (4 significant digits,
/// booleans spelled out; multi-segment regions emit one row per segment).
inline std::string summary_csv(const std::vector<ReportBundle>& bundles) {
    std::ostringstream out;
    out << "region,segment,a1,k1,a2,k2,gdp_singularity,pop_singularity,monotonicity,stagnation,"
           "takeoff\n";
    for (const auto& b : bundles) {
        const bool stag = b.diagnosis && b.diagnosis->stagnation.present();
        const bool take = b.diagnosis && b.diagnosis->any_takeoff();
        for (const auto& s : b.segments) {
            out << b.region << ',' << s.label << ',';
            if (s.a1) out << detail::sci4(*s.a1);
            out << ',';
            if (s.k1) out << detail::sci4(*s.k1);
            out << ',';
            if (s.a2) out << detail::sci4(*s.a2);
            out << ',';
            if (s.k2) out << detail::sci4(*s.k2);
            out << ',';
            if (s.gdp_singularity) out << detail::sci4(*s.gdp_singularity);
            out << ',';
            if (s.pop_singularity) out << detail::sci4(*s.pop_singularity);
            out << ',';
            if (s.monotonicity) out << *s.monotonicity;
            out << ',' << (stag ? "true" : "false") << ',' << (take ? "true" : "false") << '\n';
        }
    }
    return out.str();
}

// --- dataset access --------------------------------------------------------------

/// All series from a tidy CSV, indexed by (region, kind).
class Dataset {
  public:
    static Dataset from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open input " + path);
        return Dataset(parse_series_csv(in));
    }

    explicit Dataset(std::vector<GrowthSeries> series) : series_(std::move(series)) {}

    void merge(std::vector<GrowthSeries> more) {
        for (auto& s : more) series_.push_back(std::move(s));
    }

    const GrowthSeries& get(const std::string& region, SeriesKind kind) const {
        for (const auto& s : series_)
            if (s.region() == region && s.kind() == kind) return s;
        throw ValueError("no " + to_string(kind) + " series for region '" + region + "'");
    }

    bool has(const std::string& region, SeriesKind kind) const {
        for (const auto& s : series_)
            if (s.region() == region && s.kind() == kind) return true;
        return false;
    }

    std::vector<std::string> regions() const {
        std::set<std::string> names;
        for (const auto& s : series_) names.insert(s.region());
        return {names.begin(), names.end()};
    }

  private:
    std::vector<GrowthSeries> series_;
};

// --- command implementations -------------------------------------------------------

namespace detail {

inline YearInterval default_window(const GrowthSeries& series, const std::optional<YearInterval>& req) {
    if (req) return *req;
    const auto span = series.span();
    return {span.lo, std::min(span.hi, 1950.0)};
}

inline SegmentSummary summarize_hyperbolic(const FitReport& fit, const std::string& label) {
    SegmentSummary s;
    s.label = label;
    s.window = fit.model.window();
    s.a = fit.model.a();
    s.k = fit.model.k();
    if (fit.model.has_singularity()) s.singularity = fit.model.singularity_time();
    s.r_squared_reciprocal = fit.r_squared_reciprocal;
    return s;
}

inline SegmentSummary summarize_ratio(const RatioModel& model, const FitReport& gdp_fit,
                                      const FitReport& pop_fit, const std::string& label) {
    SegmentSummary s;
    s.label = label;
    s.window = model.window();
    s.a1 = model.gdp().a();
    s.k1 = model.gdp().k();
    s.a2 = model.pop().a();
    s.k2 = model.pop().k();
    if (model.gdp().has_singularity()) s.gdp_singularity = model.gdp().singularity_time();
    if (model.pop().has_singularity()) s.pop_singularity = model.pop().singularity_time();
    s.monotonicity = to_string(model.classify());
    s.r_squared_reciprocal = gdp_fit.r_squared_reciprocal;
    s.pop_r_squared_reciprocal = pop_fit.r_squared_reciprocal;
    return s;
}

/// Fitted per-year rows over the observation years (plus an optional
/// even grid) inside the window. `unscale` maps model output back to
/// the series' storage units.
template <typename Eval, typename Label>
inline std::vector<PerYearRow> per_year_table(const GrowthSeries& observed,
                                              const YearInterval& window, Eval&& eval,
                                              Label&& label, double unscale,
                                              std::optional<double> grid_step) {
    std::map<double, std::optional<double>> years;
    for (const auto& p : observed.points())
        if (window.contains(p.year)) years[p.year] = p.value;
    if (grid_step && *grid_step > 0.0)
        for (double t = window.lo; t <= window.hi + 1e-9; t += *grid_step)
            years.emplace(t, std::nullopt);
    std::vector<PerYearRow> rows;
    for (const auto& [year, obs] : years) {
        PerYearRow row;
        row.year = year;
        row.observed = obs;
        row.segment = label(year);
        try {
            const double fitted = eval(year) * unscale;
            row.fitted = fitted;
            if (obs) row.rel_residual = (*obs - fitted) / fitted;
        } catch (const SingularityReached&) {
            // row stays value-less past a singularity
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

struct RatioPieces {
    PiecewiseTrajectory trajectory;
    std::vector<SegmentSummary> segments;
    std::optional<double> gdp_breakpoint, pop_breakpoint;
    SegmentModel divergence_reference;  // final ratio segment
};

/// Ratio trajectory for a region: one ratio model from per-component
/// windows, or a two-segment piecewise ratio when the region's GDP and
/// population each carry a regime change. The per-capita transient is
/// bridged between the two component breakpoints.
inline RatioPieces build_ratio_trajectory(const GrowthSeries& gdp_raw, const GrowthSeries& pop_raw,
                                          const RegionAnalysis& ra,
                                          const std::optional<YearInterval>& requested_window) {
    const GrowthSeries gdp = gdp_raw.scaled(table_unit_scale(gdp_raw.kind()));
    const GrowthSeries pop = pop_raw.scaled(table_unit_scale(pop_raw.kind()));

    if (!ra.piecewise) {
        const auto gdp_win = requested_window ? *requested_window
                                              : default_window(gdp, ra.gdp_window);
        const auto pop_win = requested_window ? *requested_window
                                              : default_window(pop, ra.pop_window);
        auto fit = fit_ratio(gdp, pop, gdp_win, pop_win);
        RatioModel model = fit.model;
        PiecewiseTrajectory traj({SegmentModel(model)}, {});
        return {std::move(traj),
                {summarize_ratio(model, fit.gdp_report, fit.pop_report, "segment1")},
                std::nullopt,
                std::nullopt,
                SegmentModel(model)};
    }

    const auto gdp_search = ra.gdp_search_window ? *ra.gdp_search_window
                                                 : default_window(gdp, requested_window);
    const auto pop_search = ra.pop_search_window ? *ra.pop_search_window
                                                 : default_window(pop, requested_window);
    const auto gdp_fit =
        fit_piecewise(gdp, gdp_search, ra.gdp_breakpoint, ra.bridge_width, ra.bridge_degree);
    const auto pop_fit =
        fit_piecewise(pop, pop_search, ra.pop_breakpoint, ra.bridge_width, ra.bridge_degree);

    // Per-capita transient spans the two component breakpoints (or the
    // wider bridge when they coincide).
    const double b_lo = std::min(gdp_fit.breakpoint, pop_fit.breakpoint);
    const double b_hi = std::max(gdp_fit.breakpoint, pop_fit.breakpoint);
    YearInterval transient{b_lo, b_hi};
    if (transient.width() <= 0.0)
        transient = {b_lo - ra.bridge_width / 2.0, b_hi + ra.bridge_width / 2.0};

    RatioModel seg1(HyperbolicModel(gdp_fit.left.model.a(), gdp_fit.left.model.k(),
                                    {gdp_fit.left.model.window().lo, transient.lo}),
                    HyperbolicModel(pop_fit.left.model.a(), pop_fit.left.model.k(),
                                    {pop_fit.left.model.window().lo, transient.lo}));
    RatioModel seg2(HyperbolicModel(gdp_fit.right.model.a(), gdp_fit.right.model.k(),
                                    {transient.hi, gdp_fit.right.model.window().hi}),
                    HyperbolicModel(pop_fit.right.model.a(), pop_fit.right.model.k(),
                                    {transient.hi, pop_fit.right.model.window().hi}));
    auto bridge_poly = interpolate_transition(SegmentModel(seg1), SegmentModel(seg2), transient,
                                              ra.bridge_degree);
    PiecewiseTrajectory traj({SegmentModel(seg1), SegmentModel(seg2)},
                             {Bridge{transient, std::move(bridge_poly)}});
    auto s1 = summarize_ratio(seg1, gdp_fit.left, pop_fit.left, "segment1");
    auto s2 = summarize_ratio(seg2, gdp_fit.right, pop_fit.right, "segment2");
    return {std::move(traj), {std::move(s1), std::move(s2)}, gdp_fit.breakpoint,
            pop_fit.breakpoint, SegmentModel(seg2)};
}

}  // namespace detail

/// Fit one series (single hyperbola or two-segment piecewise) and
/// assemble the bundle. Parameters are reported in per-billion units
/// for million-based series.
inline ReportBundle cmd_fit(const RunConfig& config, const Dataset& data,
                            const RegionAnalysisMap& analyses = {}) {
    const auto& raw = data.get(config.region, config.kind);
    const double scale = table_unit_scale(config.kind);
    const GrowthSeries series = raw.scaled(scale);

    RegionAnalysis ra;
    if (auto it = analyses.find(config.region); it != analyses.end()) ra = it->second;

    ReportBundle bundle;
    bundle.command = "fit";
    bundle.region = config.region;
    bundle.kind = to_string(config.kind);

    const bool piecewise = config.breakpoint_auto || config.breakpoint.has_value() ||
                           (ra.piecewise && !config.window);
    if (piecewise) {
        YearInterval search = config.window ? *config.window
                                            : detail::default_window(series,
                                                                     config.kind == SeriesKind::Population
                                                                         ? ra.pop_search_window
                                                                         : ra.gdp_search_window);
        std::optional<double> breakpoint = config.breakpoint;
        if (!config.breakpoint_auto && !breakpoint && ra.piecewise)
            breakpoint = config.kind == SeriesKind::Population ? ra.pop_breakpoint
                                                               : ra.gdp_breakpoint;
        const auto fit = fit_piecewise(series, search, breakpoint, config.bridge_width,
                                       config.bridge_degree);
        bundle.breakpoint = fit.breakpoint;
        bundle.segments = {detail::summarize_hyperbolic(fit.left, "segment1"),
                           detail::summarize_hyperbolic(fit.right, "segment2")};
        const auto& traj = fit.trajectory;
        bundle.table = detail::per_year_table(
            raw, search, [&](double t) { return traj.value(t); },
            [&](double t) { return traj.segment_label(t); }, 1.0 / scale, config.grid_step);
    } else {
        const YearInterval window =
            config.window ? *config.window
                          : detail::default_window(series, config.kind == SeriesKind::Population
                                                               ? ra.pop_window
                                                               : ra.gdp_window);
        FitReport fit = fit_hyperbolic(series, window);
        if (config.refine) fit = refine_fit(fit, series);
        bundle.segments = {detail::summarize_hyperbolic(fit, "segment1")};
        const auto& model = fit.model;
        bundle.table = detail::per_year_table(
            raw, window, [&](double t) { return model.value(t); },
            [](double) { return std::string("segment1"); }, 1.0 / scale, config.grid_step);
    }
    return bundle;
}

/// Ratio bundle: component fits, monotonicity class, singularities and
/// the per-year income-per-capita table.
inline ReportBundle cmd_ratio_one(const RunConfig& config, const Dataset& data,
                                  const RegionAnalysisMap& analyses, const std::string& region) {
    const auto& gdp_raw = data.get(region, SeriesKind::Gdp);
    const auto& pop_raw = data.get(region, SeriesKind::Population);

    RegionAnalysis ra;
    if (auto it = analyses.find(region); it != analyses.end()) ra = it->second;

    auto pieces = detail::build_ratio_trajectory(gdp_raw, pop_raw, ra, config.window);

    ReportBundle bundle;
    bundle.command = "ratio";
    bundle.region = region;
    bundle.kind = "gdp_per_capita";
    bundle.segments = std::move(pieces.segments);
    bundle.gdp_breakpoint = pieces.gdp_breakpoint;
    bundle.pop_breakpoint = pieces.pop_breakpoint;

    const auto per_capita = derive_per_capita(gdp_raw, pop_raw);
    const auto span = per_capita.span();
    const auto& traj = pieces.trajectory;
    bundle.table = detail::per_year_table(
        per_capita, span, [&](double t) { return traj.value(t); },
        [&](double t) { return traj.segment_label(t); }, 1.0, config.grid_step);
    return bundle;
}

/// Diagnostic battery over a region's income-per-capita series:
/// reciprocal linearity and stagnation on the pre-1900 window, takeoffs
/// at the candidate years, divergence against the fitted trajectory.
inline ReportBundle cmd_diagnose_one(const RunConfig& config, const Dataset& data,
                                     const RegionAnalysisMap& analyses,
                                     const std::string& region) {
    RegionAnalysis ra;
    if (auto it = analyses.find(region); it != analyses.end()) ra = it->second;

    std::optional<GrowthSeries> per_capita;
    std::optional<detail::RatioPieces> pieces;
    if (data.has(region, SeriesKind::Gdp) && data.has(region, SeriesKind::Population)) {
        const auto& gdp_raw = data.get(region, SeriesKind::Gdp);
        const auto& pop_raw = data.get(region, SeriesKind::Population);
        per_capita = derive_per_capita(gdp_raw, pop_raw);
        pieces = detail::build_ratio_trajectory(gdp_raw, pop_raw, ra, config.window);
    } else {
        per_capita = data.get(region, SeriesKind::GdpPerCapita);
    }

    const auto span = per_capita->span();
    const YearInterval study = config.window
                                   ? *config.window
                                   : YearInterval{span.lo, std::min(span.hi, 1900.0)};

    Diagnosis diag;
    diag.reciprocal_r2 = reciprocal_linearity(*per_capita, study);
    diag.stagnation = stagnation_test(*per_capita, study, config.diagnostics);

    std::vector<double> candidates = config.candidates;
    if (candidates.empty()) candidates = {1750.0, 1900.0};
    for (double candidate : candidates) {
        if (candidate <= span.lo || candidate >= span.hi) continue;
        diag.takeoffs.push_back(takeoff_test(*per_capita, candidate, candidate - span.lo,
                                             config.post_window, config.diagnostics));
    }

    std::optional<SegmentModel> reference;
    if (pieces) {
        reference = pieces->divergence_reference;
    } else {
        // direct per-capita input: the trajectory is its own trend fit
        try {
            reference = SegmentModel(fit_hyperbolic(*per_capita, study).model);
        } catch (const NonHyperbolic&) {
        }
    }
    if (reference) diag.divergence = detect_divergence(*per_capita, *reference, config.diagnostics);

    ReportBundle bundle;
    bundle.command = "diagnose";
    bundle.region = region;
    bundle.kind = "gdp_per_capita";
    if (pieces) {
        bundle.segments = std::move(pieces->segments);
        bundle.gdp_breakpoint = pieces->gdp_breakpoint;
        bundle.pop_breakpoint = pieces->pop_breakpoint;
    }
    bundle.diagnosis = std::move(diag);
    return bundle;
}

inline std::vector<ReportBundle> cmd_ratio(const RunConfig& config, const Dataset& data,
                                           const RegionAnalysisMap& analyses = {}) {
    std::vector<ReportBundle> out;
    if (config.all_regions) {
        for (const auto& region : data.regions()) {
            if (!data.has(region, SeriesKind::Gdp) || !data.has(region, SeriesKind::Population))
                continue;
            auto bundle = cmd_ratio_one(config, data, analyses, region);
            auto diag = cmd_diagnose_one(config, data, analyses, region);
            bundle.diagnosis = std::move(diag.diagnosis);
            out.push_back(std::move(bundle));
        }
        if (out.empty()) throw ValueError("no region has both gdp and population series");
        return out;
    }
    out.push_back(cmd_ratio_one(config, data, analyses, config.region));
    return out;
}

inline std::vector<ReportBundle> cmd_diagnose(const RunConfig& config, const Dataset& data,
                                              const RegionAnalysisMap& analyses = {}) {
    std::vector<ReportBundle> out;
    if (config.all_regions) {
        for (const auto& region : data.regions()) {
            if (!data.has(region, SeriesKind::Gdp) || !data.has(region, SeriesKind::Population))
                continue;
            out.push_back(cmd_diagnose_one(config, data, analyses, region));
        }
        if (out.empty()) throw ValueError("no region has both gdp and population series");
        return out;
    }
    out.push_back(cmd_diagnose_one(config, data, analyses, config.region));
    return out;
}

// --- output ---------------------------------------------------------------------

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output " + path);
    out << content;
    if (!out) throw IoError("write failed for " + path);
}

/// Report command: per-year CSV plus a JSON summary with identical
/// content, both byte-deterministic for fixed inputs.
inline void cmd_report(const RunConfig& config, const Dataset& data,
                       const RegionAnalysisMap& analyses, const std::string& base_path) {
    ReportBundle bundle;
    if (data.has(config.region, SeriesKind::Gdp) && data.has(config.region, SeriesKind::Population) &&
        config.kind == SeriesKind::GdpPerCapita) {
        bundle = cmd_ratio(config, data, analyses).front();
    } else {
        bundle = cmd_fit(config, data, analyses);
    }
    bundle.command = "report";
    write_text_file(base_path + ".csv", table_csv(bundle));
    write_text_file(base_path + ".json", to_json(bundle).dump(2) + "\n");
}

inline std::string render(const std::vector<ReportBundle>& bundles, const std::string& format) {
    if (format == "csv") {
        if (bundles.size() == 1 && !bundles.front().table.empty() && !bundles.front().diagnosis)
            return table_csv(bundles.front());
        return summary_csv(bundles);
    }
    if (bundles.size() == 1) return to_json(bundles.front()).dump(2) + "\n";
    json arr = json::array();
    for (const auto& b : bundles) arr.push_back(to_json(b));
    return arr.dump(2) + "\n";
}

}  // namespace hypergrowth
