#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hypergrowth/errors.hpp"
#include "hypergrowth/fitting.hpp"
#include "hypergrowth/model.hpp"
#include "hypergrowth/types.hpp"

namespace hypergrowth {

struct DiagnosticOptions {
    double divergence_threshold = 0.10;  // relative deviation that counts
    int persistence = 3;                 // consecutive observations required
    double flatness_threshold = 0.05;    // |k|*span/a below this reads as flat
    int min_oscillation_points = 10;     // fewer residual signs cannot carry a verdict
};

/// Linearity score of the reciprocal data: R^2 of the best straight
/// line through (t, 1/value). Values near 1 support hyperbolic growth.
inline double reciprocal_linearity(const GrowthSeries& series, const YearInterval& window) {
    const auto pts = series.slice(window);
    if (pts.size() < 3)
        throw InsufficientData("linearity needs at least 3 points, have " +
                               std::to_string(pts.size()));
    std::vector<double> t, recip;
    for (const auto& p : pts) {
        if (!(p.value > 0.0)) throw NonPositiveValue("reciprocal undefined for non-positive value");
        t.push_back(p.year);
        recip.push_back(1.0 / p.value);
    }
    return detail::least_squares_line(t, recip).r_squared;
}

// --- sign-run machinery -----------------------------------------------------

struct RunsBand {
    int lo = 0;
    int hi = 0;
    bool contains(int runs) const noexcept { return runs >= lo && runs <= hi; }
};

namespace detail {

struct RunsNull {
    RunsBand band;
    std::vector<double> cdf;  // cdf[r] = P(R <= r), index 0 unused
};

inline RunsNull runs_null_from_counts(const std::vector<double>& weight, int n) {
    double total = 0.0;
    for (double w : weight) total += w;
    RunsNull out;
    out.cdf.assign(static_cast<std::size_t>(n) + 1, 0.0);
    double acc = 0.0;
    for (int r = 1; r <= n; ++r) {
        acc += weight[static_cast<std::size_t>(r)] / total;
        out.cdf[static_cast<std::size_t>(r)] = acc;
    }
    // central 90%: at most 5% of the null below the band and 5% above
    int lo = 1;
    for (int r = n; r >= 1; --r)
        if ((r >= 2 ? out.cdf[static_cast<std::size_t>(r - 1)] : 0.0) <= 0.05) {
            lo = r;
            break;
        }
    int hi = n;
    for (int r = 1; r <= n; ++r)
        if (out.cdf[static_cast<std::size_t>(r)] >= 0.95) {
            hi = r;
            break;
        }
    out.band = {lo, hi};
    return out;
}

/// Null distribution of the sign-run count for n independent fair
/// signs. Exact enumeration up to n = 20, fixed-seed simulation above.
inline const RunsNull& runs_null(int n) {
    static std::map<int, RunsNull> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> weight(static_cast<std::size_t>(n) + 1, 0.0);
    if (n <= 20) {
        const std::uint64_t total = std::uint64_t{1} << n;
        for (std::uint64_t seq = 0; seq < total; ++seq) {
            int runs = 1;
            for (int b = 1; b < n; ++b)
                if (((seq >> b) & 1u) != ((seq >> (b - 1)) & 1u)) ++runs;
            weight[static_cast<std::size_t>(runs)] += 1.0;
        }
    } else {
        constexpr int kSims = 100000;
        std::mt19937_64 rng(0x9e3779b97f4a7c15ull ^ static_cast<std::uint64_t>(n));
        for (int s = 0; s < kSims; ++s) {
            int runs = 1;
            bool prev = rng() & 1u;
            for (int i = 1; i < n; ++i) {
                const bool cur = rng() & 1u;
                if (cur != prev) ++runs;
                prev = cur;
            }
            weight[static_cast<std::size_t>(runs)] += 1.0;
        }
    }
    return cache.emplace(n, runs_null_from_counts(weight, n)).first->second;
}

inline int count_sign_runs(const std::vector<int>& signs) {
    int runs = signs.empty() ? 0 : 1;
    for (std::size_t i = 1; i < signs.size(); ++i)
        if (signs[i] != signs[i - 1]) ++runs;
    return runs;
}

}  // namespace detail

inline RunsBand runs_null_band(int n) { return detail::runs_null(n).band; }

// --- stagnation --------------------------------------------------------------

enum class StagnationLabel { Present, Absent };

/// How much data the oscillation check had to work with. Sparse windows
/// cannot support a stagnation claim, so Low power forces Absent.
enum class EvidencePower { Low, Moderate, High };

struct StagnationVerdict {
    StagnationLabel label = StagnationLabel::Absent;
    std::size_t n_points = 0;
    EvidencePower power = EvidencePower::Low;
    bool trend_hyperbolic = false;  // reciprocal regression produced a growing fit
    double trend_flatness = 0.0;    // |k| * span / a of the reciprocal line
    bool non_monotone = false;
    int sign_runs = 0;
    int n_signs = 0;
    double runs_p_proxy = 1.0;  // two-sided tail mass of the run count under the null
    RunsBand runs_band;

    bool present() const noexcept { return label == StagnationLabel::Present; }
};

/// Verdict on Malthusian stagnation over a window. Stagnation needs all
/// three signatures at once: a trendless (flat or non-hyperbolic) fit,
/// residual signs whose run count is consistent with random
/// fluctuation, and a non-monotone series. A monotone hyperbolic climb,
/// however slow, is growth; so is a smooth decline, which the ratio of
/// two hyperbolas produces on its own.
inline StagnationVerdict stagnation_test(const GrowthSeries& series, const YearInterval& window,
                                         const DiagnosticOptions& opts = {}) {
    const auto pts = series.slice(window);
    if (pts.size() < 5)
        throw InsufficientData("stagnation test needs at least 5 points, have " +
                               std::to_string(pts.size()));

    StagnationVerdict v;
    v.n_points = pts.size();
    v.power = pts.size() < 10 ? EvidencePower::Low
                              : (pts.size() < 20 ? EvidencePower::Moderate : EvidencePower::High);

    for (std::size_t i = 1; i < pts.size() && !v.non_monotone; ++i)
        if (!(pts[i].value > pts[i - 1].value)) v.non_monotone = true;

    // Trend in reciprocal space; a failed (decaying) fit counts as trendless.
    std::vector<double> residuals;
    bool trendless = false;
    try {
        const auto report = fit_hyperbolic_points(pts, window);
        v.trend_hyperbolic = true;
        const double span = pts.back().year - pts.front().year;
        v.trend_flatness = report.model.k() * span / report.model.a();
        trendless = v.trend_flatness < opts.flatness_threshold;
        residuals = report.residuals;
    } catch (const NonHyperbolic&) {
        trendless = true;
        std::vector<double> t, recip;
        for (const auto& p : pts) {
            t.push_back(p.year);
            recip.push_back(1.0 / p.value);
        }
        const auto line = detail::least_squares_line(t, recip);
        const double a_eff = std::abs(line.intercept + line.slope *
                                      (pts.front().year + pts.back().year) / 2.0);
        v.trend_flatness = a_eff > 0.0 ? std::abs(line.slope) *
                                             (pts.back().year - pts.front().year) / a_eff
                                       : 0.0;
        double mean = 0.0;
        for (const auto& p : pts) mean += p.value;
        mean /= static_cast<double>(pts.size());
        for (const auto& p : pts) residuals.push_back((p.value - mean) / mean);
    }

    std::vector<int> signs;
    for (double r : residuals)
        if (std::abs(r) > 1e-14) signs.push_back(r > 0.0 ? 1 : -1);
    v.n_signs = static_cast<int>(signs.size());
    v.sign_runs = detail::count_sign_runs(signs);
    bool oscillating = false;
    if (v.n_signs >= opts.min_oscillation_points) {
        const auto& null = detail::runs_null(v.n_signs);
        v.runs_band = null.band;
        const double below = v.sign_runs >= 1 ? null.cdf[static_cast<std::size_t>(v.sign_runs)] : 0.0;
        const double above = v.sign_runs >= 2 ? 1.0 - null.cdf[static_cast<std::size_t>(v.sign_runs - 1)]
                                              : 1.0;
        v.runs_p_proxy = std::min(1.0, 2.0 * std::min(below, above));
        oscillating = null.band.contains(v.sign_runs);
    }

    v.label = (trendless && oscillating && v.non_monotone) ? StagnationLabel::Present
                                                           : StagnationLabel::Absent;
    return v;
}

// --- takeoff ------------------------------------------------------------------

enum class TakeoffLabel { Detected, NotDetected };

struct TakeoffVerdict {
    TakeoffLabel label = TakeoffLabel::NotDetected;
    double candidate = 0.0;
    std::optional<double> year;  // set iff Detected
    StagnationVerdict pre_stagnation;
    std::size_t n_post = 0;

    bool detected() const noexcept { return label == TakeoffLabel::Detected; }
};

/// Sudden-takeoff check at a candidate year: only a persistent break
/// *above a previously stagnant level* qualifies. A transition from
/// growth to faster growth is not a takeoff and returns NotDetected.
inline TakeoffVerdict takeoff_test(const GrowthSeries& series, double candidate,
                                   double pre_window, double post_window,
                                   const DiagnosticOptions& opts = {}) {
    const YearInterval pre{candidate - pre_window, candidate};
    const YearInterval post{std::nextafter(candidate, std::numeric_limits<double>::infinity()),
                            candidate + post_window};
    const auto post_pts = series.slice(post);
    if (post_pts.empty())
        throw InsufficientData("no observations after candidate year " + std::to_string(candidate));

    TakeoffVerdict v;
    v.candidate = candidate;
    v.n_post = post_pts.size();
    v.pre_stagnation = stagnation_test(series, pre, opts);
    if (!v.pre_stagnation.present()) return v;

    // Extrapolate the pre-window trend: the fitted hyperbola when one
    // exists, otherwise the stagnant level itself.
    const auto pre_pts = series.slice(pre);
    std::optional<HyperbolicModel> trend;
    try {
        trend = fit_hyperbolic_points(pre_pts, pre).model;
    } catch (const NonHyperbolic&) {
    }
    double mean = 0.0;
    for (const auto& p : pre_pts) mean += p.value;
    mean /= static_cast<double>(pre_pts.size());

    bool all_above = true;
    for (const auto& p : post_pts) {
        double expected = mean;
        if (trend) {
            const double r = trend->reciprocal(p.year);
            if (r <= 0.0) {
                all_above = false;  // trend itself diverges; data cannot exceed it
                break;
            }
            expected = 1.0 / r;
        }
        if (!(p.value > expected * (1.0 + opts.divergence_threshold))) {
            all_above = false;
            break;
        }
    }
    if (all_above) {
        v.label = TakeoffLabel::Detected;
        v.year = candidate;
    }
    return v;
}

// --- divergence ----------------------------------------------------------------

enum class DivergenceDirection { Slower, Faster };

inline std::string to_string(DivergenceDirection d) {
    return d == DivergenceDirection::Slower ? "slower" : "faster";
}

struct Divergence {
    double year = 0.0;
    DivergenceDirection direction = DivergenceDirection::Slower;
};

/// Earliest year from which `persistence` consecutive observations
/// deviate from the model by more than the threshold, all on the same
/// side. The scan starts where the model's validity window starts (the
/// model describes its fitted era onward, not whatever regime preceded
/// it), and observations past the model's own singularity count as
/// below it. Returns nothing when the data stay on the trajectory.
inline std::optional<Divergence> detect_divergence(const GrowthSeries& series,
                                                   const SegmentModel& model,
                                                   const DiagnosticOptions& opts = {}) {
    std::vector<Observation> pts;
    for (const auto& p : series.points())
        if (p.year >= model_window(model).lo) pts.push_back(p);
    if (pts.size() < static_cast<std::size_t>(opts.persistence))
        throw InsufficientData("divergence needs at least " + std::to_string(opts.persistence) +
                               " observations");
    std::vector<double> dev;
    dev.reserve(pts.size());
    for (const auto& p : pts) {
        try {
            const double fitted = model_value(model, p.year);
            dev.push_back((p.value - fitted) / fitted);
        } catch (const SingularityReached&) {
            dev.push_back(-1.0);  // finite data under an infinite model
        }
    }
    const auto breaches = [&](double d) { return std::abs(d) > opts.divergence_threshold; };
    for (std::size_t i = 0; i + opts.persistence <= pts.size(); ++i) {
        if (!breaches(dev[i])) continue;
        const bool below = dev[i] < 0.0;
        bool run = true;
        for (int j = 1; j < opts.persistence; ++j) {
            const double d = dev[i + static_cast<std::size_t>(j)];
            if (!breaches(d) || (d < 0.0) != below) {
                run = false;
                break;
            }
        }
        if (run)
            return Divergence{pts[i].year,
                              below ? DivergenceDirection::Slower : DivergenceDirection::Faster};
    }
    return std::nullopt;
}

/// Everything the battery knows about one series.
struct Diagnosis {
    double reciprocal_r2 = 0.0;
    StagnationVerdict stagnation;
    std::vector<TakeoffVerdict> takeoffs;
    std::optional<Divergence> divergence;

    bool any_takeoff() const noexcept {
        return std::any_of(takeoffs.begin(), takeoffs.end(),
                           [](const TakeoffVerdict& t) { return t.detected(); });
    }
};

}  // namespace hypergrowth
