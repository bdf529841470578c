#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypergrowth/errors.hpp"
#include "hypergrowth/model.hpp"
#include "hypergrowth/types.hpp"

namespace hypergrowth {

/// Result of fitting one hyperbolic segment. Residuals are relative and
/// live in value space: (observed - fitted) / fitted, one per
/// observation used, in year order. r_squared_reciprocal scores the
/// straight-line fit on the reciprocal data and is reported truthfully
/// (it can be negative on pathological input).
struct FitReport {
    HyperbolicModel model;
    double r_squared_reciprocal = 0.0;
    std::vector<double> residuals;
    std::size_t n_points = 0;

    double sum_sq_rel_residuals() const noexcept {
        double s = 0.0;
        for (double r : residuals) s += r * r;
        return s;
    }
};

/// Local-search polish failed to produce a valid improvement; `best`
/// holds the best iterate seen (the starting report when nothing beat it).
class DidNotConverge : public Error {
  public:
    DidNotConverge(const std::string& msg, FitReport best_so_far)
        : Error(msg), best(std::move(best_so_far)) {}
    FitReport best;
};

namespace detail {

struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

/// Least squares of y against x with centered accumulation. Serial and
/// order-fixed, so identical inputs give bit-identical results.
inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InsufficientData("all observations share one year");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += e * e;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return fit;
}

inline std::vector<double> relative_residuals(const HyperbolicModel& m,
                                              const std::vector<Observation>& pts) {
    std::vector<double> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        const double fitted = m.value(p.year);
        out.push_back((p.value - fitted) / fitted);
    }
    return out;
}

}  // namespace detail

/// Reciprocal-transform fit of Eq.-of-motion 1/(a - k t): ordinary
/// least squares of 1/value against year. The estimated line has
/// intercept a and slope -k; data whose reciprocal slope is >= 0 (decay
/// or flat) are rejected as NonHyperbolic.
inline FitReport fit_hyperbolic_points(const std::vector<Observation>& pts,
                                       const YearInterval& window) {
    std::vector<Observation> used;
    for (const auto& p : pts)
        if (window.contains(p.year)) used.push_back(p);
    if (used.size() < 3)
        throw InsufficientData("need at least 3 points in window, have " +
                               std::to_string(used.size()));
    std::vector<double> t, recip;
    t.reserve(used.size());
    recip.reserve(used.size());
    for (const auto& p : used) {
        if (!(p.value > 0.0))
            throw NonPositiveValue("reciprocal undefined for value " + std::to_string(p.value) +
                                   " at year " + std::to_string(p.year));
        t.push_back(p.year);
        recip.push_back(1.0 / p.value);
    }
    const auto line = detail::least_squares_line(t, recip);
    const double a = line.intercept;
    const double k = -line.slope;
    if (!(k > 0.0) || !(a > 0.0))
        throw NonHyperbolic("reciprocal regression gave a=" + std::to_string(a) +
                            ", k=" + std::to_string(k));
    const YearInterval fitted_window{used.front().year, used.back().year};
    if (a / k <= fitted_window.hi)
        throw NonHyperbolic("implied singularity " + std::to_string(a / k) +
                            " precedes the last observation");
    FitReport report{HyperbolicModel(a, k, fitted_window), line.r_squared, {}, used.size()};
    report.residuals = detail::relative_residuals(report.model, used);
    return report;
}

inline FitReport fit_hyperbolic(const GrowthSeries& series, const YearInterval& window) {
    return fit_hyperbolic_points(series.points(), window);
}

/// Polish a fit by minimising the sum of squared relative residuals in
/// value space. With S = 1/(a - k t) the relative residual is
/// y*(a - k t) - 1, linear in (a, k), so each Gauss-Newton step solves
/// the problem exactly; the loop exists only as a guard.
inline FitReport refine_fit(const FitReport& start, const GrowthSeries& series) {
    std::vector<Observation> used;
    for (const auto& p : series.points())
        if (start.model.window().contains(p.year)) used.push_back(p);
    if (used.size() != start.n_points)
        throw ValueError("refine_fit: series does not match the report's fit window");

    double tbar = 0.0;
    for (const auto& p : used) tbar += p.year;
    tbar /= static_cast<double>(used.size());

    FitReport best = start;
    double best_obj = start.sum_sq_rel_residuals();
    constexpr int max_iter = 50;
    for (int iter = 0; iter < max_iter; ++iter) {
        // Normal equations for min over (a', k) of sum (y*(a' - k*(t-tbar)) - 1)^2.
        double suu = 0.0, suw = 0.0, sww = 0.0, su = 0.0, sw = 0.0;
        for (const auto& p : used) {
            const double u = p.value;
            const double w = p.value * (p.year - tbar);
            suu += u * u;
            suw += u * w;
            sww += w * w;
            su += u;
            sw += w;
        }
        const double det = suw * suw - suu * sww;
        if (det == 0.0) throw DidNotConverge("degenerate normal equations", best);
        const double a_centered = (suw * sw - su * sww) / det;
        const double k = (suu * sw - su * suw) / det;
        const double a = a_centered + k * tbar;

        if (!(a > 0.0) || k < 0.0 || (k > 0.0 && a / k <= start.model.window().hi))
            throw DidNotConverge("relative-residual optimum leaves the hyperbolic domain", best);

        HyperbolicModel refined(a, k, start.model.window());
        std::vector<double> t, recip;
        for (const auto& p : used) {
            t.push_back(p.year);
            recip.push_back(1.0 / p.value);
        }
        double ss_res = 0.0, ss_tot = 0.0, mean_r = 0.0;
        for (double r : recip) mean_r += r;
        mean_r /= static_cast<double>(recip.size());
        for (std::size_t i = 0; i < recip.size(); ++i) {
            const double e = recip[i] - refined.reciprocal(t[i]);
            ss_res += e * e;
            const double d = recip[i] - mean_r;
            ss_tot += d * d;
        }
        FitReport candidate{refined, ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0,
                            detail::relative_residuals(refined, used), used.size()};
        const double obj = candidate.sum_sq_rel_residuals();
        if (obj > best_obj) break;  // the exact step cannot improve further
        const bool converged = std::abs(obj - best_obj) <= 1e-15 * (1.0 + best_obj);
        best = std::move(candidate);
        best_obj = obj;
        if (converged) break;
    }
    return best;
}

/// Polynomial in the shifted coordinate u = t - origin, lowest degree
/// first. Shifting keeps bridge coefficients well conditioned for
/// intervals sitting around year two thousand.
struct Polynomial {
    double origin = 0.0;
    std::vector<double> coeffs;

    double value(double t) const noexcept {
        const double u = t - origin;
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * u + coeffs[i];
        return acc;
    }

    double derivative(double t) const noexcept {
        const double u = t - origin;
        double acc = 0.0;
        for (std::size_t i = coeffs.size(); i-- > 1;)
            acc = acc * u + coeffs[i] * static_cast<double>(i);
        return acc;
    }
};

/// Bridge covering the transient between two fitted segments: degree 1
/// matches endpoint values, degree 3 is the cubic Hermite matching the
/// adjacent models' values and first derivatives.
inline Polynomial interpolate_transition(const SegmentModel& left, const SegmentModel& right,
                                         const YearInterval& interval, int degree) {
    if (!interval.valid() || interval.width() <= 0.0)
        throw ValueError("bridge interval must have positive width");
    const double w = interval.width();
    const double v0 = model_value(left, interval.lo);
    const double v1 = model_value(right, interval.hi);
    Polynomial poly;
    poly.origin = interval.lo;
    if (degree == 1) {
        poly.coeffs = {v0, (v1 - v0) / w};
    } else if (degree == 3) {
        const double d0 = model_derivative(left, interval.lo);
        const double d1 = model_derivative(right, interval.hi);
        poly.coeffs = {v0, d0, 3.0 * (v1 - v0) / (w * w) - (2.0 * d0 + d1) / w,
                       2.0 * (v0 - v1) / (w * w * w) + (d0 + d1) / (w * w)};
    } else {
        throw ValueError("bridge degree must be 1 or 3");
    }
    return poly;
}

struct Bridge {
    YearInterval interval;
    Polynomial poly;
};

/// Ordered trajectory segments with polynomial bridges over the gaps.
/// Evaluation outside every window extrapolates the nearest segment;
/// window discipline is the caller's concern.
class PiecewiseTrajectory {
  public:
    PiecewiseTrajectory(std::vector<SegmentModel> segments, std::vector<Bridge> bridges)
        : segments_(std::move(segments)), bridges_(std::move(bridges)) {
        if (segments_.empty()) throw ValueError("trajectory needs at least one segment");
        for (std::size_t i = 1; i < segments_.size(); ++i)
            if (!(model_window(segments_[i - 1]).hi <= model_window(segments_[i]).lo))
                throw ValueError("segment windows must be ordered and disjoint");
        for (const auto& b : bridges_) {
            bool strictly_between = false;
            for (std::size_t i = 1; i < segments_.size(); ++i)
                if (b.interval.lo >= model_window(segments_[i - 1]).hi &&
                    b.interval.hi <= model_window(segments_[i]).lo)
                    strictly_between = true;
            if (!strictly_between)
                throw ValueError("bridge interval must lie between consecutive segments");
        }
    }

    const std::vector<SegmentModel>& segments() const noexcept { return segments_; }
    const std::vector<Bridge>& bridges() const noexcept { return bridges_; }

    struct Location {
        enum class Kind { Segment, Bridge } kind;
        std::size_t index;
    };

    Location locate(double t) const noexcept {
        for (std::size_t i = 0; i < bridges_.size(); ++i)
            if (t > bridges_[i].interval.lo && t < bridges_[i].interval.hi)
                return {Location::Kind::Bridge, i};
        for (std::size_t i = 0; i < segments_.size(); ++i)
            if (model_window(segments_[i]).contains(t)) return {Location::Kind::Segment, i};
        // outside all windows: nearest segment
        std::size_t nearest = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < segments_.size(); ++i) {
            const auto& win = model_window(segments_[i]);
            const double d = t < win.lo ? win.lo - t : (t > win.hi ? t - win.hi : 0.0);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        return {Location::Kind::Segment, nearest};
    }

    double value(double t) const {
        const auto loc = locate(t);
        if (loc.kind == Location::Kind::Bridge) return bridges_[loc.index].poly.value(t);
        return model_value(segments_[loc.index], t);
    }

    std::string segment_label(double t) const {
        const auto loc = locate(t);
        if (loc.kind == Location::Kind::Bridge) return "bridge";
        return "segment" + std::to_string(loc.index + 1);
    }

  private:
    std::vector<SegmentModel> segments_;
    std::vector<Bridge> bridges_;
};

struct PiecewiseFit {
    PiecewiseTrajectory trajectory;
    FitReport left;
    FitReport right;
    double breakpoint = 0.0;
};

namespace detail {

inline PiecewiseFit assemble_piecewise(const FitReport& left, const FitReport& right, double b,
                                       double bridge_width, int degree) {
    const YearInterval bridge_iv{b - bridge_width / 2.0, b + bridge_width / 2.0};
    // Re-window the fitted models so the segments meet the bridge ends.
    HyperbolicModel left_model(left.model.a(), left.model.k(),
                               {left.model.window().lo, bridge_iv.lo});
    HyperbolicModel right_model(right.model.a(), right.model.k(),
                                {bridge_iv.hi, right.model.window().hi});
    auto poly = interpolate_transition(left_model, right_model, bridge_iv, degree);
    PiecewiseTrajectory traj({SegmentModel(left_model), SegmentModel(right_model)},
                             {Bridge{bridge_iv, std::move(poly)}});
    return {std::move(traj), left, right, b};
}

}  // namespace detail

/// Two-segment fit with a bridged transition. With an explicit
/// breakpoint the two sides are fitted either side of the bridge; with
/// none (Auto) every observation year that leaves >= 3 points per side
/// is tried and the total sum of squared relative residuals decides,
/// ties going to the earliest year. Observations falling inside the
/// bridge gap are scored against the bridge polynomial, so a candidate
/// cannot win by dropping awkward transition-era points. The scan is a
/// strict comparison in ascending year order, so the winner does not
/// depend on evaluation order.
inline PiecewiseFit fit_piecewise(const GrowthSeries& series, const YearInterval& window,
                                  std::optional<double> breakpoint, double bridge_width = 20.0,
                                  int bridge_degree = 3) {
    if (!(bridge_width > 0.0)) throw ValueError("bridge width must be positive");
    const auto pts = series.slice(window);
    if (pts.size() < 6)
        throw InsufficientData("piecewise fit needs at least 6 points, have " +
                               std::to_string(pts.size()));
    const double half = bridge_width / 2.0;

    auto try_split = [&](double b) -> PiecewiseFit {
        const YearInterval left_iv{window.lo, b - half};
        const YearInterval right_iv{b + half, window.hi};
        return detail::assemble_piecewise(fit_hyperbolic_points(pts, left_iv),
                                          fit_hyperbolic_points(pts, right_iv), b, bridge_width,
                                          bridge_degree);
    };
    auto objective = [&](const PiecewiseFit& fit) {
        double obj = fit.left.sum_sq_rel_residuals() + fit.right.sum_sq_rel_residuals();
        const auto& gap = fit.trajectory.bridges().front().interval;
        for (const auto& p : pts) {
            if (p.year > gap.lo && p.year < gap.hi) {
                const double fitted = fit.trajectory.value(p.year);
                const double r = (p.value - fitted) / fitted;
                obj += r * r;
            }
        }
        return obj;
    };

    if (breakpoint) return try_split(*breakpoint);

    std::optional<PiecewiseFit> best;
    double best_obj = std::numeric_limits<double>::infinity();
    std::string last_failure = "no candidate breakpoint leaves 3 points per side";
    for (const auto& p : pts) {
        try {
            auto fit = try_split(p.year);
            const double obj = objective(fit);
            if (obj < best_obj) {
                best_obj = obj;
                best = std::move(fit);
            }
        } catch (const Error& e) {
            last_failure = e.what();
        }
    }
    if (!best) throw NonHyperbolic("auto breakpoint search found no valid split: " + last_failure);
    return std::move(*best);
}

/// Ratio fit per the reference construction: the income-per-capita
/// curve is never fitted directly, each component is fitted on its own
/// and the curve is their ratio. Ratio residuals are taken against the
/// observed per-capita series when one is supplied, else against
/// gdp/pop pointwise at the common years.
struct RatioFit {
    RatioModel model;
    FitReport gdp_report;
    FitReport pop_report;
    std::vector<double> ratio_residuals;
    std::vector<double> ratio_years;
    double ratio_r_squared = 0.0;
};

inline RatioFit fit_ratio(const GrowthSeries& gdp, const GrowthSeries& pop,
                          const YearInterval& gdp_window, const YearInterval& pop_window,
                          const GrowthSeries* observed_per_capita = nullptr) {
    FitReport gdp_fit = fit_hyperbolic(gdp, gdp_window);
    FitReport pop_fit = fit_hyperbolic(pop, pop_window);
    RatioModel model(gdp_fit.model, pop_fit.model);

    std::vector<Observation> target;
    if (observed_per_capita) {
        target = observed_per_capita->points();
    } else {
        // pointwise gdp/pop at common years
        std::size_t j = 0;
        for (const auto& g : gdp.points()) {
            while (j < pop.size() && pop.points()[j].year < g.year) ++j;
            if (j < pop.size() && pop.points()[j].year == g.year)
                target.push_back({g.year, g.value / pop.points()[j].value});
        }
    }

    RatioFit out{std::move(model), std::move(gdp_fit), std::move(pop_fit), {}, {}, 0.0};
    const YearInterval win = out.model.window();
    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    std::vector<double> obs;
    for (const auto& p : target) {
        if (!win.contains(p.year)) continue;
        const double fitted = out.model.value(p.year);
        out.ratio_residuals.push_back((p.value - fitted) / fitted);
        out.ratio_years.push_back(p.year);
        obs.push_back(p.value);
    }
    for (double v : obs) mean += v;
    if (!obs.empty()) mean /= static_cast<double>(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        const double fitted = obs[i] / (1.0 + out.ratio_residuals[i]);
        ss_res += (obs[i] - fitted) * (obs[i] - fitted);
        ss_tot += (obs[i] - mean) * (obs[i] - mean);
    }
    out.ratio_r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

inline RatioFit fit_ratio(const GrowthSeries& gdp, const GrowthSeries& pop,
                          const YearInterval& window,
                          const GrowthSeries* observed_per_capita = nullptr) {
    return fit_ratio(gdp, pop, window, window, observed_per_capita);
}

}  // namespace hypergrowth
