#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "hypergrowth/errors.hpp"
#include "hypergrowth/types.hpp"

namespace hypergrowth {

/// Hyperbolic growth law S(t) = 1/(a - k*t). Its reciprocal is the
/// straight line a - k*t, and for k > 0 the trajectory escapes to
/// infinity at the finite time t* = a/k.
///
/// Unit convention: when a series stores millions (persons or 1990
/// GK$), parameters fitted after the standard 1e-3 rescale are per
/// *billion*, which is the convention the reference parameter tables
/// follow. The model itself is unit-agnostic.
class HyperbolicModel {
  public:
    /// k = 0 is the degenerate constant case; k < 0 (decay) is rejected.
    /// For k > 0 the singularity a/k must lie beyond the validity window.
    HyperbolicModel(double a, double k, YearInterval window)
        : a_(a), k_(k), window_(window) {
        if (!(a > 0.0)) throw ValueError("hyperbolic model requires a > 0");
        if (k < 0.0) throw NonHyperbolic("hyperbolic model requires k >= 0 (decay unsupported)");
        if (!window.valid()) throw ValueError("model window is not well ordered");
        if (k > 0.0 && a / k <= window.hi)
            throw NonHyperbolic("singularity " + std::to_string(a / k) +
                                " falls inside validity window ending " +
                                std::to_string(window.hi));
    }

    double a() const noexcept { return a_; }
    double k() const noexcept { return k_; }
    const YearInterval& window() const noexcept { return window_; }

    /// The diagnostic line a - k*t. May be <= 0 past the singularity.
    double reciprocal(double t) const noexcept { return a_ - k_ * t; }

    double value(double t) const {
        const double r = reciprocal(t);
        if (r <= 0.0)
            throw SingularityReached("evaluation at t=" + std::to_string(t) +
                                     " is at or beyond the singularity");
        return 1.0 / r;
    }

    /// t* = a/k; only defined for k > 0.
    double singularity_time() const {
        if (k_ == 0.0) throw NoSingularity("constant model (k = 0) never diverges");
        return a_ / k_;
    }

    bool has_singularity() const noexcept { return k_ > 0.0; }

    /// Relative growth rate (1/S) dS/dt = k/(a - k*t) = k * S(t).
    double growth_rate(double t) const { return k_ * value(t); }

    /// dS/dt = k / (a - k*t)^2.
    double derivative(double t) const {
        const double s = value(t);
        return k_ * s * s;
    }

  private:
    double a_;
    double k_;
    YearInterval window_;
};

/// Monotonicity of a ratio of two hyperbolic trajectories, decided by
/// the sign of k1*a2 - k2*a1 (GDP singularity first: increasing; the
/// population singularity first: the ratio decays to zero).
enum class MonotonicityClass { IncreasingToInfinity, DecreasingToZero, Constant };

inline std::string to_string(MonotonicityClass c) {
    switch (c) {
        case MonotonicityClass::IncreasingToInfinity: return "increasing_to_infinity";
        case MonotonicityClass::DecreasingToZero: return "decreasing_to_zero";
        default: return "constant";
    }
}

/// GDP model paired with a population model; evaluates income per
/// capita as the ratio of the two hyperbolic distributions:
///   (a2 - k2*t) / (a1 - k1*t)
/// with (a1, k1) the GDP parameters and (a2, k2) the population ones.
class RatioModel {
  public:
    RatioModel(HyperbolicModel gdp, HyperbolicModel pop)
        : gdp_(std::move(gdp)), pop_(std::move(pop)),
          window_(gdp_.window().intersect(pop_.window())) {
        if (!window_.valid())
            throw ValueError("component windows do not overlap");
    }

    const HyperbolicModel& gdp() const noexcept { return gdp_; }
    const HyperbolicModel& pop() const noexcept { return pop_; }
    const YearInterval& window() const noexcept { return window_; }

    double value(double t) const {
        const double rg = gdp_.reciprocal(t);
        const double rp = pop_.reciprocal(t);
        if (rg <= 0.0 && rp <= 0.0)
            throw SingularityReached(first_singular(t) + " singularity reached first at t=" +
                                     std::to_string(t));
        if (rg <= 0.0) throw SingularityReached("gdp singularity reached at t=" + std::to_string(t));
        if (rp <= 0.0) throw SingularityReached("pop singularity reached at t=" + std::to_string(t));
        return rp / rg;
    }

    /// d/dt of the ratio: (k1*a2 - k2*a1) / (a1 - k1*t)^2. Its sign is
    /// constant wherever the ratio is defined.
    double derivative(double t) const {
        const double rg = gdp_.reciprocal(t);
        const double rp = pop_.reciprocal(t);
        if (rg <= 0.0 || rp <= 0.0)
            throw SingularityReached("derivative past a singularity at t=" + std::to_string(t));
        return discriminant() / (rg * rg);
    }

    /// k1*a2 - k2*a1; positive iff the GDP singularity comes first.
    double discriminant() const noexcept {
        return gdp_.k() * pop_.a() - pop_.k() * gdp_.a();
    }

    /// Exact equality of singularities is measure-zero, so the constant
    /// class uses a 1e-12 relative band on the discriminant.
    MonotonicityClass classify() const noexcept {
        const double lhs = gdp_.k() * pop_.a();
        const double rhs = pop_.k() * gdp_.a();
        const double tol = 1e-12 * std::max(std::abs(lhs), std::abs(rhs));
        if (std::abs(lhs - rhs) <= tol) return MonotonicityClass::Constant;
        return lhs > rhs ? MonotonicityClass::IncreasingToInfinity
                         : MonotonicityClass::DecreasingToZero;
    }

  private:
    std::string first_singular(double) const {
        if (!gdp_.has_singularity()) return "pop";
        if (!pop_.has_singularity()) return "gdp";
        return gdp_.singularity_time() <= pop_.singularity_time() ? "gdp" : "pop";
    }

    HyperbolicModel gdp_;
    HyperbolicModel pop_;
    YearInterval window_;
};

/// Either kind of trajectory segment; piecewise fits mix them.
using SegmentModel = std::variant<HyperbolicModel, RatioModel>;

inline double model_value(const SegmentModel& m, double t) {
    return std::visit([t](const auto& inner) { return inner.value(t); }, m);
}

inline double model_derivative(const SegmentModel& m, double t) {
    return std::visit([t](const auto& inner) { return inner.derivative(t); }, m);
}

inline const YearInterval& model_window(const SegmentModel& m) {
    return std::visit([](const auto& inner) -> const YearInterval& { return inner.window(); }, m);
}

}  // namespace hypergrowth
