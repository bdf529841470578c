#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "hypergrowth/errors.hpp"

namespace hypergrowth {

/// Closed year interval [lo, hi]. Years are real numbers in astronomical
/// numbering (0 = 1 BC, -1 = 2 BC), so BC/AD arithmetic stays uniform.
struct YearInterval {
    double lo = 0.0;
    double hi = 0.0;

    bool valid() const noexcept { return lo <= hi; }
    double width() const noexcept { return hi - lo; }
    bool contains(double t) const noexcept { return t >= lo && t <= hi; }

    YearInterval intersect(const YearInterval& other) const noexcept {
        return {std::max(lo, other.lo), std::min(hi, other.hi)};
    }
};

enum class SeriesKind { Population, Gdp, GdpPerCapita };

enum class SeriesUnit { MillionPersons, MillionGK1990Dollars, GK1990DollarsPerCapita };

inline SeriesUnit unit_for(SeriesKind kind) noexcept {
    switch (kind) {
        case SeriesKind::Population: return SeriesUnit::MillionPersons;
        case SeriesKind::Gdp: return SeriesUnit::MillionGK1990Dollars;
        default: return SeriesUnit::GK1990DollarsPerCapita;
    }
}

inline std::string to_string(SeriesKind kind) {
    switch (kind) {
        case SeriesKind::Population: return "population";
        case SeriesKind::Gdp: return "gdp";
        default: return "gdp_per_capita";
    }
}

inline SeriesKind parse_kind(const std::string& token) {
    if (token == "population") return SeriesKind::Population;
    if (token == "gdp") return SeriesKind::Gdp;
    if (token == "gdp_per_capita") return SeriesKind::GdpPerCapita;
    throw SchemaError("unknown series kind '" + token + "'");
}

struct Observation {
    double year = 0.0;
    double value = 0.0;
};

/// One region's time series of (year, value) observations. Years are
/// strictly increasing and all values are strictly positive.
class GrowthSeries {
  public:
    GrowthSeries(std::string region, SeriesKind kind, std::vector<Observation> points)
        : region_(std::move(region)), kind_(kind), unit_(unit_for(kind)),
          points_(std::move(points)) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!(points_[i].value > 0.0))
                throw ValueError("series '" + region_ + "': non-positive value at year " +
                                 std::to_string(points_[i].year));
            if (i > 0 && !(points_[i].year > points_[i - 1].year))
                throw ValueError("series '" + region_ + "': years not strictly increasing near " +
                                 std::to_string(points_[i].year));
        }
    }

    const std::string& region() const noexcept { return region_; }
    SeriesKind kind() const noexcept { return kind_; }
    SeriesUnit unit() const noexcept { return unit_; }
    const std::vector<Observation>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }

    YearInterval span() const {
        if (points_.empty()) throw InsufficientData("empty series has no span");
        return {points_.front().year, points_.back().year};
    }

    /// Observations falling inside the closed window, in year order.
    std::vector<Observation> slice(const YearInterval& window) const {
        std::vector<Observation> out;
        for (const auto& p : points_)
            if (window.contains(p.year)) out.push_back(p);
        return out;
    }

    /// Same series with every value multiplied by factor > 0.
    GrowthSeries scaled(double factor) const {
        if (!(factor > 0.0)) throw ValueError("scale factor must be positive");
        std::vector<Observation> pts = points_;
        for (auto& p : pts) p.value *= factor;
        return GrowthSeries(region_, kind_, std::move(pts));
    }

    bool strictly_increasing() const noexcept {
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i].value > points_[i - 1].value)) return false;
        return true;
    }

  private:
    std::string region_;
    SeriesKind kind_;
    SeriesUnit unit_;
    std::vector<Observation> points_;
};

}  // namespace hypergrowth
