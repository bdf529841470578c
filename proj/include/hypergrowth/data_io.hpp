#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "hypergrowth/errors.hpp"
#include "hypergrowth/types.hpp"

namespace hypergrowth {

namespace detail {

inline std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline std::optional<double> parse_number(const std::string& token) {
    const std::string t = trim(token);
    if (t.empty()) return std::nullopt;
    double value = 0.0;
    const char* begin = t.data();
    const char* end = t.data() + t.size();
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
    return value;
}

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

/// Year tokens in horizontal headers: plain astronomical numbers
/// ("-10000", "1820") or the historical "10000 BC" form, which maps to
/// -(N - 1) because year 0 is 1 BC.
inline std::optional<double> parse_year_token(const std::string& token) {
    std::string t = trim(token);
    if (t.size() > 2) {
        const auto tail = t.substr(t.size() - 2);
        if (tail == "BC" || tail == "bc") {
            const auto n = parse_number(t.substr(0, t.size() - 2));
            if (!n || *n <= 0.0) return std::nullopt;
            return -(*n - 1.0);
        }
    }
    return parse_number(t);
}

}  // namespace detail

/// Parameter tables in this domain quote a and k per *billion* while
/// Maddison-style series store millions; fitting rescales million-unit
/// values by this factor so the two conventions line up. Ratios are
/// already unit-free.
inline double table_unit_scale(SeriesKind kind) noexcept {
    return kind == SeriesKind::GdpPerCapita ? 1.0 : 1e-3;
}

/// Tidy schema: header `region,kind,year,value`, one observation per
/// row, kind in {population, gdp, gdp_per_capita}, years astronomical.
/// Returns one series per (region, kind) group, groups ordered by
/// (region, kind) and rows by year.
inline std::vector<GrowthSeries> parse_series_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: missing header");
    {
        const auto header = detail::split_csv_line(line);
        if (header.size() != 4 || header[0] != "region" || header[1] != "kind" ||
            header[2] != "year" || header[3] != "value")
            throw SchemaError("expected header 'region,kind,year,value'");
    }
    std::map<std::pair<std::string, SeriesKind>, std::map<double, double>> groups;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        if (cells.size() != 4)
            throw SchemaError("line " + std::to_string(lineno) + ": expected 4 columns, got " +
                              std::to_string(cells.size()));
        const std::string& region = cells[0];
        if (region.empty()) throw SchemaError("line " + std::to_string(lineno) + ": empty region");
        const SeriesKind kind = parse_kind(cells[1]);
        const auto year = detail::parse_number(cells[2]);
        if (!year) throw ValueError("line " + std::to_string(lineno) + ": unparseable year '" +
                                    cells[2] + "'");
        const auto value = detail::parse_number(cells[3]);
        if (!value || !(*value > 0.0))
            throw ValueError("line " + std::to_string(lineno) + ": value must be a positive number");
        auto& group = groups[{region, kind}];
        if (!group.emplace(*year, *value).second)
            throw DuplicateYear("duplicate observation for " + region + "/" + to_string(kind) +
                                " at year " + cells[2]);
    }
    std::vector<GrowthSeries> out;
    for (const auto& [key, rows] : groups) {
        std::vector<Observation> pts;
        pts.reserve(rows.size());
        for (const auto& [year, value] : rows) pts.push_back({year, value});
        out.emplace_back(key.first, key.second, std::move(pts));
    }
    return out;
}

inline void serialize_series_csv(const std::vector<GrowthSeries>& series, std::ostream& out) {
    out << "region,kind,year,value\n";
    for (const auto& s : series)
        for (const auto& p : s.points())
            out << s.region() << ',' << to_string(s.kind()) << ',' << detail::format_double(p.year)
                << ',' << detail::format_double(p.value) << '\n';
}

/// Horizontal layout: row 1 is `region,<year>,<year>,...`; each further
/// row is a region name followed by values. Blank or non-numeric cells
/// are missing data, not errors. value_scale converts source units
/// (the original population sheet is in thousands; 1e-3 brings it to
/// millions).
inline std::vector<GrowthSeries> convert_maddison_horizontal(std::istream& in, SeriesKind kind,
                                                             double value_scale = 1.0) {
    if (kind == SeriesKind::GdpPerCapita)
        throw SchemaError("horizontal conversion handles population or gdp sheets");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty input: missing year header");
    const auto header = detail::split_csv_line(line);
    if (header.size() < 2) throw SchemaError("year header row needs at least one year column");
    std::vector<double> years;
    for (std::size_t i = 1; i < header.size(); ++i) {
        const auto year = detail::parse_year_token(header[i]);
        if (!year)
            throw SchemaError("unparseable year header '" + header[i] + "' in column " +
                              std::to_string(i + 1));
        years.push_back(*year);
    }
    std::vector<GrowthSeries> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_csv_line(line);
        const std::string region = cells.empty() ? "" : cells[0];
        if (region.empty()) continue;
        std::map<double, double> rows;
        for (std::size_t i = 1; i < cells.size() && i - 1 < years.size(); ++i) {
            const auto value = detail::parse_number(cells[i]);
            if (!value) continue;  // blank or marker: missing
            if (!(*value > 0.0))
                throw ValueError("line " + std::to_string(lineno) + ": non-positive value for " +
                                 region);
            if (!rows.emplace(years[i - 1], *value * value_scale).second)
                throw SchemaError("duplicate year column " + detail::format_double(years[i - 1]));
        }
        if (rows.empty()) continue;
        std::vector<Observation> pts;
        for (const auto& [year, value] : rows) pts.push_back({year, value});
        out.emplace_back(region, kind, std::move(pts));
    }
    return out;
}

/// Pointwise gdp/pop at the years both series observe. Millions over
/// millions of persons leaves plain 1990 GK$ per capita.
inline GrowthSeries derive_per_capita(const GrowthSeries& gdp, const GrowthSeries& pop) {
    if (gdp.region() != pop.region())
        throw RegionMismatch("cannot divide " + gdp.region() + " by " + pop.region());
    if (gdp.kind() != SeriesKind::Gdp || pop.kind() != SeriesKind::Population)
        throw ValueError("derive_per_capita expects a gdp series and a population series");
    std::vector<Observation> pts;
    std::size_t j = 0;
    for (const auto& g : gdp.points()) {
        while (j < pop.size() && pop.points()[j].year < g.year) ++j;
        if (j < pop.size() && pop.points()[j].year == g.year)
            pts.push_back({g.year, g.value / pop.points()[j].value});
    }
    if (pts.empty()) throw NoCommonYears(gdp.region() + ": gdp and population share no years");
    return GrowthSeries(gdp.region(), SeriesKind::GdpPerCapita, std::move(pts));
}

/// Exact or noisy samples of 1/(a - k t) at the given years. Noise is
/// multiplicative, uniform in [-noise, +noise), drawn from the raw
/// engine bits so a seed pins the fixture on every platform.
inline GrowthSeries synthesize_hyperbolic(double a, double k, const std::vector<double>& years,
                                          double noise, std::uint64_t seed,
                                          const std::string& region = "synthetic",
                                          SeriesKind kind = SeriesKind::Population) {
    std::mt19937_64 rng(seed);
    std::vector<Observation> pts;
    pts.reserve(years.size());
    for (double t : years) {
        const double r = a - k * t;
        if (r <= 0.0)
            throw SingularityReached("sample year " + std::to_string(t) +
                                     " is at or beyond the singularity");
        double v = 1.0 / r;
        if (noise != 0.0) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
            v *= 1.0 + noise * u;
        }
        pts.push_back({t, v});
    }
    return GrowthSeries(region, kind, std::move(pts));
}

}  // namespace hypergrowth
