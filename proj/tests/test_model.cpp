#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hypergrowth/model.hpp"
#include "golden_params.hpp"
#include "oracles.hpp"

using namespace hypergrowth;
using Catch::Approx;

namespace {

HyperbolicModel make(double a, double k, double lo = 1.0, double hi = 1950.0) {
    return HyperbolicModel(a, k, {lo, hi});
}

HyperbolicModel from(const golden::RatioParams& p, bool gdp, double lo = 1.0, double hi = 1850.0) {
    return gdp ? HyperbolicModel(p.a1, p.k1, {lo, hi}) : HyperbolicModel(p.a2, p.k2, {lo, hi});
}

}  // namespace

TEST_CASE("hyperbolic evaluation", "[model]") {
    const auto world_gdp = from(golden::world, true);

    SECTION("world GDP at t=0") {
        CHECK(world_gdp.value(0.0) == Approx(59.38).epsilon(1e-3));
    }
    SECTION("degenerate constant case") {
        const auto c = make(1.0, 0.0);
        CHECK(c.value(-5000.0) == 1.0);
        CHECK(c.value(1e6) == 1.0);
    }
    SECTION("evaluation at or past the singularity throws") {
        // t* = 1.684e-2 / 8.539e-6 = 1972.13
        CHECK(world_gdp.singularity_time() == Approx(1972.13).margin(0.01));
        CHECK_THROWS_AS(world_gdp.value(1972.2), SingularityReached);
        CHECK_THROWS_AS(world_gdp.value(world_gdp.singularity_time()), SingularityReached);
        CHECK_NOTHROW(world_gdp.value(1972.0));
    }
}

TEST_CASE("reciprocal line", "[model]") {
    SECTION("world population at t=1000") {
        const auto m = from(golden::world, false);
        CHECK(m.reciprocal(1000.0) == Approx(3.974).epsilon(1e-12));
    }
    SECTION("constant model far out") {
        CHECK(make(5.0, 0.0).reciprocal(1e6) == 5.0);
    }
    SECTION("negative past the singularity, no throw") {
        const auto m = from(golden::world, true);
        CHECK(m.reciprocal(2000.0) == Approx(-2.38e-4).epsilon(1e-3));
    }
    SECTION("second differences on an even grid vanish") {
        const auto m = from(golden::africa_slow, false);
        double scale = 0.0;
        for (int i = 0; i <= 100; ++i) scale = std::max(scale, std::abs(m.reciprocal(1 + 18 * i)));
        for (int i = 1; i < 100; ++i) {
            const double d2 = m.reciprocal(1 + 18 * (i + 1)) - 2 * m.reciprocal(1 + 18 * i) +
                              m.reciprocal(1 + 18 * (i - 1));
            CHECK(std::abs(d2) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("singularity time", "[model]") {
    SECTION("Africa slow-segment singularities from reference parameters") {
        CHECK(from(golden::africa_slow, false).singularity_time() == Approx(2343.0).margin(1.0));
        CHECK(from(golden::africa_slow, true).singularity_time() == Approx(2473.0).margin(1.0));
    }
    SECTION("constant model has none") {
        CHECK_THROWS_AS(make(1.0, 0.0).singularity_time(), NoSingularity);
    }
    SECTION("value blows up as 1/(k*delta) approaching t*") {
        const auto m = from(golden::world, true);
        const double ts = m.singularity_time();
        for (double delta : {100.0, 10.0, 1.0, 0.01}) {
            CHECK(m.value(ts - delta) == Approx(1.0 / (m.k() * delta)).epsilon(1e-9));
        }
    }
}

TEST_CASE("growth rate", "[model]") {
    const auto m = from(golden::world, true);

    SECTION("rate equals k times the value, exactly") {
        for (double t : {-500.0, 0.0, 1000.0, 1900.0, 1950.0})
            CHECK(m.growth_rate(t) == m.k() * m.value(t));
    }
    SECTION("world GDP at t=1000") {
        CHECK(m.growth_rate(1000.0) == Approx(1.029e-3).epsilon(1e-3));
    }
    SECTION("constant model has zero rate") {
        CHECK(make(2.0, 0.0).growth_rate(123.0) == 0.0);
    }
    SECTION("matches finite differences of log S") {
        auto f = [&](double t) { return m.value(t); };
        for (double t : {1.0, 500.0, 1000.0, 1500.0, 1900.0}) {
            const double fd = oracle::fd_log_derivative(f, t, 0.01);
            CHECK(m.growth_rate(t) == Approx(fd).epsilon(1e-6));
        }
    }
    SECTION("monotonically increasing in t") {
        double prev = m.growth_rate(-1000.0);
        for (double t = -900.0; t < 1950.0; t += 50.0) {
            const double r = m.growth_rate(t);
            CHECK(r > prev);
            prev = r;
        }
    }
}

TEST_CASE("ratio evaluation", "[model]") {
    SECTION("world income per capita at t=1000") {
        const RatioModel world(from(golden::world, true), from(golden::world, false));
        CHECK(world.value(1000.0) == Approx(478.7).epsilon(1e-3));
    }
    SECTION("identical components give the constant 1") {
        const RatioModel unit(make(2.0, 1e-3), make(2.0, 1e-3));
        for (double t : {1.0, 500.0, 1500.0}) CHECK(unit.value(t) == Approx(1.0).epsilon(1e-15));
    }
    SECTION("Africa slow segment decreases") {
        const RatioModel africa(from(golden::africa_slow, true), from(golden::africa_slow, false));
        CHECK(africa.value(1.0) == Approx(465.8).epsilon(1e-3));
        CHECK(africa.value(1800.0) == Approx(396.6).epsilon(1e-3));
        CHECK(africa.value(1.0) > africa.value(1800.0));
    }
    SECTION("names the component that diverged") {
        const RatioModel world(from(golden::world, true), from(golden::world, false));
        try {
            world.value(1990.0);  // past gdp t* = 1972, before pop t* = 2055
            FAIL("expected SingularityReached");
        } catch (const SingularityReached& e) {
            CHECK(std::string(e.what()).find("gdp") != std::string::npos);
        }
    }
}

TEST_CASE("ratio monotonicity classification", "[model]") {
    const RatioModel world(from(golden::world, true), from(golden::world, false));
    const RatioModel africa(from(golden::africa_slow, true), from(golden::africa_slow, false));

    SECTION("reference classes") {
        CHECK(world.classify() == MonotonicityClass::IncreasingToInfinity);
        CHECK(africa.classify() == MonotonicityClass::DecreasingToZero);
        const RatioModel unit(make(2.0, 1e-3), make(2.0, 1e-3));
        CHECK(unit.classify() == MonotonicityClass::Constant);
    }

    SECTION("derivative sign is constant and matches the class") {
        for (const auto* r : {&world, &africa}) {
            const double sign = r->discriminant() > 0 ? 1.0 : -1.0;
            for (int i = 0; i < 1000; ++i) {
                const double t = 1.0 + i * (1950.0 - 1.0) / 999.0;
                CHECK(sign * r->derivative(t) > 0.0);
            }
        }
    }

    SECTION("scaling one component leaves the class unchanged") {
        std::mt19937_64 rng(42);
        std::uniform_real_distribution<double> logc(-3.0, 3.0);
        for (int i = 0; i < 50; ++i) {
            const double c = std::exp(logc(rng));
            const RatioModel scaled(HyperbolicModel(golden::world.a1 * c, golden::world.k1 * c,
                                                    {1.0, 1850.0}),
                                    from(golden::world, false));
            CHECK(scaled.classify() == world.classify());
            const double t = 1000.0;
            CHECK(scaled.value(t) == Approx(world.value(t) / c).epsilon(1e-12));
        }
    }
}

TEST_CASE("construction guards", "[model]") {
    CHECK_THROWS_AS(make(-1.0, 1e-3), ValueError);
    CHECK_THROWS_AS(make(0.0, 1e-3), ValueError);
    CHECK_THROWS_AS(make(1.0, -1e-3), NonHyperbolic);
    // singularity at t=1000 sits inside [1, 1950]
    CHECK_THROWS_AS(make(1.0, 1e-3), NonHyperbolic);
    CHECK_THROWS_AS(HyperbolicModel(1.0, 1e-3, {2000.0, 1000.0}), ValueError);
    // disjoint component windows
    CHECK_THROWS_AS(RatioModel(HyperbolicModel(1.0, 1e-4, {1.0, 500.0}),
                               HyperbolicModel(1.0, 1e-4, {600.0, 900.0})),
                    ValueError);
}

TEST_CASE("strict monotonicity left of the singularity", "[model]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> loga(-4.0, 2.0);
    std::uniform_real_distribution<double> ts_draw(1960.0, 3000.0);
    for (int i = 0; i < 100; ++i) {
        const double a = std::exp(loga(rng));
        const double tstar = ts_draw(rng);
        const HyperbolicModel m(a, a / tstar, {1.0, 1950.0});
        double prev = m.value(1.0);
        for (double t = 40.0; t < 1950.0; t += 39.0) {
            const double v = m.value(t);
            CHECK(v > prev);
            prev = v;
        }
    }
}
