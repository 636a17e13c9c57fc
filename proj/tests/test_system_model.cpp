#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <vector>

#include "capsim/system_model.hpp"
#include "test_util.hpp"

using namespace capsim;

namespace {

double available_fraction(const std::vector<double>& avail, double capacity) {
    int up = 0;
    for (double v : avail)
        if (v == capacity) ++up;
    return double(up) / double(avail.size());
}

} // namespace

TEST_CASE("simulate_availability: vanishing repair time means always available") {
    GeneratorUnit u{"g", 100.0, 50.0, 1e-12};
    TimeGrid grid{24, 4200, 1.0}; // ~1e5 periods
    const auto avail = simulate_availability(u, grid, background_unit_stream(1, 0, 0));
    REQUIRE(std::all_of(avail.begin(), avail.end(), [](double v) { return v == 100.0; }));
}

TEST_CASE("simulate_availability: long-run availability matches mttf/(mttf+mttr)") {
    TimeGrid grid{24, 4200, 1.0};
    SECTION("50/50 gives one half") {
        GeneratorUnit u{"g", 100.0, 50.0, 50.0};
        const auto avail = simulate_availability(u, grid, background_unit_stream(2, 0, 0));
        REQUIRE(available_fraction(avail, 100.0) == Catch::Approx(0.5).margin(0.02));
    }
    SECTION("equilibrium availability 0.9 implies mttr = 50/9") {
        GeneratorUnit u{"g", 100.0, 50.0, 50.0 / 9.0};
        REQUIRE(u.equilibrium_availability() == Catch::Approx(0.9));
        const auto avail = simulate_availability(u, grid, background_unit_stream(3, 0, 0));
        REQUIRE(available_fraction(avail, 100.0) == Catch::Approx(0.9).margin(0.02));
    }
}

TEST_CASE("simulate_availability: values are 0 or capacity") {
    GeneratorUnit u{"g", 73.5, 40.0, 10.0};
    TimeGrid grid{12, 20, 0.5};
    const auto avail = simulate_availability(u, grid, background_unit_stream(4, 1, 2));
    for (double v : avail) REQUIRE((v == 0.0 || v == 73.5));
}

TEST_CASE("build_background: fully reliable fleet covering demand has no shortfall") {
    TimeGrid grid{6, 10, 1.0};
    std::vector<GeneratorUnit> fleet{{"g1", 60.0, 50.0, 1e-12}, {"g2", 60.0, 50.0, 1e-12}};
    DemandTrace demand;
    demand.mwh.assign(static_cast<std::size_t>(grid.total_periods()), 100.0);
    const auto bg = build_background(fleet, demand, grid, 20, 99);
    for (const auto& trace : bg.traces)
        for (double v : trace) REQUIRE(v <= 0.0);
}

TEST_CASE("build_background: single 50/50 unit against half-load demand") {
    TimeGrid grid{24, 40, 1.0};
    std::vector<GeneratorUnit> fleet{{"g1", 100.0, 50.0, 50.0}};
    DemandTrace demand;
    demand.mwh.assign(static_cast<std::size_t>(grid.total_periods()), 50.0);
    const auto bg = build_background(fleet, demand, grid, 120, 7);
    int shortfall = 0, total = 0;
    for (const auto& trace : bg.traces)
        for (double v : trace) {
            ++total;
            if (v > 0.0) ++shortfall;
        }
    REQUIRE(double(shortfall) / double(total) == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("build_background: empty fleet returns the demand itself") {
    TimeGrid grid{3, 1, 1.0};
    DemandTrace demand;
    demand.mwh = {30.0, -10.0, 0.0};
    const auto bg = build_background({}, demand, grid, 2, 5);
    REQUIRE(bg.traces[0] == std::vector<double>{30.0, -10.0, 0.0});
    REQUIRE(bg.traces[1] == bg.traces[0]);
}

TEST_CASE("build_background: deterministic in (scenario, seed)") {
    const auto a = testutil::make_background(31, 10, 3, 24, 6, 50.0, 0.8);
    const auto b = testutil::make_background(31, 10, 3, 24, 6, 50.0, 0.8);
    REQUIRE(a.traces == b.traces);
    const auto c = testutil::make_background(32, 10, 3, 24, 6, 50.0, 0.8);
    REQUIRE(a.traces != c.traces);
}

TEST_CASE("build_background: adding a generator never increases residual demand") {
    TimeGrid grid{24, 5, 1.0};
    DemandTrace demand;
    demand.mwh.assign(static_cast<std::size_t>(grid.total_periods()), 120.0);
    std::vector<GeneratorUnit> fleet{{"g1", 80.0, 50.0, 10.0}, {"g2", 40.0, 30.0, 6.0}};
    const auto before = build_background(fleet, demand, grid, 15, 77);
    fleet.push_back({"g3", 55.0, 45.0, 9.0});
    const auto after = build_background(fleet, demand, grid, 15, 77);
    for (std::size_t k = 0; k < before.traces.size(); ++k)
        for (std::size_t t = 0; t < before.traces[k].size(); ++t)
            REQUIRE(after.traces[k][t] <= before.traces[k][t]);
}

TEST_CASE("build_background: configuration errors") {
    TimeGrid bad{0, 3, 1.0};
    DemandTrace demand;
    demand.mwh = {1.0, 2.0};
    REQUIRE_THROWS_AS(build_background({}, demand, bad, 1, 0), ConfigError);
    TimeGrid grid{3, 1, 1.0};
    REQUIRE_THROWS_AS(build_background({}, demand, grid, 1, 0), ConfigError); // length mismatch
    demand.mwh = {1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(build_background({}, demand, grid, 0, 0), ConfigError); // no traces
    std::vector<GeneratorUnit> fleet{{"g", -5.0, 50.0, 10.0}};
    REQUIRE_THROWS_AS(build_background(fleet, demand, grid, 1, 0), ConfigError);
}

TEST_CASE("two_state_probs: reduces to h/mttf and h/mttr for small h") {
    GeneratorUnit u{"g", 10.0, 500.0, 100.0};
    const auto p = two_state_probs(u, 1.0);
    REQUIRE(p.p_fail == Catch::Approx(1.0 / 500.0).epsilon(0.01));
    REQUIRE(p.p_repair == Catch::Approx(1.0 / 100.0).epsilon(0.01));
    REQUIRE(p.p_up_equilibrium == Catch::Approx(500.0 / 600.0));
}
