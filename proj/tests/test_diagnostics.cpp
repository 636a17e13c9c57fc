#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "capsim/diagnostics.hpp"
#include "test_util.hpp"

using namespace capsim;

namespace {

Bid firm_bid(const std::string& id, double mw, double price) {
    return Bid{id, BidKind::firm, mw, 0.0, price};
}

Bid store_bid(const std::string& id, double p, double e, double price) {
    return Bid{id, BidKind::store, p, e, price};
}

// Linear interpolation of a scan's EEU at a given cumulative EFC.
double eeu_at(const ContinuityScan& scan, double efc) {
    for (std::size_t m = 1; m < scan.points.size(); ++m) {
        const auto& a = scan.points[m - 1];
        const auto& b = scan.points[m];
        if (efc <= b.cumulative_efc_mw) {
            if (b.cumulative_efc_mw == a.cumulative_efc_mw) return b.residual_eeu_mwh;
            const double w = (efc - a.cumulative_efc_mw) /
                             (b.cumulative_efc_mw - a.cumulative_efc_mw);
            return a.residual_eeu_mwh + w * (b.residual_eeu_mwh - a.residual_eeu_mwh);
        }
    }
    return scan.points.back().residual_eeu_mwh;
}

} // namespace

TEST_CASE("continuity_scan: single firm bid steps by exactly its size") {
    TimeGrid grid{4, 1, 1.0};
    const auto bg = ensemble_from_traces({{90.0, 70.0, 40.0, -10.0}}, grid, 0);
    const auto scan = continuity_scan({firm_bid("f", 25.0, 25.0)}, bg, 100.0, 0.01);
    REQUIRE(scan.points.size() == 2);
    REQUIRE(scan.points[0].cumulative_efc_mw == 0.0);
    REQUIRE(scan.points[1].cumulative_efc_mw == Catch::Approx(25.0).margin(0.01));
    REQUIRE(scan.points[1].residual_eeu_mwh < scan.points[0].residual_eeu_mwh);
}

TEST_CASE("continuity_scan: residual EEU nonincreasing, cumulative EFC nondecreasing") {
    const auto bg = testutil::make_background(81, 30, 4, 24, 15, 60.0, 0.97);
    std::vector<Bid> bids;
    for (int i = 0; i < 5; ++i) bids.push_back(firm_bid("f" + std::to_string(i), 12.0, 12.0));
    for (int i = 0; i < 5; ++i)
        bids.push_back(store_bid("s" + std::to_string(i), 10.0, 25.0, 9.0));
    const double target = 0.6 * rho(ResourceSet{}, bg, Metric::eeu);
    const auto scan = continuity_scan(bids, bg, target, 0.05);
    for (std::size_t m = 1; m < scan.points.size(); ++m) {
        REQUIRE(scan.points[m].residual_eeu_mwh <= scan.points[m - 1].residual_eeu_mwh + 1e-9);
        REQUIRE(scan.points[m].cumulative_efc_mw >= scan.points[m - 1].cumulative_efc_mw - 1e-9);
    }
}

TEST_CASE("continuity_scan: order independence of the traced curve") {
    const auto bg = testutil::make_background(82, 30, 4, 24, 15, 60.0, 0.97);
    std::vector<Bid> bids;
    for (int i = 0; i < 4; ++i) bids.push_back(firm_bid("f" + std::to_string(i), 15.0, 15.0));
    for (int i = 0; i < 4; ++i)
        bids.push_back(store_bid("s" + std::to_string(i), 12.0, 30.0, 10.0));
    const double target = 0.5 * rho(ResourceSet{}, bg, Metric::eeu);
    const auto scan = continuity_scan(bids, bg, target, 0.05);

    std::vector<Bid> shuffled = bids;
    std::mt19937 rng(7);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto scan2 = continuity_scan(shuffled, bg, target, 0.05);

    // Same underlying (EFC, EEU) relation: each shuffled point must lie on
    // the original curve.
    for (const auto& p : scan2.points) {
        const double expect = eeu_at(scan, p.cumulative_efc_mw);
        const double scale = std::max(1.0, scan.points[0].residual_eeu_mwh);
        REQUIRE(std::abs(p.residual_eeu_mwh - expect) / scale < 0.02);
    }
}

TEST_CASE("smoothness_grid: zero-power probes deviate by zero") {
    const auto bg = testutil::make_background(83, 20, 3, 24, 12, 60.0, 0.97);
    const auto grid = smoothness_grid(testutil::firm_only(10.0), bg, {0.0, 15.0}, 100.0);
    REQUIRE(grid.deviation_pct[0][0] == 0.0);
}

TEST_CASE("smoothness_grid: symmetric and small for small probes") {
    const auto bg = testutil::make_background(84, 40, 4, 24, 25, 60.0, 0.97);
    ResourceSet base = testutil::firm_only(20.0);
    base.stores.push_back(testutil::store("s1", 25.0, 50.0));
    const auto grid = smoothness_grid(base, bg, {5.0, 10.0, 20.0}, 100.0);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(grid.deviation_pct[i][j] == grid.deviation_pct[j][i]);
}

TEST_CASE("smoothness_grid: noise floor from background redraws") {
    const auto bg = testutil::make_background(85, 25, 3, 24, 12, 60.0, 0.97);
    const auto grid = smoothness_grid(
        testutil::firm_only(10.0), bg, {5.0, 10.0}, 50.0, Metric::eeu,
        [&](int rep) {
            return testutil::make_background(85 + 1000 * rep, 25, 3, 24, 12, 60.0, 0.97);
        });
    REQUIRE(grid.noise_floor_pct >= 0.0);
    for (auto& row : grid.deviation_pct)
        for (double v : row) REQUIRE((v == 0.0 || v >= grid.noise_floor_pct));
}
