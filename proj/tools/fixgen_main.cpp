// Regenerates the bundled scenario fixtures. Everything is derived
// deterministically from the seeds written into the scenario files, so the
// committed fixtures can be reproduced bit for bit.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "capsim/capsim.hpp"

namespace fs = std::filesystem;
using namespace capsim;

namespace {

// GB-like winter daily shape, hourly factors.
const double kHourShape[24] = {0.74, 0.71, 0.69, 0.68, 0.68, 0.70, 0.76, 0.84,
                               0.90, 0.92, 0.93, 0.94, 0.93, 0.92, 0.92, 0.94,
                               0.99, 1.06, 1.10, 1.08, 1.02, 0.95, 0.87, 0.79};

std::vector<GeneratorUnit> make_fleet(const std::vector<std::pair<int, double>>& mix,
                                      std::uint64_t seed) {
    std::vector<GeneratorUnit> fleet;
    const auto jitter = scratch_stream(seed, 21, 0);
    std::uint64_t c = 0;
    int idx = 0;
    for (const auto& [count, cap] : mix) {
        for (int i = 0; i < count; ++i, ++idx) {
            GeneratorUnit u;
            char buf[16];
            std::snprintf(buf, sizeof buf, "g%03d", idx);
            u.id = buf;
            u.capacity_mw = cap * (1.0 + 0.08 * (jitter.uniform(c++) - 0.5));
            const double avail = 0.86 + 0.10 * jitter.uniform(c++);
            u.mttf_h = 50.0;
            u.mttr_h = u.mttf_h * (1.0 - avail) / avail;
            fleet.push_back(std::move(u));
        }
    }
    return fleet;
}

DemandTrace make_demand(const TimeGrid& grid, double total_cap_mw, double scale,
                        std::uint64_t seed) {
    DemandTrace demand;
    demand.label = "synthetic winter demand net of wind";
    const int n = grid.total_periods();
    demand.mwh.resize(static_cast<std::size_t>(n));
    const auto noise = scratch_stream(seed, 22, 0);
    for (int t = 0; t < n; ++t) {
        const int hour = t % grid.periods_per_day;
        const int day = t / grid.periods_per_day;
        const double day_factor = 1.0 + 0.06 * std::sin(2.0 * M_PI * day / 7.0) +
                                  0.08 * (noise.uniform(1000000 + std::uint64_t(day)) - 0.5);
        const double jitter = 1.0 + 0.04 * (noise.uniform(std::uint64_t(t)) - 0.5);
        demand.mwh[std::size_t(t)] =
            scale * total_cap_mw * kHourShape[hour % 24] * day_factor * jitter;
    }
    return demand;
}

// Demand scale at which the bare background hits the requested LOLE.
double calibrate_demand_scale(const std::vector<GeneratorUnit>& fleet, const TimeGrid& grid,
                              int traces, std::uint64_t seed, double target_lole_h) {
    double total_cap = 0.0;
    for (const auto& u : fleet) total_cap += u.capacity_mw;
    double lo = 0.70, hi = 1.10;
    for (int it = 0; it < 16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto bg =
            build_background(fleet, make_demand(grid, total_cap, mid, seed), grid, traces, seed);
        const double lole = evaluate(ResourceSet{}, bg).lole_h;
        if (lole < target_lole_h)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::vector<Bid> make_gb_bid_pool(const ShortfallEnsemble& bg, Metric metric, double k,
                                  double beta, std::uint64_t seed) {
    std::vector<Bid> bids;
    // 30 firm units: three at each multiple of 10 MW up to 100 MW.
    int idx = 0;
    for (int rep = 0; rep < 3; ++rep)
        for (int cap = 10; cap <= 100; cap += 10) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "f%02d", idx++);
            bids.push_back(Bid{buf, BidKind::firm, double(cap), 0.0, 0.0});
        }
    // 120 stores: the 50 MW and 100 MW rate classes with the standard energy
    // mix (12.5/25/50/100 MWh and 25/50/100/200 MWh respectively).
    struct StoreClass {
        double power;
        double energy;
        int count;
    };
    const std::vector<StoreClass> classes{
        {50.0, 12.5, 10}, {50.0, 25.0, 15},  {50.0, 50.0, 15},  {50.0, 100.0, 20},
        {100.0, 25.0, 10}, {100.0, 50.0, 15}, {100.0, 100.0, 15}, {100.0, 200.0, 20}};
    idx = 0;
    for (const auto& cls : classes)
        for (int i = 0; i < cls.count; ++i) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "s%03d", idx++);
            bids.push_back(Bid{buf, BidKind::store, cls.power, cls.energy, 0.0});
        }

    // Stage one: wide-noise prices anchored to naive firm-referenced EFCs
    // give a convergent mixed portfolio; stage two re-anchors the prices to
    // the EFCs of that portfolio, so the committed prices track the marginal
    // value against a realistic accepted mix (with modest noise on top).
    AuctionConfig cfg;
    cfg.efc_tol_mw = 0.25;
    const double proxy = calibrate_firm(bg, metric, k, cfg.efc_tol_mw);
    const auto naive_efc = auction_detail::efc_map_against(bids, {}, proxy, bg);
    const auto price_noise = scratch_stream(seed, 23, 0);
    std::uint64_t c = 0;
    for (auto& b : bids)
        b.min_total_price = beta * std::max(naive_efc.at(b.id), 0.5) *
                            (1.0 + 0.40 * (2.0 * price_noise.uniform(c++) - 1.0));
    const auto stage_one = clear(bids, bg, metric, k, cfg);
    for (auto& b : bids) {
        const double anchor =
            b.kind == BidKind::firm ? b.power_mw : std::max(stage_one.efc_mw.at(b.id), 0.5);
        b.min_total_price =
            round_sig(beta * anchor * (1.0 + 0.25 * (2.0 * price_noise.uniform(c++) - 1.0)));
    }
    return bids;
}

void write_scenario_json(const fs::path& path, const TimeGrid& grid,
                         const std::vector<GeneratorUnit>& fleet, const std::string& demand_file,
                         const std::string& bids_file, int traces, std::uint64_t seed,
                         const nlohmann::json& extra) {
    nlohmann::json j{{"time_grid",
                      {{"periods_per_day", grid.periods_per_day},
                       {"num_days", grid.num_days},
                       {"period_length", grid.period_length_h}}},
                     {"demand_file", demand_file},
                     {"num_traces", traces},
                     {"seed", seed}};
    if (!bids_file.empty()) j["bids_file"] = bids_file;
    nlohmann::json units = nlohmann::json::array();
    for (const auto& u : fleet)
        units.push_back({{"id", u.id},
                         {"capacity_mw", round_sig(u.capacity_mw)},
                         {"mttf_h", round_sig(u.mttf_h)},
                         {"mttr_h", round_sig(u.mttr_h)}});
    j["fleet"] = units;
    for (const auto& [key, value] : extra.items()) j[key] = value;
    write_json(path, j);
}

void make_hand_zero(const fs::path& dir) {
    fs::create_directories(dir);
    TimeGrid grid{3, 1, 1.0};
    DemandTrace demand;
    demand.mwh = {-5.0, -10.0, 0.0};
    write_demand_csv(dir / "demand.csv", demand);
    write_scenario_json(dir / "scenario.json", grid, {}, "demand.csv", "", 2, 7,
                        {{"standard", {{"metric", "eeu"}, {"k", 0.0}}}});
    std::printf("hand_zero: written\n");
}

void make_gb_like(const fs::path& dir) {
    fs::create_directories(dir);
    const std::uint64_t seed = 20260810;
    const TimeGrid grid{24, 28, 1.0};
    const int traces = 100;

    const std::vector<std::pair<int, double>> mix{{8, 1100.0}, {12, 800.0}, {16, 600.0},
                                                  {20, 450.0}, {24, 300.0}, {32, 180.0}};
    const auto fleet = make_fleet(mix, seed);
    double total_cap = 0.0;
    for (const auto& u : fleet) total_cap += u.capacity_mw;

    const double scale = calibrate_demand_scale(fleet, grid, traces, seed, 18.0);
    const auto demand = make_demand(grid, total_cap, scale, seed);
    const auto bg = build_background(fleet, demand, grid, traces, seed);
    const auto bare = evaluate(ResourceSet{}, bg);
    std::printf("gb_like: %zu units, %.0f MW, demand scale %.4f, background lole %.2f h, eeu %.0f MWh\n",
                fleet.size(), total_cap, scale, bare.lole_h, bare.eeu_mwh);

    // Standard: the EEU level corresponding to a 3 h/season LOLE, mirroring
    // how the GB standard is set.
    const double y3 = calibrate_firm(bg, Metric::lole, 3.0, 0.25);
    ResourceSet firm3;
    firm3.firm_mw = y3;
    const double k = round_sig(rho(firm3, bg, Metric::eeu));
    std::printf("gb_like: firm for 3h lole = %.0f MW, eeu standard k = %.1f MWh\n", y3, k);

    const double beta = 20000.0;
    const auto bids = make_gb_bid_pool(bg, Metric::eeu, k, beta, seed);

    write_demand_csv(dir / "demand.csv", demand);
    write_bids_csv(dir / "bids.csv", bids);
    write_scenario_json(dir / "scenario.json", grid, fleet, "demand.csv", "bids.csv", traces,
                        seed,
                        {{"standard", {{"metric", "eeu"}, {"k", k}}},
                         {"price_grid",
                          {{"start", 1.6 * beta}, {"stop", 0.4 * beta}, {"steps", 121}}}});
    std::printf("gb_like: written\n");
}

void make_econ(const fs::path& dir) {
    fs::create_directories(dir);
    const std::uint64_t seed = 777001;
    const TimeGrid grid{24, 21, 1.0};
    const int traces = 150;

    const std::vector<std::pair<int, double>> mix{{2, 1100.0}, {3, 800.0}, {4, 600.0},
                                                  {4, 450.0},  {4, 300.0}, {3, 180.0}};
    const auto fleet = make_fleet(mix, seed);
    double total_cap = 0.0;
    for (const auto& u : fleet) total_cap += u.capacity_mw;

    const double scale = calibrate_demand_scale(fleet, grid, traces, seed, 8.0);
    const auto demand = make_demand(grid, total_cap, scale, seed);
    const auto bg = build_background(fleet, demand, grid, traces, seed);

    const double voll = 17000.0;
    DemandCurve curve;
    for (double price = 8000.0; price <= 48000.0; price += 8000.0)
        curve.knots.push_back(
            {price, round_sig(calibrate_firm(bg, Metric::lole, price / voll, 0.1))});
    curve.validate();
    std::ofstream cf(dir / "curve.csv");
    cf << "price,capacity_mw\n";
    for (const auto& [p, cap] : curve.knots)
        cf << format_number(p) << "," << format_number(cap) << "\n";

    std::vector<Bid> bids;
    const auto noise = scratch_stream(seed, 24, 0);
    for (int i = 0; i < 60; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "f%02d", i);
        const double unit =
            9000.0 + 680.0 * i * (1.0 + 0.05 * (noise.uniform(std::uint64_t(i)) - 0.5));
        bids.push_back(Bid{buf, BidKind::firm, 25.0, 0.0, round_sig(25.0 * unit)});
    }
    write_bids_csv(dir / "bids.csv", bids);
    write_demand_csv(dir / "demand.csv", demand);
    write_scenario_json(dir / "scenario.json", grid, fleet, "demand.csv", "bids.csv", traces,
                        seed,
                        {{"econ",
                          {{"voll", voll}, {"cone", 30000.0}, {"demand_curve_file", "curve.csv"}}},
                         {"price_grid",
                          {{"start", 52000.0}, {"stop", 6000.0}, {"steps", 116}}}});
    std::printf("econ: written (bare lole %.2f h)\n", evaluate(ResourceSet{}, bg).lole_h);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenerate bundled fixtures"};
    std::string out = "fixtures";
    std::string only;
    app.add_option("--out", out, "Fixture root directory");
    app.add_option("--only", only, "Regenerate a single fixture (hand_zero|gb_like|econ)");
    CLI11_PARSE(app, argc, argv);

    const fs::path root(out);
    try {
        if (only.empty() || only == "hand_zero") make_hand_zero(root / "hand_zero");
        if (only.empty() || only == "gb_like") make_gb_like(root / "gb_like");
        if (only.empty() || only == "econ") make_econ(root / "econ");
    } catch (const Error& e) {
        std::fprintf(stderr, "fixgen failed [%s]: %s\n", e.code().c_str(), e.what());
        return 1;
    }
    return 0;
}
