#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "capsim/io.hpp"
#include "test_util.hpp"

using namespace capsim;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("capsim_io_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

} // namespace

TEST_CASE("round_sig: six significant digits") {
    REQUIRE(round_sig(1234567.89) == 1234570.0);
    REQUIRE(round_sig(0.001234567) == Catch::Approx(0.00123457).epsilon(1e-12));
    REQUIRE(round_sig(0.0) == 0.0);
    REQUIRE(round_sig(-98765.4321) == -98765.4);
}

TEST_CASE("demand csv: round trip and validation") {
    TempDir tmp;
    TimeGrid grid{3, 1, 1.0};
    DemandTrace trace;
    trace.mwh = {12.5, -3.25, 0.0};
    write_demand_csv(tmp.path / "d.csv", trace);
    const auto loaded = load_demand_csv(tmp.path / "d.csv", grid);
    REQUIRE(loaded.mwh == trace.mwh);

    write_file(tmp.path / "bad_header.csv", "time,mwh\n0,1\n");
    REQUIRE_THROWS_AS(load_demand_csv(tmp.path / "bad_header.csv", grid), ConfigError);
    write_file(tmp.path / "bad_index.csv", "period,mwh\n0,1\n2,1\n1,1\n");
    REQUIRE_THROWS_AS(load_demand_csv(tmp.path / "bad_index.csv", grid), ConfigError);
    write_file(tmp.path / "short.csv", "period,mwh\n0,1\n");
    REQUIRE_THROWS_AS(load_demand_csv(tmp.path / "short.csv", grid), ConfigError);
}

TEST_CASE("bids csv: round trip and validation") {
    TempDir tmp;
    std::vector<Bid> bids{{"f1", BidKind::firm, 25.0, 0.0, 125.5},
                          {"s1", BidKind::store, 10.0, 40.0, 88.0}};
    write_bids_csv(tmp.path / "b.csv", bids);
    const auto loaded = load_bids_csv(tmp.path / "b.csv");
    REQUIRE(loaded.size() == 2);
    REQUIRE(loaded[0].id == "f1");
    REQUIRE(loaded[0].kind == BidKind::firm);
    REQUIRE(loaded[1].energy_mwh == 40.0);
    REQUIRE(loaded[1].min_total_price == 88.0);

    write_file(tmp.path / "bad.csv",
               "id,type,power_mw,energy_mwh,min_total_price\nx,wind,5,,1\n");
    REQUIRE_THROWS_AS(load_bids_csv(tmp.path / "bad.csv"), ConfigError);
    write_file(tmp.path / "neg.csv",
               "id,type,power_mw,energy_mwh,min_total_price\nx,firm,-5,,1\n");
    REQUIRE_THROWS_AS(load_bids_csv(tmp.path / "neg.csv"), ConfigError);
}

TEST_CASE("demand curve csv: knots and monotonicity") {
    TempDir tmp;
    write_file(tmp.path / "c.csv", "price,capacity_mw\n1000,500\n2000,400\n3000,100\n");
    const auto curve = load_demand_curve_csv(tmp.path / "c.csv");
    REQUIRE(curve.capacity_at(1500.0) == Catch::Approx(450.0));
    write_file(tmp.path / "bad.csv", "price,capacity_mw\n1000,500\n2000,600\n");
    REQUIRE_THROWS_AS(load_demand_curve_csv(tmp.path / "bad.csv"), ConfigError);
}

TEST_CASE("scenario json: full load with file references") {
    TempDir tmp;
    write_file(tmp.path / "demand.csv", "period,mwh\n0,10\n1,20\n");
    write_file(tmp.path / "bids.csv",
               "id,type,power_mw,energy_mwh,min_total_price\nf1,firm,5,,10\n");
    write_file(tmp.path / "scenario.json", R"({
      "time_grid": {"periods_per_day": 2, "num_days": 1, "period_length": 1.0},
      "fleet": [{"id": "g1", "capacity_mw": 50.0, "mttf_h": 50.0, "mttr_h": 10.0}],
      "demand_file": "demand.csv",
      "bids_file": "bids.csv",
      "num_traces": 5,
      "seed": 42,
      "standard": {"metric": "eeu", "k": 3.5},
      "price_grid": {"start": 10.0, "stop": 1.0, "steps": 10}
    })");
    const auto s = load_scenario(tmp.path / "scenario.json");
    REQUIRE(s.grid.total_periods() == 2);
    REQUIRE(s.fleet.size() == 1);
    REQUIRE(s.num_traces == 5);
    REQUIRE(s.seed == 42);
    REQUIRE(s.standard.has_value());
    REQUIRE(s.standard->metric == Metric::eeu);
    REQUIRE(s.standard->k == 3.5);
    REQUIRE(s.price_grid.has_value());
    REQUIRE(s.price_grid->expand().size() == 10);

    const auto bg = build_scenario_background(s);
    REQUIRE(bg.num_traces() == 5);
    const auto bids = load_scenario_bids(s);
    REQUIRE(bids.size() == 1);
}

TEST_CASE("scenario json: standard and econ are mutually exclusive") {
    TempDir tmp;
    write_file(tmp.path / "demand.csv", "period,mwh\n0,10\n");
    write_file(tmp.path / "scenario.json", R"({
      "time_grid": {"periods_per_day": 1, "num_days": 1},
      "demand_file": "demand.csv",
      "num_traces": 1,
      "seed": 1,
      "standard": {"metric": "lole", "k": 3.0},
      "econ": {"voll": 17000.0}
    })");
    REQUIRE_THROWS_AS(load_scenario(tmp.path / "scenario.json"), ConfigError);
}

TEST_CASE("dispatch csv: fig. 1 style dump") {
    TempDir tmp;
    const std::vector<double> depths{5.0, 30.0, 8.0};
    const auto r = dispatch_min_peak(Store{"s", 10.0, 13.0}, depths);
    write_dispatch_csv(tmp.path / "fig.csv", depths, r, "min_peak");
    std::ifstream in(tmp.path / "fig.csv");
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "period,depth_before,depth_after,policy");
    std::getline(in, line);
    REQUIRE(line == "0,5,5,min_peak");
    std::getline(in, line);
    REQUIRE(line == "1,30,20,min_peak");
}

TEST_CASE("price grid expansion validates") {
    PriceGridSpec bad{1.0, 2.0, 10};
    REQUIRE_THROWS_AS(bad.expand(), ConfigError);
    PriceGridSpec one{2.0, 1.0, 1};
    REQUIRE_THROWS_AS(one.expand(), ConfigError);
    PriceGridSpec ok{2.0, 1.0, 3};
    const auto grid = ok.expand();
    REQUIRE(grid == std::vector<double>{2.0, 1.5, 1.0});
}
