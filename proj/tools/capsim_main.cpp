// capsim command line: scenario-driven capacity adequacy simulation, EFC
// valuation, and capacity-market clearing.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "capsim/capsim.hpp"

namespace fs = std::filesystem;
using namespace capsim;

namespace {

struct CommonOpts {
    std::string scenario_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    double tol_mw = 0.5;
    std::string metric; // optional override of the scenario standard's metric
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--scenario", opts.scenario_path, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out_dir, "Output directory (created if missing)");
    cmd->add_option("--seed", opts.seed, "Override the scenario seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--threads", opts.threads, "Worker thread cap (0 = all cores)");
    cmd->add_option("--tol-mw", opts.tol_mw, "Bisection tolerance in MW");
    cmd->add_option("--metric", opts.metric, "Override the standard's metric (lole|eeu)")
        ->check(CLI::IsMember({"lole", "eeu"}));
}

struct Loaded {
    Scenario scenario;
    ShortfallEnsemble background;
    fs::path out;
};

Loaded setup(const CommonOpts& opts) {
    set_max_threads(opts.threads);
    Loaded l{load_scenario(opts.scenario_path), {}, fs::path(opts.out_dir)};
    if (opts.seed_set) l.scenario.seed = opts.seed;
    fs::create_directories(l.out);
    l.background = build_scenario_background(l.scenario);
    return l;
}

StandardSpec require_standard(const Scenario& s, const CommonOpts& opts) {
    if (!s.standard)
        throw ConfigError("this subcommand needs a 'standard' block in the scenario");
    StandardSpec spec = *s.standard;
    if (!opts.metric.empty()) spec.metric = metric_from_string(opts.metric);
    return spec;
}

EconParams require_econ(const Scenario& s) {
    if (!s.econ) throw ConfigError("this subcommand needs an 'econ' block in the scenario");
    return *s.econ;
}

std::vector<double> require_price_grid(const Scenario& s) {
    if (!s.price_grid)
        throw ConfigError("this mode needs a 'price_grid' block in the scenario");
    return s.price_grid->expand();
}

void print_standard_line(const AuctionOutcome& o) {
    std::cout << "standard " << metric_name(o.metric) << " k=" << format_number(o.standard_k)
              << " achieved=" << format_number(o.risk_achieved)
              << (o.risk_achieved <= o.standard_k ? " PASS" : " FAIL") << "\n";
}

int run_risk(const CommonOpts& opts, double firm_mw) {
    const Loaded l = setup(opts);
    ResourceSet r;
    r.firm_mw = firm_mw;
    const RiskReport report = evaluate(r, l.background);
    nlohmann::json j = risk_to_json(report);
    j["firm_mw"] = round_sig(firm_mw);
    j["seed"] = l.scenario.seed;
    write_json(l.out / "risk.json", j);
    write_risk_csv(l.out / "risk_per_trace.csv", report);
    std::cout << "risk lole_h=" << format_number(report.lole_h)
              << " eeu_mwh=" << format_number(report.eeu_mwh) << "\n";
    if (l.scenario.standard) {
        const auto std_spec = *l.scenario.standard;
        const double achieved =
            std_spec.metric == Metric::lole ? report.lole_h : report.eeu_mwh;
        std::cout << "standard " << metric_name(std_spec.metric)
                  << " k=" << format_number(std_spec.k)
                  << " achieved=" << format_number(achieved)
                  << (achieved <= std_spec.k ? " PASS" : " FAIL") << "\n";
    }
    return 0;
}

int run_calibrate(const CommonOpts& opts) {
    const Loaded l = setup(opts);
    const StandardSpec std_spec = require_standard(l.scenario, opts);
    const double y = calibrate_firm(l.background, std_spec.metric, std_spec.k, opts.tol_mw);
    write_json(l.out / "calibrate.json",
               {{"metric", metric_name(std_spec.metric)},
                {"k", round_sig(std_spec.k)},
                {"firm_mw", round_sig(y)},
                {"tol_mw", round_sig(opts.tol_mw)},
                {"seed", l.scenario.seed}});
    std::cout << "calibrated firm_mw=" << format_number(y) << " for "
              << metric_name(std_spec.metric) << "=" << format_number(std_spec.k) << "\n";
    return 0;
}

int run_efc(const CommonOpts& opts) {
    const Loaded l = setup(opts);
    const StandardSpec std_spec = require_standard(l.scenario, opts);
    const auto bids = load_scenario_bids(l.scenario);
    const double y0 = calibrate_firm(l.background, std_spec.metric, std_spec.k, opts.tol_mw);
    ResourceSet base;
    base.firm_mw = y0;

    std::ofstream csv(l.out / "efc.csv");
    csv << "id,method,value_mw,tolerance_mw,derivative\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& b : bids) {
        const auto exact =
            efc_exact(b.as_resource_set(), base, l.background, std_spec.metric, opts.tol_mw);
        const auto marginal = efc_marginal(b.as_resource_set(), base, l.background);
        for (const auto* est : {&exact, &marginal}) {
            csv << b.id << "," << efc_method_name(est->method) << ","
                << format_number(est->value_mw) << "," << format_number(est->tolerance_mw) << ","
                << format_number(est->derivative_used) << "\n";
            rows.push_back({{"id", b.id},
                            {"method", efc_method_name(est->method)},
                            {"value_mw", round_sig(est->value_mw)},
                            {"tolerance_mw", round_sig(est->tolerance_mw)},
                            {"derivative", round_sig(est->derivative_used)}});
        }
    }
    write_json(l.out / "efc.json", {{"base_firm_mw", round_sig(y0)},
                                    {"metric", metric_name(std_spec.metric)},
                                    {"seed", l.scenario.seed},
                                    {"estimates", rows}});
    std::cout << "efc report for " << bids.size() << " bids written\n";
    return 0;
}

int run_clear(const CommonOpts& opts, const std::string& mode, bool lumpy) {
    const Loaded l = setup(opts);
    const auto bids = load_scenario_bids(l.scenario);
    AuctionConfig cfg;
    cfg.efc_tol_mw = opts.tol_mw;

    AuctionOutcome out;
    if (mode == "fixedpoint") {
        const StandardSpec s = require_standard(l.scenario, opts);
        out = clear(bids, l.background, s.metric, s.k, cfg);
    } else if (mode == "naive") {
        const StandardSpec s = require_standard(l.scenario, opts);
        out = clear_naive_firm_efc(bids, l.background, s.metric, s.k, cfg);
    } else if (mode == "clock") {
        const StandardSpec s = require_standard(l.scenario, opts);
        out = descending_clock(bids, l.background, s.metric, s.k, require_price_grid(l.scenario),
                               nullptr, cfg);
    } else if (mode == "demandcurve") {
        out = clear_with_demand_curve(bids, l.background, require_econ(l.scenario),
                                      require_price_grid(l.scenario), nullptr, cfg);
    } else {
        throw ConfigError("unknown clear mode '" + mode + "'");
    }
    if (lumpy) out = lumpy_recheck(out, bids, l.background, cfg);

    write_json(l.out / "outcome.json", outcome_to_json(out));
    write_outcome_csv(l.out / "outcome.csv", out, bids);
    print_standard_line(out);
    std::cout << "accepted=" << out.accepted.size()
              << " clearing_price=" << format_number(out.clearing_price)
              << " total_cost=" << format_number(out.total_cost)
              << " iterations=" << out.iterations << "\n";
    return 0;
}

int run_diagnose(const CommonOpts& opts, double probe_energy, std::vector<double> powers) {
    const Loaded l = setup(opts);
    const StandardSpec std_spec = require_standard(l.scenario, opts);
    const auto bids = load_scenario_bids(l.scenario);
    AuctionConfig cfg;
    cfg.efc_tol_mw = opts.tol_mw;
    const auto outcome = clear(bids, l.background, std_spec.metric, std_spec.k, cfg);

    double target_eeu = std_spec.k;
    if (std_spec.metric == Metric::lole) {
        const double y = calibrate_firm(l.background, Metric::lole, std_spec.k, opts.tol_mw);
        ResourceSet r;
        r.firm_mw = y;
        target_eeu = rho(r, l.background, Metric::eeu);
    }
    const auto scan =
        continuity_scan(bids, l.background, target_eeu, opts.tol_mw, &outcome.efc_mw);
    write_continuity_csv(l.out / "continuity.csv", scan);

    ResourceSet accepted_set;
    for (const auto& id : outcome.accepted)
        accepted_set = accepted_set.merged(auction_detail::find_bid(bids, id).as_resource_set());
    const Scenario& sc = l.scenario;
    const auto grid = smoothness_grid(
        accepted_set, l.background, powers, probe_energy, std_spec.metric, [&](int rep) {
            const DemandTrace demand = load_demand_csv(sc.resolve(sc.demand_file), sc.grid);
            return build_background(sc.fleet, demand, sc.grid, sc.num_traces,
                                    sc.seed + 1000 * static_cast<std::uint64_t>(rep));
        });
    write_smoothness_csv(l.out / "smoothness.csv", grid);

    double max_dev = 0.0;
    for (const auto& row : grid.deviation_pct)
        for (double v : row) max_dev = std::max(max_dev, v);
    write_json(l.out / "diagnose.json",
               {{"target_eeu_mwh", round_sig(scan.target_eeu_mwh)},
                {"max_gap_near_target_mw", round_sig(scan.max_gap_near_target_mw)},
                {"max_smoothness_deviation_pct", round_sig(max_dev)},
                {"noise_floor_pct", round_sig(grid.noise_floor_pct)},
                {"scan_points", scan.points.size()},
                {"seed", l.scenario.seed}});
    std::cout << "continuity max_gap_near_target_mw=" << format_number(scan.max_gap_near_target_mw)
              << " smoothness max_deviation_pct=" << format_number(max_dev) << "\n";
    return 0;
}

int run_economics(const CommonOpts& opts) {
    const Loaded l = setup(opts);
    const EconParams econ = require_econ(l.scenario);

    nlohmann::json j{{"voll", round_sig(econ.voll)}, {"seed", l.scenario.seed}};

    if (econ.cone) {
        const double cone = *econ.cone;
        const auto opt =
            optimal_firm(l.background, econ, [cone](double y) { return cone * y; }, opts.tol_mw);
        j["optimal_firm"] = {{"firm_mw", round_sig(opt.firm_mw)},
                             {"total_cost", round_sig(opt.total_cost)},
                             {"lole_h", round_sig(opt.lole_h)},
                             {"eeu_mwh", round_sig(opt.eeu_mwh)},
                             {"cone_over_voll_h", round_sig(cone / econ.voll)},
                             {"cost_slope", round_sig(opt.cost_slope)},
                             {"boundary", opt.boundary}};
        std::cout << "optimal_firm firm_mw=" << format_number(opt.firm_mw)
                  << " lole_h=" << format_number(opt.lole_h)
                  << " cone/voll=" << format_number(cone / econ.voll) << "\n";
    }

    // One-one correspondence screens over three built-in generation families.
    const NettedEnsemble netted = net_resources(ResourceSet{}, l.background);
    double frontier = 0.0, depth_sum = 0.0;
    long depth_count = 0;
    for (const auto& trace : netted.depths)
        for (double v : trace)
            if (v > 0.0) {
                frontier = std::max(frontier, v);
                depth_sum += v;
                ++depth_count;
            }
    const double mean_depth = depth_count > 0 ? depth_sum / double(depth_count) : 0.0;

    std::vector<GenerationMix> firm_family;
    for (int i = 0; i <= 8; ++i) {
        ResourceSet r;
        r.firm_mw = frontier * i / 8.0;
        firm_family.push_back({double(i), r, {}});
    }
    const auto firm_rep = check_one_one(l.background, firm_family);
    write_one_one_csv(l.out / "one_one_firm.csv", firm_rep);
    j["one_one_firm"] = one_one_to_json(firm_rep);

    std::vector<GenerationMix> vg_family;
    const double vg_cap = std::max(5.0, frontier / 12.0);
    for (int count = 0; count <= 8; ++count) {
        GenerationMix mix;
        mix.param = count;
        for (int i = 0; i < count; ++i)
            mix.resources.generators.push_back(
                GeneratorUnit{"vg" + std::to_string(i), vg_cap, 40.0, 28.0});
        vg_family.push_back(std::move(mix));
    }
    const auto vg_rep = check_one_one(l.background, vg_family);
    write_one_one_csv(l.out / "one_one_vg.csv", vg_rep);
    j["one_one_variable_generation"] = one_one_to_json(vg_rep);

    std::vector<GenerationMix> solar_family;
    const int ppd = l.scenario.grid.periods_per_day;
    const int n = l.scenario.grid.total_periods();
    for (int i = 0; i <= 8; ++i) {
        GenerationMix mix;
        mix.param = i;
        mix.profile_mw.assign(static_cast<std::size_t>(n), 0.0);
        const double amp = 0.4 * mean_depth * i / 8.0;
        for (int t = 0; t < n; ++t) {
            const int hour = t % ppd;
            if (hour >= ppd / 2 - 1 && hour <= ppd / 2 + 1)
                mix.profile_mw[static_cast<std::size_t>(t)] = amp;
        }
        solar_family.push_back(std::move(mix));
    }
    const auto solar_rep = check_one_one(l.background, solar_family);
    write_one_one_csv(l.out / "one_one_midday_solar.csv", solar_rep);
    j["one_one_midday_solar"] = one_one_to_json(solar_rep);

    write_json(l.out / "economics.json", j);
    std::cout << "one_one firm=" << (firm_rep.one_one ? "pass" : "fail")
              << " vg=" << (vg_rep.one_one ? "pass" : "fail")
              << " midday_solar=" << (solar_rep.one_one ? "pass" : "fail") << "\n";
    return 0;
}

int error_exit_code(const std::string& code) {
    if (code == "config") return 2;
    if (code == "infeasible") return 3;
    if (code == "non_convergent") return 4;
    if (code == "flat_risk") return 5;
    if (code == "zero_derivative") return 6;
    if (code == "unreachable_target") return 7;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"capacity adequacy simulation and capacity-market clearing"};
    app.require_subcommand(1);

    CommonOpts risk_opts;
    double risk_firm = 0.0;
    auto* risk_cmd = app.add_subcommand("risk", "Evaluate LOLE/EEU of the background");
    add_common(risk_cmd, risk_opts);
    risk_cmd->add_option("--firm", risk_firm, "Extra firm capacity in MW");

    CommonOpts calib_opts;
    auto* calib_cmd =
        app.add_subcommand("calibrate", "Firm capacity meeting the scenario standard");
    add_common(calib_cmd, calib_opts);

    CommonOpts efc_opts;
    auto* efc_cmd = app.add_subcommand("efc", "Per-bid EFC report against the calibrated base");
    add_common(efc_cmd, efc_opts);

    CommonOpts clear_opts;
    std::string clear_mode = "fixedpoint";
    bool clear_lumpy = false;
    auto* clear_cmd = app.add_subcommand("clear", "Clear the capacity auction");
    add_common(clear_cmd, clear_opts);
    clear_cmd->add_option("--mode", clear_mode, "fixedpoint | naive | clock | demandcurve")
        ->check(CLI::IsMember({"fixedpoint", "naive", "clock", "demandcurve"}));
    clear_cmd->add_flag("--lumpy", clear_lumpy, "Apply the lumpy overshoot recheck");

    CommonOpts diag_opts;
    double probe_energy = 100.0;
    std::vector<double> probe_powers{10.0, 20.0, 30.0, 40.0, 50.0};
    auto* diag_cmd =
        app.add_subcommand("diagnose", "Continuity scan and smoothness grid for the scenario");
    add_common(diag_cmd, diag_opts);
    diag_cmd->add_option("--probe-energy", probe_energy, "Probe store energy in MWh");
    diag_cmd->add_option("--powers", probe_powers, "Probe store powers in MW");

    CommonOpts econ_opts;
    auto* econ_cmd =
        app.add_subcommand("economics", "Optimal firm capacity and one-one correspondence");
    add_common(econ_cmd, econ_opts);

    CLI11_PARSE(app, argc, argv);

    const CommonOpts* opts = nullptr;
    if (risk_cmd->parsed()) opts = &risk_opts;
    if (calib_cmd->parsed()) opts = &calib_opts;
    if (efc_cmd->parsed()) opts = &efc_opts;
    if (clear_cmd->parsed()) opts = &clear_opts;
    if (diag_cmd->parsed()) opts = &diag_opts;
    if (econ_cmd->parsed()) opts = &econ_opts;

    try {
        if (risk_cmd->parsed()) return run_risk(risk_opts, risk_firm);
        if (calib_cmd->parsed()) return run_calibrate(calib_opts);
        if (efc_cmd->parsed()) return run_efc(efc_opts);
        if (clear_cmd->parsed()) return run_clear(clear_opts, clear_mode, clear_lumpy);
        if (diag_cmd->parsed()) return run_diagnose(diag_opts, probe_energy, probe_powers);
        if (econ_cmd->parsed()) return run_economics(econ_opts);
    } catch (const Error& e) {
        nlohmann::json err{{"error", {{"code", e.code()}, {"message", e.what()}}}};
        std::cout << err.dump(2) << "\n";
        if (opts) {
            std::error_code ec;
            fs::create_directories(opts->out_dir, ec);
            if (!ec) write_json(fs::path(opts->out_dir) / "error.json", err);
        }
        return error_exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
