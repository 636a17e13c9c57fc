#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capsim/auction.hpp"
#include "capsim/diagnostics.hpp"
#include "capsim/economics.hpp"
#include "capsim/risk.hpp"
#include "capsim/storage_dispatch.hpp"
#include "capsim/system_model.hpp"

namespace capsim {

// All emitted numbers are rounded to a fixed precision so that repeated runs
// with the same scenario and seed produce byte-identical artifacts.
inline double round_sig(double x, int digits = 6) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double mag =
        std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::fabs(x)))));
    return std::round(x * mag) / mag;
}

inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", round_sig(x));
    return buf;
}

struct StandardSpec {
    Metric metric = Metric::eeu;
    double k = 0.0;
};

struct PriceGridSpec {
    double start = 0.0;
    double stop = 0.0;
    int steps = 0;

    std::vector<double> expand() const {
        if (steps < 2 || !(start > stop) || !(stop >= 0.0))
            throw ConfigError("price grid needs start > stop >= 0 and at least two steps");
        std::vector<double> grid(static_cast<std::size_t>(steps));
        for (int i = 0; i < steps; ++i)
            grid[static_cast<std::size_t>(i)] = start + (stop - start) * i / (steps - 1);
        return grid;
    }
};

struct Scenario {
    TimeGrid grid;
    std::vector<GeneratorUnit> fleet;
    std::filesystem::path base_dir;
    std::string demand_file;
    std::string bids_file; // optional
    int num_traces = 100;
    std::uint64_t seed = 1;
    std::optional<StandardSpec> standard;
    std::optional<EconParams> econ;
    std::string demand_curve_file; // optional, resolved under econ
    std::optional<PriceGridSpec> price_grid;

    std::filesystem::path resolve(const std::string& name) const { return base_dir / name; }
};

namespace io_detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + " from '" + s + "'");
    }
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open file: " + path.string());
    return in;
}

inline std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' || s.back() == ' ')) s.pop_back();
    return s;
}

} // namespace io_detail

// Demand CSV: header `period,mwh`, one row per period, 0-based period index.
inline DemandTrace load_demand_csv(const std::filesystem::path& path, const TimeGrid& grid) {
    auto in = io_detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || io_detail::trimmed(line) != "period,mwh")
        throw ConfigError(path.string() + ": expected header 'period,mwh'");
    DemandTrace trace;
    trace.label = path.filename().string();
    int expect = 0;
    while (std::getline(in, line)) {
        line = io_detail::trimmed(line);
        if (line.empty()) continue;
        const auto fields = io_detail::split_csv_line(line);
        if (fields.size() != 2) throw ConfigError(path.string() + ": malformed row '" + line + "'");
        const int period = static_cast<int>(io_detail::parse_double(fields[0], "period index"));
        if (period != expect)
            throw ConfigError(path.string() + ": period indices must be 0,1,2,... (got " +
                              fields[0] + ")");
        trace.mwh.push_back(io_detail::parse_double(fields[1], "demand mwh"));
        ++expect;
    }
    trace.validate(grid);
    return trace;
}

inline void write_demand_csv(const std::filesystem::path& path, const DemandTrace& trace) {
    std::ofstream out(path);
    out << "period,mwh\n";
    for (std::size_t t = 0; t < trace.mwh.size(); ++t)
        out << t << "," << format_number(trace.mwh[t]) << "\n";
}

// Bid CSV: header `id,type,power_mw,energy_mwh,min_total_price`; type is
// `firm` (energy empty or 0) or `store`.
inline std::vector<Bid> load_bids_csv(const std::filesystem::path& path) {
    auto in = io_detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) ||
        io_detail::trimmed(line) != "id,type,power_mw,energy_mwh,min_total_price")
        throw ConfigError(path.string() +
                          ": expected header 'id,type,power_mw,energy_mwh,min_total_price'");
    std::vector<Bid> bids;
    while (std::getline(in, line)) {
        line = io_detail::trimmed(line);
        if (line.empty()) continue;
        const auto fields = io_detail::split_csv_line(line);
        if (fields.size() != 5) throw ConfigError(path.string() + ": malformed row '" + line + "'");
        Bid b;
        b.id = fields[0];
        if (fields[1] == "firm")
            b.kind = BidKind::firm;
        else if (fields[1] == "store")
            b.kind = BidKind::store;
        else
            throw ConfigError(path.string() + ": unknown bid type '" + fields[1] + "'");
        b.power_mw = io_detail::parse_double(fields[2], "power_mw");
        b.energy_mwh = fields[3].empty() ? 0.0 : io_detail::parse_double(fields[3], "energy_mwh");
        b.min_total_price = io_detail::parse_double(fields[4], "min_total_price");
        b.validate();
        bids.push_back(std::move(b));
    }
    return bids;
}

inline void write_bids_csv(const std::filesystem::path& path, const std::vector<Bid>& bids) {
    std::ofstream out(path);
    out << "id,type,power_mw,energy_mwh,min_total_price\n";
    for (const auto& b : bids) {
        out << b.id << "," << (b.kind == BidKind::firm ? "firm" : "store") << ","
            << format_number(b.power_mw) << ",";
        if (b.kind == BidKind::store) out << format_number(b.energy_mwh);
        out << "," << format_number(b.min_total_price) << "\n";
    }
}

// Demand-curve CSV: header `price,capacity_mw`, knots with strictly
// increasing price and strictly decreasing capacity.
inline DemandCurve load_demand_curve_csv(const std::filesystem::path& path) {
    auto in = io_detail::open_input(path);
    std::string line;
    if (!std::getline(in, line) || io_detail::trimmed(line) != "price,capacity_mw")
        throw ConfigError(path.string() + ": expected header 'price,capacity_mw'");
    DemandCurve curve;
    while (std::getline(in, line)) {
        line = io_detail::trimmed(line);
        if (line.empty()) continue;
        const auto fields = io_detail::split_csv_line(line);
        if (fields.size() != 2) throw ConfigError(path.string() + ": malformed row '" + line + "'");
        curve.knots.emplace_back(io_detail::parse_double(fields[0], "price"),
                                 io_detail::parse_double(fields[1], "capacity_mw"));
    }
    curve.validate();
    return curve;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    auto in = io_detail::open_input(path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        Scenario s;
        s.base_dir = std::filesystem::absolute(path).parent_path();
        const auto& tg = j.at("time_grid");
        s.grid.periods_per_day = tg.at("periods_per_day").get<int>();
        s.grid.num_days = tg.at("num_days").get<int>();
        s.grid.period_length_h = tg.value("period_length", 1.0);
        s.grid.validate();
        for (const auto& u : j.value("fleet", nlohmann::json::array())) {
            GeneratorUnit g;
            g.id = u.at("id").get<std::string>();
            g.capacity_mw = u.at("capacity_mw").get<double>();
            g.mttf_h = u.at("mttf_h").get<double>();
            g.mttr_h = u.at("mttr_h").get<double>();
            g.validate();
            s.fleet.push_back(std::move(g));
        }
        s.demand_file = j.at("demand_file").get<std::string>();
        s.bids_file = j.value("bids_file", "");
        s.num_traces = j.at("num_traces").get<int>();
        s.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("standard")) {
            StandardSpec std_spec;
            std_spec.metric = metric_from_string(j["standard"].at("metric").get<std::string>());
            std_spec.k = j["standard"].at("k").get<double>();
            s.standard = std_spec;
        }
        if (j.contains("econ")) {
            EconParams econ;
            econ.voll = j["econ"].at("voll").get<double>();
            if (j["econ"].contains("cone")) econ.cone = j["econ"]["cone"].get<double>();
            s.demand_curve_file = j["econ"].value("demand_curve_file", "");
            if (!s.demand_curve_file.empty())
                econ.demand_curve = load_demand_curve_csv(s.resolve(s.demand_curve_file));
            econ.validate();
            s.econ = econ;
        }
        if (s.standard && s.econ)
            throw ConfigError(path.string() +
                              ": a scenario selects exactly one of standard or econ");
        if (j.contains("price_grid")) {
            PriceGridSpec g;
            g.start = j["price_grid"].at("start").get<double>();
            g.stop = j["price_grid"].at("stop").get<double>();
            g.steps = j["price_grid"].at("steps").get<int>();
            g.expand(); // validates
            s.price_grid = g;
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

inline ShortfallEnsemble build_scenario_background(const Scenario& s) {
    const DemandTrace demand = load_demand_csv(s.resolve(s.demand_file), s.grid);
    return build_background(s.fleet, demand, s.grid, s.num_traces, s.seed);
}

inline std::vector<Bid> load_scenario_bids(const Scenario& s) {
    if (s.bids_file.empty()) throw ConfigError("scenario has no bids_file");
    return load_bids_csv(s.resolve(s.bids_file));
}

// ---- report serialization ----

inline nlohmann::json risk_to_json(const RiskReport& r) {
    return {{"lole_h", round_sig(r.lole_h)},
            {"eeu_mwh", round_sig(r.eeu_mwh)},
            {"num_traces", r.per_trace.size()}};
}

inline void write_risk_csv(const std::filesystem::path& path, const RiskReport& r) {
    std::ofstream out(path);
    out << "trace,lol_periods,unserved_mwh\n";
    for (std::size_t k = 0; k < r.per_trace.size(); ++k)
        out << k << "," << r.per_trace[k].lol_periods << ","
            << format_number(r.per_trace[k].unserved_mwh) << "\n";
}

inline nlohmann::json outcome_to_json(const AuctionOutcome& o) {
    nlohmann::json j{{"mode", o.mode},
                     {"metric", metric_name(o.metric)},
                     {"standard_k", round_sig(o.standard_k)},
                     {"accepted", o.accepted},
                     {"clearing_price", round_sig(o.clearing_price)},
                     {"total_cost", round_sig(o.total_cost)},
                     {"accepted_reserve_total", round_sig(o.accepted_reserve_total)},
                     {"risk_achieved", round_sig(o.risk_achieved)},
                     {"iterations", o.iterations},
                     {"converged", o.converged},
                     {"lumpy_adjusted", o.lumpy_adjusted},
                     {"whole_set_storage_efc_mw", round_sig(o.whole_set_storage_efc_mw)},
                     {"sum_marginal_storage_efc_mw", round_sig(o.sum_marginal_storage_efc_mw)}};
    nlohmann::json efc = nlohmann::json::object();
    for (const auto& [id, v] : o.efc_mw) efc[id] = round_sig(v);
    j["efc_mw"] = efc;
    nlohmann::json pay = nlohmann::json::object();
    for (const auto& [id, v] : o.payments) pay[id] = round_sig(v);
    j["payments"] = pay;
    return j;
}

inline void write_outcome_csv(const std::filesystem::path& path, const AuctionOutcome& o,
                              const std::vector<Bid>& bids) {
    std::ofstream out(path);
    out << "id,type,efc_mw,unit_price,accepted,payment\n";
    for (const auto& b : bids) {
        const bool acc = o.is_accepted(b.id);
        out << b.id << "," << (b.kind == BidKind::firm ? "firm" : "store") << ","
            << format_number(o.efc_mw.count(b.id) ? o.efc_mw.at(b.id) : 0.0) << ","
            << format_number(o.unit_price.count(b.id) ? o.unit_price.at(b.id) : 0.0) << ","
            << (acc ? 1 : 0) << "," << format_number(acc ? o.payments.at(b.id) : 0.0) << "\n";
    }
}

inline void write_continuity_csv(const std::filesystem::path& path, const ContinuityScan& scan) {
    std::ofstream out(path);
    out << "index,added_id,cumulative_efc_mw,residual_eeu_mwh\n";
    for (std::size_t m = 0; m < scan.points.size(); ++m)
        out << m << "," << scan.points[m].added_id << ","
            << format_number(scan.points[m].cumulative_efc_mw) << ","
            << format_number(scan.points[m].residual_eeu_mwh) << "\n";
}

inline void write_smoothness_csv(const std::filesystem::path& path, const SmoothnessGrid& grid) {
    std::ofstream out(path);
    out << "power_i_mw,power_j_mw,deviation_pct\n";
    for (std::size_t i = 0; i < grid.powers_mw.size(); ++i)
        for (std::size_t j = 0; j < grid.powers_mw.size(); ++j)
            out << format_number(grid.powers_mw[i]) << "," << format_number(grid.powers_mw[j])
                << "," << format_number(grid.deviation_pct[i][j]) << "\n";
}

// Fig. 1-style dump: per-period depths before and after one dispatch policy.
inline void write_dispatch_csv(const std::filesystem::path& path,
                               const std::vector<double>& depths_before,
                               const DispatchResult& result, const std::string& policy) {
    std::ofstream out(path);
    out << "period,depth_before,depth_after,policy\n";
    for (std::size_t t = 0; t < depths_before.size(); ++t)
        out << t << "," << format_number(depths_before[t]) << ","
            << format_number(result.residual_mw[t]) << "," << policy << "\n";
}

inline void write_one_one_csv(const std::filesystem::path& path, const OneOneReport& rep) {
    std::ofstream out(path);
    out << "param,eeu_mwh,lole_h\n";
    for (const auto& p : rep.points)
        out << format_number(p.param) << "," << format_number(p.eeu_mwh) << ","
            << format_number(p.lole_h) << "\n";
}

inline nlohmann::json one_one_to_json(const OneOneReport& rep) {
    return {{"one_one", rep.one_one},
            {"kendall_tau", round_sig(rep.kendall_tau)},
            {"flat_lole", rep.flat_lole},
            {"eeu_range_mwh", round_sig(rep.eeu_range)},
            {"lole_range_h", round_sig(rep.lole_range_h)},
            {"tolerance", round_sig(rep.tolerance)},
            {"points", rep.points.size()}};
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

} // namespace capsim
