#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "capsim/auction.hpp"
#include "capsim/efc.hpp"

namespace capsim {

// Auction rule mapping clearing price to target procurement capacity,
// piecewise linear between knots, constant beyond the ends.
struct DemandCurve {
    std::vector<std::pair<double, double>> knots; // (price, capacity_mw)

    void validate() const {
        if (knots.size() < 2) throw ConfigError("demand curve needs at least two knots");
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (!(knots[i].first > knots[i - 1].first))
                throw ConfigError("demand curve prices must be strictly increasing");
            if (!(knots[i].second < knots[i - 1].second))
                throw ConfigError("demand curve capacity must be strictly decreasing in price");
        }
    }

    double capacity_at(double price) const {
        if (price <= knots.front().first) return knots.front().second;
        if (price >= knots.back().first) return knots.back().second;
        for (std::size_t i = 1; i < knots.size(); ++i) {
            if (price <= knots[i].first) {
                const auto& [p0, c0] = knots[i - 1];
                const auto& [p1, c1] = knots[i];
                return c0 + (c1 - c0) * (price - p0) / (p1 - p0);
            }
        }
        return knots.back().second;
    }
};

struct EconParams {
    double voll = 0.0;                      // currency per MWh unserved
    std::optional<double> cone;             // currency per MW per season
    std::optional<DemandCurve> demand_curve;

    void validate() const {
        if (!(voll > 0.0)) throw ConfigError("VOLL must be > 0");
        if (cone && !(*cone > 0.0)) throw ConfigError("CONE must be > 0");
        if (demand_curve) demand_curve->validate();
    }
};

// Overall economic cost: unserved energy valued at VOLL plus the procurement
// cost of the resource set.
inline double total_cost(const ResourceSet& resources, const ShortfallEnsemble& background,
                         const EconParams& econ, double procurement_cost) {
    econ.validate();
    return econ.voll * rho(resources, background, Metric::eeu) + procurement_cost;
}

struct OptimalFirmResult {
    double firm_mw = 0.0;
    double total_cost = 0.0;
    double lole_h = 0.0;
    double eeu_mwh = 0.0;
    double cost_slope = 0.0; // c'(y*) by centered difference
    bool boundary = false;   // optimum pinned at the search bracket edge
};

// Minimises voll * EEU(y) + cost_fn(y) over firm capacity y. EEU(y) is convex
// and cost_fn is required convex increasing, so golden-section search on
// [0, max depth] finds the optimum. The stationarity certificate
// LOLE(y*) ~= c'(y*)/VOLL is reported through lole_h and cost_slope.
inline OptimalFirmResult optimal_firm(const ShortfallEnsemble& background,
                                      const EconParams& econ,
                                      const std::function<double(double)>& cost_fn,
                                      double tol_mw = 0.5, double slope_step_mw = 1.0) {
    econ.validate();
    background.validate();
    if (!(tol_mw > 0.0)) throw ConfigError("optimal_firm tolerance must be > 0");

    const NettedEnsemble netted = net_resources(ResourceSet{}, background);
    double max_depth = 0.0;
    for (const auto& trace : netted.depths)
        for (double v : trace) max_depth = std::max(max_depth, v);

    const auto g = [&](double y) {
        return econ.voll * risk_on_netted(netted, {}, y).eeu_mwh + cost_fn(y);
    };

    double lo = 0.0, hi = max_depth;
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - phi * (hi - lo), d = lo + phi * (hi - lo);
    double gc = g(c), gd = g(d);
    while (hi - lo > tol_mw) {
        if (gc <= gd) {
            hi = d;
            d = c;
            gd = gc;
            c = hi - phi * (hi - lo);
            gc = g(c);
        } else {
            lo = c;
            c = d;
            gc = gd;
            d = lo + phi * (hi - lo);
            gd = g(d);
        }
    }
    OptimalFirmResult r;
    r.firm_mw = 0.5 * (lo + hi);
    const auto rep = risk_on_netted(netted, {}, r.firm_mw);
    r.total_cost = econ.voll * rep.eeu_mwh + cost_fn(r.firm_mw);
    r.lole_h = rep.lole_h;
    r.eeu_mwh = rep.eeu_mwh;
    r.cost_slope =
        (cost_fn(r.firm_mw + slope_step_mw) - cost_fn(std::max(0.0, r.firm_mw - slope_step_mw))) /
        (slope_step_mw + std::min(slope_step_mw, r.firm_mw));
    r.boundary = r.firm_mw <= tol_mw || r.firm_mw >= max_depth - tol_mw;
    return r;
}

// Descending clock variant where the procurement target follows the demand
// curve: at each price step the auction compares the remaining offered EFC
// with curve(price) and clears at the last price where the offer still covers
// the target. The clearing price is the implied cost of new entry.
inline AuctionOutcome clear_with_demand_curve(const std::vector<Bid>& bids,
                                              const ShortfallEnsemble& background,
                                              const EconParams& econ,
                                              const std::vector<double>& price_grid,
                                              const std::map<std::string, double>* efc_in = nullptr,
                                              const AuctionConfig& cfg = {}) {
    using namespace auction_detail;
    econ.validate();
    if (!econ.demand_curve) throw ConfigError("demand-curve clearing needs a demand curve");
    validate_bids(bids);
    if (price_grid.empty()) throw ConfigError("demand-curve clearing needs a price grid");
    for (std::size_t j = 1; j < price_grid.size(); ++j)
        if (!(price_grid[j] < price_grid[j - 1]))
            throw ConfigError("price grid must be strictly decreasing");
    const DemandCurve& curve = *econ.demand_curve;

    std::map<std::string, double> efc;
    if (efc_in) {
        efc = *efc_in;
        for (const auto& b : bids)
            if (!efc.count(b.id)) throw ConfigError("missing EFC for bid " + b.id);
    } else {
        // Initial estimates against firm capacity at the opening target.
        efc = efc_map_against(bids, {}, curve.capacity_at(price_grid.front()), background);
    }

    auto offered_at = [&](double price, std::set<std::string>& in) {
        in.clear();
        double offered = 0.0;
        for (const auto& b : bids) {
            const double e = efc.at(b.id);
            if (e > 0.0 && b.min_total_price / e <= price) {
                in.insert(b.id);
                offered += e;
            }
        }
        return offered;
    };

    std::set<std::string> current;
    double offered = offered_at(price_grid.front(), current);
    if (offered < curve.capacity_at(price_grid.front()))
        throw InfeasibleError("offered EFC never reaches the demand curve");

    std::size_t clear_idx = 0;
    std::set<std::string> next;
    for (std::size_t j = 1; j < price_grid.size(); ++j) {
        const double next_offered = offered_at(price_grid[j], next);
        if (next_offered < curve.capacity_at(price_grid[j])) break;
        current = next;
        clear_idx = j;
    }

    AuctionOutcome out;
    out.mode = "demandcurve";
    out.metric = Metric::eeu;
    out.standard_k = curve.capacity_at(price_grid[clear_idx]); // target capacity at clearing
    Admission adm;
    for (const Bid* b : merit_order(bids, efc))
        if (current.count(b->id)) adm.accepted.push_back(b->id);
    adm.clearing_price = price_grid[clear_idx];
    adm.risk = rho(bids_to_set(bids, current), background, Metric::eeu);
    out.iterations = 1;
    finalize(out, bids, efc, adm, background, cfg);
    return out;
}

// One member of a generation-only resource family: a resource set plus an
// optional fixed per-period generation profile (e.g. solar output).
struct GenerationMix {
    double param = 0.0;
    ResourceSet resources;
    std::vector<double> profile_mw;
};

struct OneOneReport {
    struct Point {
        double param;
        double eeu_mwh;
        double lole_h;
    };
    std::vector<Point> points;
    double eeu_range = 0.0;
    double lole_range_h = 0.0;
    double kendall_tau = 0.0; // tau-b concordance between EEU and LOLE
    bool flat_lole = false;   // LOLE unchanged while EEU varies
    double tolerance = 0.0;
    bool one_one = false;
};

// Samples a generation-only family and reports whether LOLE moves one-one
// with EEU across it (the precondition for pivoting the EEU-economic
// criterion to an LOLE standard). Concordance is measured by Kendall's
// tau-b; a family whose EEU varies while LOLE stays flat is the canonical
// violation.
inline OneOneReport check_one_one(const ShortfallEnsemble& background,
                                  const std::vector<GenerationMix>& family,
                                  double tolerance = 0.1) {
    if (family.size() < 2) throw ConfigError("one-one check needs at least two family members");
    OneOneReport rep;
    rep.tolerance = tolerance;
    for (const auto& mix : family) {
        if (mix.resources.has_stores())
            throw ConfigError("one-one correspondence is defined for generation-only families");
        const auto netted = net_resources(
            mix.resources, background, mix.profile_mw.empty() ? nullptr : &mix.profile_mw);
        const auto risk = risk_on_netted(netted, {});
        rep.points.push_back({mix.param, risk.eeu_mwh, risk.lole_h});
    }

    double e_lo = rep.points[0].eeu_mwh, e_hi = e_lo;
    double l_lo = rep.points[0].lole_h, l_hi = l_lo;
    for (const auto& p : rep.points) {
        e_lo = std::min(e_lo, p.eeu_mwh);
        e_hi = std::max(e_hi, p.eeu_mwh);
        l_lo = std::min(l_lo, p.lole_h);
        l_hi = std::max(l_hi, p.lole_h);
    }
    rep.eeu_range = e_hi - e_lo;
    rep.lole_range_h = l_hi - l_lo;

    const double e_tie = 1e-9 * std::max(1.0, e_hi);
    const double l_tie = 1e-9 * std::max(1.0, l_hi);
    long concordant = 0, discordant = 0, ties_e = 0, ties_l = 0, n0 = 0;
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        for (std::size_t j = i + 1; j < rep.points.size(); ++j) {
            ++n0;
            const double de = rep.points[i].eeu_mwh - rep.points[j].eeu_mwh;
            const double dl = rep.points[i].lole_h - rep.points[j].lole_h;
            const bool te = std::abs(de) <= e_tie;
            const bool tl = std::abs(dl) <= l_tie;
            if (te) ++ties_e;
            if (tl) ++ties_l;
            if (te || tl) continue;
            if (de * dl > 0.0)
                ++concordant;
            else
                ++discordant;
        }
    }
    const double denom = std::sqrt(double(n0 - ties_e)) * std::sqrt(double(n0 - ties_l));
    rep.kendall_tau = denom > 0.0 ? double(concordant - discordant) / denom : 0.0;
    rep.flat_lole = rep.lole_range_h <= l_tie && rep.eeu_range > e_tie;

    if (rep.eeu_range <= e_tie && rep.lole_range_h <= l_tie)
        rep.one_one = true; // degenerate family, nothing varies
    else
        rep.one_one = !rep.flat_lole && rep.kendall_tau >= 1.0 - tolerance;
    return rep;
}

} // namespace capsim
