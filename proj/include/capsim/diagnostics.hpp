#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "capsim/auction.hpp"
#include "capsim/efc.hpp"

namespace capsim {

// Residual EEU against cumulative EFC along the merit-order stack. The
// cumulative EFC of each prefix is the firm capacity that substitutes for
// everything added so far at equal EEU, so the traced curve is independent
// of the order in which resources are taken.
struct ContinuityScan {
    struct Point {
        std::string added_id; // empty for the bare-background point
        double cumulative_efc_mw;
        double residual_eeu_mwh;
    };
    std::vector<Point> points;
    double target_eeu_mwh = 0.0;
    double max_gap_near_target_mw = 0.0;
};

inline ContinuityScan continuity_scan(const std::vector<Bid>& bids,
                                      const ShortfallEnsemble& background,
                                      double target_eeu_mwh, double tol_mw = 0.5,
                                      const std::map<std::string, double>* efc_for_order = nullptr,
                                      double window = 0.5) {
    auction_detail::validate_bids(bids);
    if (bids.empty()) throw ConfigError("continuity scan needs at least one bid");
    ContinuityScan scan;
    scan.target_eeu_mwh = target_eeu_mwh;

    std::vector<const Bid*> order;
    if (efc_for_order) {
        order = auction_detail::merit_order(bids, *efc_for_order);
    } else {
        for (const auto& b : bids) order.push_back(&b);
    }

    scan.points.push_back({"", 0.0, rho(ResourceSet{}, background, Metric::eeu)});
    ResourceSet prefix;
    for (const Bid* b : order) {
        prefix = prefix.merged(b->as_resource_set());
        const double eeu = rho(prefix, background, Metric::eeu);
        double cumulative = scan.points.back().cumulative_efc_mw;
        // Whole-set substitution: firm capacity replacing the entire prefix
        // at equal EEU (summed marginal EFCs would be wrong here).
        if (eeu < scan.points.back().residual_eeu_mwh)
            cumulative = efc_exact(prefix, ResourceSet{}, background, Metric::eeu, tol_mw).value_mw;
        scan.points.push_back({b->id, cumulative, eeu});
    }

    const double lo = (1.0 - window) * target_eeu_mwh;
    const double hi = (1.0 + window) * target_eeu_mwh;
    for (std::size_t m = 1; m < scan.points.size(); ++m) {
        const double e1 = scan.points[m].residual_eeu_mwh;
        const double e0 = scan.points[m - 1].residual_eeu_mwh;
        if (e1 > hi || e0 < lo) continue; // segment entirely outside the target band
        scan.max_gap_near_target_mw =
            std::max(scan.max_gap_near_target_mw,
                     scan.points[m].cumulative_efc_mw - scan.points[m - 1].cumulative_efc_mw);
    }
    return scan;
}

// Percentage deviation between the two sides of the smoothness relation
// rho(R u {i,j}) - rho(R u {j}) = rho(R u {i}) - rho(R) for probe stores of a
// common energy and a grid of powers. Exactly symmetric by construction
// (common random numbers), so only the upper triangle is computed.
struct SmoothnessGrid {
    std::vector<double> powers_mw;
    double probe_energy_mwh = 0.0;
    std::vector<std::vector<double>> deviation_pct; // [i][j]
    double noise_floor_pct = 0.0;
};

inline SmoothnessGrid smoothness_grid(
    const ResourceSet& base, const ShortfallEnsemble& background, std::vector<double> powers,
    double probe_energy_mwh, Metric metric = Metric::eeu,
    const std::function<ShortfallEnsemble(int)>& regenerate_background = {}) {
    base.validate();
    if (powers.empty()) throw ConfigError("smoothness grid needs at least one probe power");

    SmoothnessGrid grid;
    grid.powers_mw = powers;
    grid.probe_energy_mwh = probe_energy_mwh;
    const std::size_t n = powers.size();
    grid.deviation_pct.assign(n, std::vector<double>(n, 0.0));

    auto with_probes = [&](const ShortfallEnsemble& bg, double p_i, double p_j) {
        ResourceSet r = base;
        if (p_i > 0.0) r.stores.push_back(Store{"::probe_a", p_i, probe_energy_mwh});
        if (p_j > 0.0) r.stores.push_back(Store{"::probe_b", p_j, probe_energy_mwh});
        return rho(r, bg, metric);
    };
    auto deviation = [&](const ShortfallEnsemble& bg, double p_i, double p_j) {
        const double r0 = with_probes(bg, 0.0, 0.0);
        const double ri = with_probes(bg, p_i, 0.0);
        const double rj = with_probes(bg, 0.0, p_j);
        const double rij = with_probes(bg, p_i, p_j);
        const double lhs = rij - rj;
        const double rhs = ri - r0;
        const double denom = std::max(std::abs(lhs), std::abs(rhs));
        if (denom <= 1e-12) return 0.0;
        return 100.0 * std::abs(lhs - rhs) / denom;
    };

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const double d = deviation(background, powers[i], powers[j]);
            grid.deviation_pct[i][j] = d;
            grid.deviation_pct[j][i] = d;
        }

    if (regenerate_background) {
        // Noise floor: the smallest cell repeated under independent
        // background draws; spread across repeats estimates the Monte Carlo
        // noise on a deviation, and cells below it are reported as zero.
        const double base_dev = grid.deviation_pct[0][0];
        double lo = base_dev, hi = base_dev;
        for (int rep = 1; rep <= 3; ++rep) {
            const ShortfallEnsemble bg = regenerate_background(rep);
            const double d = deviation(bg, powers[0], powers[0]);
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        grid.noise_floor_pct = hi - lo;
        for (auto& row : grid.deviation_pct)
            for (auto& v : row)
                if (v < grid.noise_floor_pct) v = 0.0;
    }
    return grid;
}

} // namespace capsim
