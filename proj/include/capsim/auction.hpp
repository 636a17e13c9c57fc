#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "capsim/efc.hpp"

namespace capsim {

enum class BidKind { firm, store };

// A capacity offer: a firm block or a store, available for a minimum total
// price. One bid per resource id.
struct Bid {
    std::string id;
    BidKind kind = BidKind::firm;
    double power_mw = 0.0;
    double energy_mwh = 0.0; // stores only
    double min_total_price = 0.0;

    ResourceSet as_resource_set() const {
        ResourceSet r;
        if (kind == BidKind::firm)
            r.firm_mw = power_mw;
        else
            r.stores.push_back(Store{id, power_mw, energy_mwh});
        return r;
    }

    void validate() const {
        if (id.empty()) throw ConfigError("bid id must be non-empty");
        if (!(power_mw > 0.0)) throw ConfigError("bid " + id + ": power must be > 0");
        if (kind == BidKind::store && !(energy_mwh > 0.0))
            throw ConfigError("bid " + id + ": store energy must be > 0");
        if (min_total_price < 0.0 || !std::isfinite(min_total_price))
            throw ConfigError("bid " + id + ": price must be >= 0");
    }
};

struct AuctionConfig {
    int max_iter = 20;
    double efc_tol_mw = 0.05;  // tolerance of the EFC bisections
    double lumpy_share = 0.25; // accepted-EFC share above which a resource is "large"
};

struct AuctionOutcome {
    std::string mode = "fixedpoint"; // fixedpoint | naive | clock | demandcurve
    Metric metric = Metric::eeu;
    double standard_k = 0.0;

    std::vector<std::string> accepted; // admission order
    double clearing_price = 0.0;       // per MW of EFC, pay-as-clear
    std::map<std::string, double> efc_mw;     // every bid, vs the final set
    std::map<std::string, double> unit_price; // min_total_price / efc
    std::map<std::string, double> payments;   // accepted only: p * efc
    double total_cost = 0.0;            // sum of payments
    double accepted_reserve_total = 0.0; // sum of accepted min_total_price
    double risk_achieved = 0.0;
    int iterations = 0;
    bool converged = true;
    bool lumpy_adjusted = false;

    // Nonadditivity report: firm capacity substituting for all accepted
    // stores at once, against the sum of their marginal EFCs.
    double whole_set_storage_efc_mw = 0.0;
    double sum_marginal_storage_efc_mw = 0.0;

    bool is_accepted(const std::string& id) const {
        return std::find(accepted.begin(), accepted.end(), id) != accepted.end();
    }
};

namespace auction_detail {

inline void validate_bids(const std::vector<Bid>& bids) {
    std::set<std::string> ids;
    for (const auto& b : bids) {
        b.validate();
        if (!ids.insert(b.id).second) throw ConfigError("duplicate bid id: " + b.id);
    }
}

inline const Bid& find_bid(const std::vector<Bid>& bids, const std::string& id) {
    for (const auto& b : bids)
        if (b.id == id) return b;
    throw ConfigError("unknown bid id: " + id);
}

inline ResourceSet bids_to_set(const std::vector<Bid>& bids, const std::set<std::string>& ids,
                               double extra_firm_mw = 0.0) {
    ResourceSet r;
    r.firm_mw = extra_firm_mw;
    for (const auto& b : bids) {
        if (!ids.count(b.id)) continue;
        if (b.kind == BidKind::firm)
            r.firm_mw += b.power_mw;
        else
            r.stores.push_back(Store{b.id, b.power_mw, b.energy_mwh});
    }
    return r;
}

// EFCs of every bid against the candidate set: marginal EFC for stores (the
// candidate minus the bid itself when it is a member), the block size for
// firm bids. `proxy_firm_mw` carries the firm-only initial estimate used
// before any set has been accepted.
inline std::map<std::string, double> efc_map_against(const std::vector<Bid>& bids,
                                                     const std::set<std::string>& candidate,
                                                     double proxy_firm_mw,
                                                     const ShortfallEnsemble& background) {
    std::map<std::string, double> efc;
    for (const auto& b : bids) {
        if (b.kind == BidKind::firm) {
            efc[b.id] = b.power_mw;
            continue;
        }
        std::set<std::string> others = candidate;
        others.erase(b.id);
        const ResourceSet base = bids_to_set(bids, others, proxy_firm_mw);
        efc[b.id] = efc_marginal(b.as_resource_set(), base, background).value_mw;
    }
    return efc;
}

struct Admission {
    std::vector<std::string> accepted;
    double clearing_price = 0.0;
    double risk = 0.0;
};

inline std::vector<const Bid*> merit_order(const std::vector<Bid>& bids,
                                           const std::map<std::string, double>& efc) {
    std::vector<const Bid*> order;
    for (const auto& b : bids)
        if (efc.at(b.id) > 0.0) order.push_back(&b);
    std::sort(order.begin(), order.end(), [&](const Bid* a, const Bid* b) {
        const double ua = a->min_total_price / efc.at(a->id);
        const double ub = b->min_total_price / efc.at(b->id);
        if (ua != ub) return ua < ub;
        return a->id < b->id;
    });
    return order;
}

// Walks the merit-order stack, re-evaluating the full risk metric after
// every admission (EFCs are not additive, so the stack position alone cannot
// decide feasibility).
inline Admission admit(const std::vector<Bid>& bids, const std::map<std::string, double>& efc,
                       const ShortfallEnsemble& background, Metric metric, double k) {
    Admission adm;
    std::set<std::string> taken;
    adm.risk = rho(ResourceSet{}, background, metric);
    if (adm.risk <= k) return adm;
    for (const Bid* b : merit_order(bids, efc)) {
        taken.insert(b->id);
        adm.accepted.push_back(b->id);
        adm.clearing_price = b->min_total_price / efc.at(b->id);
        adm.risk = rho(bids_to_set(bids, taken), background, metric);
        if (adm.risk <= k) return adm;
    }
    throw InfeasibleError("standard " + std::string(metric_name(metric)) + " <= " +
                          std::to_string(k) + " cannot be met by the offered resources");
}

inline void finalize(AuctionOutcome& out, const std::vector<Bid>& bids,
                     const std::map<std::string, double>& efc, const Admission& adm,
                     const ShortfallEnsemble& background, const AuctionConfig& cfg) {
    out.accepted = adm.accepted;
    out.clearing_price = adm.clearing_price;
    out.efc_mw = efc;
    out.risk_achieved = adm.risk;
    for (const auto& [id, e] : efc)
        out.unit_price[id] = e > 0.0 ? find_bid(bids, id).min_total_price / e
                                     : std::numeric_limits<double>::infinity();
    std::set<std::string> accepted_stores;
    for (const auto& id : adm.accepted) {
        const Bid& b = find_bid(bids, id);
        out.payments[id] = out.clearing_price * efc.at(id);
        out.total_cost += out.payments[id];
        out.accepted_reserve_total += b.min_total_price;
        if (b.kind == BidKind::store) {
            accepted_stores.insert(id);
            out.sum_marginal_storage_efc_mw += efc.at(id);
        }
    }
    if (!accepted_stores.empty()) {
        std::set<std::string> all_accepted(adm.accepted.begin(), adm.accepted.end());
        std::set<std::string> firm_part = all_accepted;
        for (const auto& id : accepted_stores) firm_part.erase(id);
        ResourceSet bundle;
        for (const auto& id : accepted_stores) {
            const Bid& b = find_bid(bids, id);
            bundle.stores.push_back(Store{b.id, b.power_mw, b.energy_mwh});
        }
        out.whole_set_storage_efc_mw =
            efc_exact(bundle, bids_to_set(bids, firm_part), background, out.metric,
                      cfg.efc_tol_mw)
                .value_mw;
    }
}

inline AuctionOutcome clear_engine(const std::vector<Bid>& bids,
                                   const ShortfallEnsemble& background, Metric metric,
                                   double k, const AuctionConfig& cfg, bool single_pass) {
    validate_bids(bids);
    background.validate();

    AuctionOutcome out;
    out.mode = single_pass ? "naive" : "fixedpoint";
    out.metric = metric;
    out.standard_k = k;

    std::set<std::string> all_ids;
    for (const auto& b : bids) all_ids.insert(b.id);
    if (rho(bids_to_set(bids, all_ids), background, metric) > k)
        throw InfeasibleError("standard unreachable even with every bid accepted");

    if (rho(ResourceSet{}, background, metric) <= k) {
        // The background alone meets the standard: nothing to procure.
        out.risk_achieved = rho(ResourceSet{}, background, metric);
        return out;
    }

    // Initial candidate for EFC estimation: the firm capacity that would
    // itself just meet the standard (current GB practice).
    const double proxy = calibrate_firm(background, metric, k, cfg.efc_tol_mw);

    std::set<std::string> candidate;
    double proxy_firm = proxy;
    std::map<std::string, double> efc_adopted; // map that produced the current candidate
    std::vector<std::set<std::string>> history;
    bool relaxed = false;

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        // Pure re-estimate against the current candidate. Convergence is
        // judged on set stability of this map's admission, so a returned
        // outcome is always self-consistent with its final set (EFC-value
        // stability alone can terminate on a swapped pair of near-identical
        // bids and break the equilibrium certificate).
        auto efc = efc_map_against(bids, candidate, proxy_firm, background);
        Admission adm = admit(bids, efc, background, metric, k);
        std::set<std::string> next(adm.accepted.begin(), adm.accepted.end());
        out.iterations = iter;

        if (single_pass || (!single_pass && next == candidate)) {
            finalize(out, bids, efc, adm, background, cfg);
            return out;
        }

        // When the plain iteration revisits an earlier accepted set (or simply
        // fails to settle within a few passes) the stack is from then on built
        // from under-relaxed EFCs (average of the fresh and the previously
        // adopted map), which damps the membership flip-flop while the
        // convergence test above still demands a genuine fixed point.
        if (!relaxed) {
            if (iter >= 3) relaxed = true;
            for (const auto& seen : history)
                if (seen == next && &seen != &history.back()) relaxed = true;
        }

        if (relaxed && !efc_adopted.empty()) {
            std::map<std::string, double> blended = efc;
            for (auto& [id, v] : blended) v = 0.5 * (v + efc_adopted.at(id));
            Admission adm_b = admit(bids, blended, background, metric, k);
            candidate.clear();
            candidate.insert(adm_b.accepted.begin(), adm_b.accepted.end());
            efc_adopted = std::move(blended);
        } else {
            candidate = next;
            efc_adopted = std::move(efc);
        }
        history.push_back(candidate);
        proxy_firm = 0.0;
    }
    std::string diag = "last candidates:";
    for (std::size_t m = history.size() >= 2 ? history.size() - 2 : 0; m < history.size(); ++m) {
        for (const auto& id : history[m]) diag += " " + id;
        diag += " |";
    }
    throw NonConvergenceError("auction did not reach a fixed point within " +
                              std::to_string(cfg.max_iter) + " iterations; " + diag);
}

} // namespace auction_detail

// Fixed-point clearing: EFCs are re-estimated against each iteration's
// accepted set until the set (or every EFC) stops moving, so the returned
// prices and payments are consistent with the final portfolio.
inline AuctionOutcome clear(const std::vector<Bid>& bids, const ShortfallEnsemble& background,
                            Metric metric, double k, const AuctionConfig& cfg = {}) {
    return auction_detail::clear_engine(bids, background, metric, k, cfg, false);
}

// Single pass with EFCs estimated once against the firm-only calibrated set.
inline AuctionOutcome clear_naive_firm_efc(const std::vector<Bid>& bids,
                                           const ShortfallEnsemble& background, Metric metric,
                                           double k, const AuctionConfig& cfg = {}) {
    return auction_detail::clear_engine(bids, background, metric, k, cfg, true);
}

// Descending clock auction over an explicit price grid with EFCs fixed in
// advance (supplied, or estimated as in clear_naive_firm_efc). Equivalent to
// the merit-order construction under the same EFCs.
inline AuctionOutcome descending_clock(const std::vector<Bid>& bids,
                                       const ShortfallEnsemble& background, Metric metric,
                                       double k, const std::vector<double>& price_grid,
                                       const std::map<std::string, double>* efc_in = nullptr,
                                       const AuctionConfig& cfg = {}) {
    using namespace auction_detail;
    validate_bids(bids);
    if (price_grid.empty()) throw ConfigError("descending clock needs a price grid");
    for (std::size_t j = 1; j < price_grid.size(); ++j)
        if (!(price_grid[j] < price_grid[j - 1]))
            throw ConfigError("price grid must be strictly decreasing");

    std::map<std::string, double> efc;
    if (efc_in) {
        efc = *efc_in;
        for (const auto& b : bids)
            if (!efc.count(b.id)) throw ConfigError("missing EFC for bid " + b.id);
    } else {
        const double proxy = calibrate_firm(background, metric, k, cfg.efc_tol_mw);
        efc = efc_map_against(bids, {}, proxy, background);
    }

    auto remaining_at = [&](double price) {
        std::set<std::string> in;
        for (const auto& b : bids) {
            const double e = efc.at(b.id);
            if (e > 0.0 && b.min_total_price / e <= price) in.insert(b.id);
        }
        return in;
    };

    std::set<std::string> current = remaining_at(price_grid.front());
    double risk = rho(bids_to_set(bids, current), background, metric);
    if (risk > k)
        throw InfeasibleError("standard cannot be met at the opening price of the clock");

    std::size_t clear_idx = 0;
    for (std::size_t j = 1; j < price_grid.size(); ++j) {
        std::set<std::string> next = remaining_at(price_grid[j]);
        double next_risk = risk;
        if (next != current) next_risk = rho(bids_to_set(bids, next), background, metric);
        if (next_risk > k) break;
        current = std::move(next);
        risk = next_risk;
        clear_idx = j;
    }

    AuctionOutcome out;
    out.mode = "clock";
    out.metric = metric;
    out.standard_k = k;
    Admission adm;
    for (const Bid* b : merit_order(bids, efc))
        if (current.count(b->id)) adm.accepted.push_back(b->id);
    adm.clearing_price = price_grid[clear_idx];
    adm.risk = risk;
    out.iterations = 1;
    finalize(out, bids, efc, adm, background, cfg);
    return out;
}

// Bounded overshoot experimentation for lumpy resources: for each accepted
// resource holding more than cfg.lumpy_share of the accepted EFC, test
// whether dropping it and admitting cheaper rejected bids still meets the
// standard at a lower total reserve cost; applies the best single swap.
inline AuctionOutcome lumpy_recheck(const AuctionOutcome& outcome, const std::vector<Bid>& bids,
                                    const ShortfallEnsemble& background,
                                    const AuctionConfig& cfg = {}) {
    using namespace auction_detail;
    if (outcome.accepted.empty()) return outcome;

    double total_efc = 0.0;
    for (const auto& id : outcome.accepted) total_efc += outcome.efc_mw.at(id);

    std::vector<const Bid*> rejected;
    for (const auto& b : bids)
        if (!outcome.is_accepted(b.id) && outcome.efc_mw.count(b.id) &&
            outcome.efc_mw.at(b.id) > 0.0)
            rejected.push_back(&b);
    std::sort(rejected.begin(), rejected.end(), [&](const Bid* a, const Bid* b) {
        return outcome.unit_price.at(a->id) < outcome.unit_price.at(b->id);
    });

    double best_reserve = outcome.accepted_reserve_total;
    std::optional<std::vector<std::string>> best_accepted;
    double best_risk = 0.0;

    for (const auto& big : outcome.accepted) {
        if (outcome.efc_mw.at(big) <= cfg.lumpy_share * total_efc) continue;
        std::vector<std::string> trial;
        std::set<std::string> taken;
        double reserve = 0.0;
        for (const auto& id : outcome.accepted)
            if (id != big) {
                trial.push_back(id);
                taken.insert(id);
                reserve += find_bid(bids, id).min_total_price;
            }
        double risk = rho(bids_to_set(bids, taken), background, outcome.metric);
        for (const Bid* b : rejected) {
            if (risk <= outcome.standard_k) break;
            trial.push_back(b->id);
            taken.insert(b->id);
            reserve += b->min_total_price;
            risk = rho(bids_to_set(bids, taken), background, outcome.metric);
        }
        if (risk <= outcome.standard_k && reserve < best_reserve) {
            best_reserve = reserve;
            best_accepted = trial;
            best_risk = risk;
        }
    }
    if (!best_accepted) return outcome;

    AuctionOutcome out = outcome;
    out.lumpy_adjusted = true;
    out.accepted = *best_accepted;
    out.risk_achieved = best_risk;
    out.clearing_price = 0.0;
    for (const auto& id : out.accepted)
        out.clearing_price = std::max(out.clearing_price, outcome.unit_price.at(id));
    out.payments.clear();
    out.total_cost = 0.0;
    out.accepted_reserve_total = 0.0;
    out.sum_marginal_storage_efc_mw = 0.0;
    for (const auto& id : out.accepted) {
        const Bid& b = find_bid(bids, id);
        out.payments[id] = out.clearing_price * outcome.efc_mw.at(id);
        out.total_cost += out.payments[id];
        out.accepted_reserve_total += b.min_total_price;
        if (b.kind == BidKind::store) out.sum_marginal_storage_efc_mw += outcome.efc_mw.at(id);
    }
    return out;
}

} // namespace capsim
