#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "capsim/risk.hpp"

namespace capsim {

struct EfcEstimate {
    enum class Method { exact_bisection, marginal_ratio };
    double value_mw = 0.0;
    Method method = Method::exact_bisection;
    double derivative_used = 0.0; // EEU slope (MWh per MW), marginal only
    double tolerance_mw = 0.0;
    int rho_evals = 0; // midpoint evaluations inside the bisection
};

inline const char* efc_method_name(EfcEstimate::Method m) {
    return m == EfcEstimate::Method::exact_bisection ? "exact-bisection" : "marginal-ratio";
}

inline double rho(const ResourceSet& resources, const ShortfallEnsemble& background,
                  Metric metric) {
    return metric_value(evaluate(resources, background), metric);
}

namespace detail {

inline void require_sloped(const RiskReport& base_report, double rho_base, double rho_at_upper,
                           const std::string& what) {
    if (base_report.lole_h == 0.0)
        throw FlatRiskError(what + ": base system has zero LOLE, risk is flat and the "
                                   "equation has no unique solution");
    if (rho_base == rho_at_upper)
        throw FlatRiskError(what + ": risk metric is flat across the search bracket");
}

} // namespace detail

// Equivalent firm capacity of `addition` relative to `base`: the smallest y
// with rho(base + y) = rho(base U addition), found by bisection on
// y in [0, nominal capacity of the addition]. The nominal capacity is a valid
// upper bracket because firm capacity at that rate dominates the addition.
inline EfcEstimate efc_exact(const ResourceSet& addition, const ResourceSet& base,
                             const ShortfallEnsemble& background, Metric metric,
                             double tol_mw) {
    if (!(tol_mw > 0.0)) throw ConfigError("efc tolerance must be > 0");
    addition.validate();
    EfcEstimate est;
    est.method = EfcEstimate::Method::exact_bisection;
    est.tolerance_mw = tol_mw;

    const double upper = addition.nominal_capacity_mw();
    if (upper <= 0.0) return est;

    const NettedEnsemble netted = net_resources(base, background);
    const RiskReport base_report = risk_on_netted(netted, base.stores);
    const double rho_base = metric_value(base_report, metric);
    const double rho_upper = metric_value(risk_on_netted(netted, base.stores, upper), metric);
    detail::require_sloped(base_report, rho_base, rho_upper, "efc_exact");

    const ResourceSet merged = base.merged(addition);
    const double target = rho(merged, background, metric);

    double lo = 0.0, hi = upper;
    while (hi - lo > tol_mw) {
        const double mid = 0.5 * (lo + hi);
        const double v = metric_value(risk_on_netted(netted, base.stores, mid), metric);
        ++est.rho_evals;
        if (v > target)
            lo = mid;
        else
            hi = mid;
    }
    est.value_mw = 0.5 * (lo + hi);
    return est;
}

// d EEU / d firm capacity, estimated per trace per day: run the greedy
// dispatch, take S_e = stores empty at the end of the day, and count the
// periods whose pre-storage depth exceeds the total power of the stores NOT
// in S_e (those keep contributing like firm capacity at their rate; the
// stores in S_e reschedule so as to still empty). Returns -LOLE(R \ S_e),
// which reduces to -LOLE(R) when R holds no storage.
inline double eeu_derivative(const ResourceSet& resources, const ShortfallEnsemble& background) {
    const NettedEnsemble netted = net_resources(resources, background);
    const auto& stores = resources.stores;
    const int num_traces = static_cast<int>(netted.depths.size());
    const int ppd = netted.grid.periods_per_day;
    const int days = netted.grid.num_days;
    const double h = netted.grid.period_length_h;

    std::vector<double> counts(static_cast<std::size_t>(num_traces), 0.0);
    parallel_for(num_traces, [&](int k) {
        const auto& trace = netted.depths[static_cast<std::size_t>(k)];
        std::vector<double> day(static_cast<std::size_t>(ppd));
        std::vector<double> remaining(stores.size());
        int count = 0;
        for (int d = 0; d < days; ++d) {
            const int base = d * ppd;
            bool any = false;
            for (int t = 0; t < ppd; ++t) {
                const double v = trace[static_cast<std::size_t>(base + t)];
                day[static_cast<std::size_t>(t)] = v;
                any = any || v > 0.0;
            }
            if (!any) continue;
            double nonempty_power = 0.0;
            if (!stores.empty()) {
                for (std::size_t i = 0; i < stores.size(); ++i) remaining[i] = stores[i].energy_mwh;
                std::vector<double> scratch = day;
                detail::greedy_day(scratch, 0, ppd, stores, h, remaining);
                for (std::size_t i = 0; i < stores.size(); ++i)
                    if (remaining[i] > kEnergyEpsMwh) nonempty_power += stores[i].power_mw;
            }
            for (int t = 0; t < ppd; ++t)
                if (day[static_cast<std::size_t>(t)] - nonempty_power > 0.0) ++count;
        }
        counts[static_cast<std::size_t>(k)] = count;
    });

    double total = 0.0;
    for (double c : counts) total += c;
    return -(total / num_traces) * h;
}

// Marginal EFC of a small addition via the risk-difference / derivative
// ratio, with the two EEU evaluations sharing the background and resource
// substreams (common random numbers).
inline EfcEstimate efc_marginal(const ResourceSet& addition, const ResourceSet& base,
                                const ShortfallEnsemble& background) {
    addition.validate();
    EfcEstimate est;
    est.method = EfcEstimate::Method::marginal_ratio;
    const double derivative = eeu_derivative(base, background);
    est.derivative_used = derivative;
    if (derivative == 0.0)
        throw ZeroDerivativeError(
            "efc_marginal: LOLE(R \\ S_e) is zero, the EEU derivative vanishes");
    const double eeu_base = rho(base, background, Metric::eeu);
    const double eeu_with = rho(base.merged(addition), background, Metric::eeu);
    est.rho_evals = 2;
    est.value_mw = std::max(0.0, (eeu_with - eeu_base) / derivative);
    return est;
}

// Equivalent load carrying capacity: the extra load (removed firm capacity)
// the addition can support at unchanged risk. Solves
// rho(base U addition - y) = rho(base) by bisection; satisfies
// elcc = efc_exact(addition, base - elcc) within 2 tol.
inline double elcc(const ResourceSet& addition, const ResourceSet& base,
                   const ShortfallEnsemble& background, Metric metric, double tol_mw) {
    if (!(tol_mw > 0.0)) throw ConfigError("elcc tolerance must be > 0");
    addition.validate();
    const double upper = addition.nominal_capacity_mw();
    if (upper <= 0.0) return 0.0;

    const RiskReport base_report = evaluate(base, background);
    const double target = metric_value(base_report, metric);

    const ResourceSet merged = base.merged(addition);
    const NettedEnsemble netted = net_resources(merged, background);
    const double rho_merged = metric_value(risk_on_netted(netted, merged.stores), metric);
    const double rho_low = metric_value(risk_on_netted(netted, merged.stores, -upper), metric);
    detail::require_sloped(base_report, rho_merged, rho_low, "elcc");

    double lo = 0.0, hi = upper; // rho(merged - lo) <= target <= rho(merged - hi)
    while (hi - lo > tol_mw) {
        const double mid = 0.5 * (lo + hi);
        const double v = metric_value(risk_on_netted(netted, merged.stores, -mid), metric);
        if (v < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Firm capacity y with rho(firm-only y) = target, by bisection.
inline double calibrate_firm(const ShortfallEnsemble& background, Metric metric,
                             double target, double tol_mw) {
    if (!(tol_mw > 0.0)) throw ConfigError("calibration tolerance must be > 0");
    if (!std::isfinite(target) || target < 0.0)
        throw UnreachableTargetError("calibrate_firm: target must be finite and >= 0");
    background.validate();

    const NettedEnsemble netted = net_resources(ResourceSet{}, background);
    const double at_zero = metric_value(risk_on_netted(netted, {}), metric);
    if (target > at_zero)
        throw UnreachableTargetError(
            "calibrate_firm: target exceeds the risk of the bare background (" +
            std::to_string(at_zero) + "); would need negative firm capacity");
    if (target == at_zero) return 0.0;

    double max_depth = 0.0;
    for (const auto& trace : netted.depths)
        for (double v : trace) max_depth = std::max(max_depth, v);
    double lo = 0.0, hi = max_depth; // rho(hi) = 0 <= target < rho(lo)
    while (hi - lo > tol_mw) {
        const double mid = 0.5 * (lo + hi);
        const double v = metric_value(risk_on_netted(netted, {}, mid), metric);
        if (v > target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace capsim
