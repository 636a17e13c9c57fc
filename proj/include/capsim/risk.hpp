#pragma once

#include <algorithm>
#include <vector>

#include "capsim/parallel.hpp"
#include "capsim/rng.hpp"
#include "capsim/storage_dispatch.hpp"
#include "capsim/system_model.hpp"
#include "capsim/types.hpp"

namespace capsim {

struct RiskReport {
    struct TraceStat {
        int lol_periods = 0;
        double unserved_mwh = 0.0;
    };
    double lole_h = 0.0;  // mean loss-of-load periods per trace, in hours
    double eeu_mwh = 0.0; // mean unserved energy per trace
    std::vector<TraceStat> per_trace;
};

inline double metric_value(const RiskReport& r, Metric m) {
    return m == Metric::lole ? r.lole_h : r.eeu_mwh;
}

// Residual depths after netting firm capacity and generator availability
// (and an optional fixed per-period generation profile) from the background.
// This is the part of an evaluation that does not change as firm capacity is
// varied, so bisections over firm offsets reuse it.
struct NettedEnsemble {
    std::vector<std::vector<double>> depths; // [trace][period], MW
    TimeGrid grid;
};

inline NettedEnsemble net_resources(const ResourceSet& resources,
                                    const ShortfallEnsemble& background,
                                    const std::vector<double>* profile_mw = nullptr) {
    resources.validate();
    background.validate();
    if (profile_mw && static_cast<int>(profile_mw->size()) != background.grid.total_periods())
        throw ConfigError("generation profile length does not match time grid");

    const int n = background.grid.total_periods();
    NettedEnsemble netted;
    netted.grid = background.grid;
    netted.depths.assign(background.traces.size(),
                         std::vector<double>(static_cast<std::size_t>(n)));
    parallel_for(background.num_traces(), [&](int k) {
        auto& out = netted.depths[static_cast<std::size_t>(k)];
        const auto& in = background.traces[static_cast<std::size_t>(k)];
        for (int t = 0; t < n; ++t)
            out[static_cast<std::size_t>(t)] =
                in[static_cast<std::size_t>(t)] - resources.firm_mw -
                (profile_mw ? (*profile_mw)[static_cast<std::size_t>(t)] : 0.0);
        for (const auto& gen : resources.generators) {
            // Substreams are keyed by (id, trace) and independent of the
            // background ensemble, so risk differences between candidate
            // sets are common-random-number comparisons.
            const auto stream =
                resource_unit_stream(background.seed, static_cast<std::uint64_t>(k), gen.id);
            const auto avail = simulate_availability(gen, background.grid, stream);
            for (int t = 0; t < n; ++t)
                out[static_cast<std::size_t>(t)] -= avail[static_cast<std::size_t>(t)];
        }
    });
    return netted;
}

// LOLE / EEU of the netted system with `stores` dispatched day by day via the
// EEU-optimal greedy policy and `firm_offset_mw` of extra firm capacity.
// A period counts toward LOLE iff residual depth > 0 strictly.
inline RiskReport risk_on_netted(const NettedEnsemble& netted,
                                 const std::vector<Store>& stores,
                                 double firm_offset_mw = 0.0) {
    const int num_traces = static_cast<int>(netted.depths.size());
    const int ppd = netted.grid.periods_per_day;
    const int days = netted.grid.num_days;
    const double h = netted.grid.period_length_h;

    RiskReport report;
    report.per_trace.assign(static_cast<std::size_t>(num_traces), {});

    parallel_for(num_traces, [&](int k) {
        const auto& trace = netted.depths[static_cast<std::size_t>(k)];
        std::vector<double> day(static_cast<std::size_t>(ppd));
        std::vector<double> remaining(stores.size());
        int lol = 0;
        double unserved = 0.0;
        for (int d = 0; d < days; ++d) {
            const int base = d * ppd;
            bool any = false;
            for (int t = 0; t < ppd; ++t) {
                const double v = trace[static_cast<std::size_t>(base + t)] - firm_offset_mw;
                day[static_cast<std::size_t>(t)] = v;
                any = any || v > 0.0;
            }
            if (!any) continue;
            if (!stores.empty()) {
                for (std::size_t i = 0; i < stores.size(); ++i) remaining[i] = stores[i].energy_mwh;
                detail::greedy_day(day, 0, ppd, stores, h, remaining);
            }
            for (int t = 0; t < ppd; ++t) {
                const double v = day[static_cast<std::size_t>(t)];
                if (v > 0.0) {
                    ++lol;
                    unserved += v * h;
                }
            }
        }
        report.per_trace[static_cast<std::size_t>(k)] = {lol, unserved};
    });

    double lol_sum = 0.0, un_sum = 0.0;
    for (const auto& s : report.per_trace) {
        lol_sum += s.lol_periods;
        un_sum += s.unserved_mwh;
    }
    report.lole_h = lol_sum / num_traces * h;
    report.eeu_mwh = un_sum / num_traces;
    return report;
}

inline RiskReport evaluate(const ResourceSet& resources, const ShortfallEnsemble& background) {
    return risk_on_netted(net_resources(resources, background), resources.stores);
}

} // namespace capsim
