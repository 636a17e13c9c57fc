#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "capsim/parallel.hpp"
#include "capsim/rng.hpp"
#include "capsim/types.hpp"

namespace capsim {

// Simulated residual-demand traces (MW, positive = shortfall depth before
// storage) against which every risk metric is evaluated. Immutable once
// built; a deterministic function of (scenario, seed).
struct ShortfallEnsemble {
    std::vector<std::vector<double>> traces;
    TimeGrid grid;
    std::uint64_t seed = 0;

    int num_traces() const { return static_cast<int>(traces.size()); }

    void validate() const {
        grid.validate();
        if (traces.empty()) throw ConfigError("shortfall ensemble has no traces");
        for (const auto& t : traces)
            if (static_cast<int>(t.size()) != grid.total_periods())
                throw ConfigError("shortfall trace length does not match time grid");
    }
};

// Exact one-step transition probabilities of the two-state availability
// process sampled at the period length: with failure rate 1/mttf and repair
// rate 1/mttr, P(up->down) = (lambda/(lambda+mu)) (1 - e^{-(lambda+mu) h}).
// First-order in h this is h/mttf (resp. h/mttr), and the stationary
// availability is mttf/(mttf+mttr) exactly at any h.
struct TwoStateProbs {
    double p_up_equilibrium;
    double p_fail;
    double p_repair;
};

inline TwoStateProbs two_state_probs(const GeneratorUnit& unit, double period_length_h) {
    const double lambda = 1.0 / unit.mttf_h;
    const double mu = 1.0 / unit.mttr_h;
    const double relax = -std::expm1(-(lambda + mu) * period_length_h);
    return TwoStateProbs{unit.mttf_h / (unit.mttf_h + unit.mttr_h),
                         lambda / (lambda + mu) * relax,
                         mu / (lambda + mu) * relax};
}

// Per-period available capacity of one unit: 0 or capacity, geometric
// sojourns, initial state drawn from the equilibrium distribution.
// Counter layout: draw 0 decides the initial state, draw t the transition
// into period t.
inline std::vector<double> simulate_availability(const GeneratorUnit& unit,
                                                 const TimeGrid& grid,
                                                 const Substream& stream) {
    unit.validate();
    grid.validate();
    const int n = grid.total_periods();
    const TwoStateProbs p = two_state_probs(unit, grid.period_length_h);
    std::vector<double> avail(static_cast<std::size_t>(n));
    bool up = stream.uniform(0) < p.p_up_equilibrium;
    avail[0] = up ? unit.capacity_mw : 0.0;
    for (int t = 1; t < n; ++t) {
        const double u = stream.uniform(static_cast<std::uint64_t>(t));
        up = up ? !(u < p.p_fail) : (u < p.p_repair);
        avail[static_cast<std::size_t>(t)] = up ? unit.capacity_mw : 0.0;
    }
    return avail;
}

// Builds the background process: trace k = demand net of wind (as MW) minus
// an independent availability draw of the whole fleet. An empty fleet is
// allowed (residual = demand). Values may be negative (surplus).
inline ShortfallEnsemble build_background(const std::vector<GeneratorUnit>& fleet,
                                          const DemandTrace& demand_net_wind,
                                          const TimeGrid& grid, int num_traces,
                                          std::uint64_t seed) {
    grid.validate();
    demand_net_wind.validate(grid);
    for (const auto& u : fleet) u.validate();
    if (num_traces < 1) throw ConfigError("num_traces must be >= 1");

    const int n = grid.total_periods();
    const double h = grid.period_length_h;
    ShortfallEnsemble ensemble;
    ensemble.grid = grid;
    ensemble.seed = seed;
    ensemble.traces.assign(static_cast<std::size_t>(num_traces),
                           std::vector<double>(static_cast<std::size_t>(n)));

    parallel_for(num_traces, [&](int k) {
        auto& trace = ensemble.traces[static_cast<std::size_t>(k)];
        for (int t = 0; t < n; ++t)
            trace[static_cast<std::size_t>(t)] =
                demand_net_wind.mwh[static_cast<std::size_t>(t)] / h;
        for (std::size_t u = 0; u < fleet.size(); ++u) {
            const auto stream = background_unit_stream(
                seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(u));
            const auto avail = simulate_availability(fleet[u], grid, stream);
            for (int t = 0; t < n; ++t)
                trace[static_cast<std::size_t>(t)] -= avail[static_cast<std::size_t>(t)];
        }
    });
    return ensemble;
}

// Test/CLI helper: wrap explicit residual-demand traces as an ensemble.
inline ShortfallEnsemble ensemble_from_traces(std::vector<std::vector<double>> traces,
                                              const TimeGrid& grid,
                                              std::uint64_t seed = 0) {
    ShortfallEnsemble e;
    e.traces = std::move(traces);
    e.grid = grid;
    e.seed = seed;
    e.validate();
    return e;
}

} // namespace capsim
