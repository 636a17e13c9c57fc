#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "capsim/rng.hpp"
#include "capsim/system_model.hpp"
#include "capsim/types.hpp"

namespace testutil {

// Small synthetic background: a fleet of identical-ish units against a
// sinusoidal daily demand shape, sized so that shortfalls are occasional but
// present in most traces.
inline capsim::ShortfallEnsemble make_background(std::uint64_t seed, int num_traces,
                                                 int num_days, int periods_per_day,
                                                 int num_units, double unit_cap_mw,
                                                 double demand_scale) {
    capsim::TimeGrid grid{periods_per_day, num_days, 1.0};
    std::vector<capsim::GeneratorUnit> fleet;
    fleet.reserve(static_cast<std::size_t>(num_units));
    for (int i = 0; i < num_units; ++i) {
        const double avail = 0.88 + 0.06 * ((i * 7) % 10) / 10.0;
        capsim::GeneratorUnit u;
        u.id = "bg" + std::to_string(i);
        u.capacity_mw = unit_cap_mw * (1.0 + 0.15 * ((i * 3) % 5) / 5.0);
        u.mttf_h = 50.0;
        u.mttr_h = u.mttf_h * (1.0 - avail) / avail;
        fleet.push_back(u);
    }
    double total_cap = 0.0;
    for (const auto& u : fleet) total_cap += u.capacity_mw;

    const int n = grid.total_periods();
    capsim::DemandTrace demand;
    demand.mwh.resize(static_cast<std::size_t>(n));
    const auto noise = capsim::scratch_stream(seed, 11, 0);
    for (int t = 0; t < n; ++t) {
        const int hour = t % periods_per_day;
        const int day = t / periods_per_day;
        const double shape =
            0.72 + 0.20 * std::exp(-0.5 * std::pow((hour - 0.75 * periods_per_day) / 2.0, 2)) +
            0.08 * std::sin(2.0 * M_PI * hour / periods_per_day);
        const double day_factor = 1.0 + 0.06 * std::sin(2.0 * M_PI * day / 7.0) +
                                  0.08 * (noise.uniform(1000000 + static_cast<std::uint64_t>(day)) - 0.5);
        const double jitter = 0.04 * (noise.uniform(static_cast<std::uint64_t>(t)) - 0.5);
        demand.mwh[static_cast<std::size_t>(t)] =
            demand_scale * total_cap * day_factor * (shape + jitter);
    }
    return capsim::build_background(fleet, demand, grid, num_traces, seed);
}

inline capsim::ResourceSet firm_only(double mw) {
    capsim::ResourceSet r;
    r.firm_mw = mw;
    return r;
}

inline capsim::Store store(const std::string& id, double power, double energy) {
    return capsim::Store{id, power, energy};
}

} // namespace testutil
