#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "capsim/types.hpp"

namespace capsim {

// Remaining stored energy at or below this is treated as empty.
inline constexpr double kEnergyEpsMwh = 1e-9;

// A maximal run of positive shortfall depth within one day.
struct Episode {
    int day = 0;
    int first_period = 0;          // index within the day
    std::vector<double> depths_mw; // pre-storage
};

inline std::vector<Episode> split_episodes(const std::vector<double>& day_depths, int day = 0) {
    std::vector<Episode> out;
    const int n = static_cast<int>(day_depths.size());
    int t = 0;
    while (t < n) {
        if (day_depths[static_cast<std::size_t>(t)] > 0.0) {
            Episode ep;
            ep.day = day;
            ep.first_period = t;
            while (t < n && day_depths[static_cast<std::size_t>(t)] > 0.0)
                ep.depths_mw.push_back(day_depths[static_cast<std::size_t>(t++)]);
            out.push_back(std::move(ep));
        } else {
            ++t;
        }
    }
    return out;
}

struct DispatchResult {
    std::vector<std::vector<double>> discharge_mw; // [store][period]
    std::vector<double> residual_mw;               // max(0, depth - discharge)
    std::vector<std::string> empty_store_ids;      // S_e: empty at end of day
};

namespace detail {

// One day of the EEU-optimal greedy: at each period of positive depth the
// shortfall is reduced as far as possible, drawing on stores in descending
// order of residual lifetime (remaining energy / power). When the combined
// rate exceeds what is needed, the marginal draw is split so the longest
// lifetimes are levelled down together (the continuous form of the priority
// rule); this is what makes the policy optimal when rate slack remains.
// `depths` is mutated to the residual; `remaining` is drawn down. If
// `recorder` is non-null, (*recorder)[i][record_offset + t - begin] receives
// store i's discharge for period t.
inline void greedy_day(std::vector<double>& depths, int begin, int end,
                       const std::vector<Store>& stores, double h,
                       std::vector<double>& remaining,
                       std::vector<std::vector<double>>* recorder = nullptr,
                       int record_offset = 0) {
    const int num_stores = static_cast<int>(stores.size());
    if (num_stores == 0) return;
    std::vector<int> active;
    std::vector<double> levels;
    active.reserve(static_cast<std::size_t>(num_stores));

    auto discharge = [&](int i, int t, double x) {
        if (!(x > 0.0)) return;
        depths[static_cast<std::size_t>(t)] -= x;
        remaining[static_cast<std::size_t>(i)] -= x * h;
        if (recorder)
            (*recorder)[static_cast<std::size_t>(i)]
                       [static_cast<std::size_t>(record_offset + t - begin)] += x;
    };

    for (int t = begin; t < end; ++t) {
        const double depth = depths[static_cast<std::size_t>(t)];
        if (!(depth > 0.0)) continue;
        active.clear();
        double total_cap = 0.0;
        for (int i = 0; i < num_stores; ++i) {
            if (remaining[static_cast<std::size_t>(i)] <= kEnergyEpsMwh) continue;
            active.push_back(i);
            total_cap += std::min(stores[static_cast<std::size_t>(i)].power_mw,
                                  remaining[static_cast<std::size_t>(i)] / h);
        }
        if (active.empty()) continue;

        if (total_cap <= depth) {
            // Every store is needed at its full feasible rate.
            for (int i : active)
                discharge(i, t,
                          std::min(stores[static_cast<std::size_t>(i)].power_mw,
                                   remaining[static_cast<std::size_t>(i)] / h));
            continue;
        }

        // Rate slack: level the residual lifetimes down to the threshold
        // `level` at which exactly `depth` is served. Store i contributes
        // x_i(level) = min(power_i, (lifetime_i - level) power_i / h)+, a
        // piecewise-linear decreasing function of the level.
        auto served_at = [&](double level) {
            double s = 0.0;
            for (int i : active) {
                const double power = stores[static_cast<std::size_t>(i)].power_mw;
                const double lifetime = remaining[static_cast<std::size_t>(i)] / power;
                if (lifetime > level)
                    s += std::min(power, (lifetime - level) * power / h);
            }
            return s;
        };
        levels.clear();
        double max_lifetime = 0.0;
        for (int i : active) {
            const double lifetime = remaining[static_cast<std::size_t>(i)] /
                                    stores[static_cast<std::size_t>(i)].power_mw;
            levels.push_back(lifetime);
            if (lifetime - h > 0.0) levels.push_back(lifetime - h);
            max_lifetime = std::max(max_lifetime, lifetime);
        }
        levels.push_back(0.0);
        std::sort(levels.begin(), levels.end(), std::greater<>());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

        double level = 0.0;
        double prev_l = max_lifetime, prev_s = 0.0;
        for (double b : levels) {
            const double s = served_at(b);
            if (s >= depth) {
                level = (s == prev_s) ? b
                                      : prev_l + (b - prev_l) * (depth - prev_s) / (s - prev_s);
                break;
            }
            prev_l = b;
            prev_s = s;
        }
        for (int i : active) {
            const double power = stores[static_cast<std::size_t>(i)].power_mw;
            const double lifetime = remaining[static_cast<std::size_t>(i)] / power;
            if (lifetime > level)
                discharge(i, t, std::min(power, (lifetime - level) * power / h));
        }
    }
}

inline std::vector<std::string> collect_empty(const std::vector<Store>& stores,
                                              const std::vector<double>& remaining) {
    std::vector<std::string> empty;
    for (std::size_t i = 0; i < stores.size(); ++i)
        if (remaining[i] <= kEnergyEpsMwh) empty.push_back(stores[i].id);
    return empty;
}

inline DispatchResult result_from(const std::vector<Store>& stores,
                                  std::vector<std::vector<double>> discharge,
                                  const std::vector<double>& day_depths) {
    DispatchResult r;
    r.discharge_mw = std::move(discharge);
    r.residual_mw.resize(day_depths.size());
    for (std::size_t t = 0; t < day_depths.size(); ++t) {
        double total = 0.0;
        for (std::size_t i = 0; i < stores.size(); ++i) total += r.discharge_mw[i][t];
        r.residual_mw[t] = std::max(0.0, day_depths[t] - total);
    }
    return r;
}

} // namespace detail

// EEU-optimal dispatch of a set of stores over one day of shortfall depths.
// The resulting total residual unserved energy is minimal over all feasible
// dispatches.
inline DispatchResult dispatch_min_eeu(const std::vector<Store>& stores,
                                       const std::vector<double>& day_depths,
                                       double period_length_h = 1.0) {
    const int n = static_cast<int>(day_depths.size());
    std::vector<double> depths = day_depths;
    std::vector<double> remaining(stores.size());
    for (std::size_t i = 0; i < stores.size(); ++i) remaining[i] = stores[i].energy_mwh;
    std::vector<std::vector<double>> discharge(
        stores.size(), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    detail::greedy_day(depths, 0, n, stores, period_length_h, remaining, &discharge, 0);
    DispatchResult r = detail::result_from(stores, std::move(discharge), day_depths);
    r.empty_store_ids = detail::collect_empty(stores, remaining);
    return r;
}

// Illustrative single-store policy: minimise the loss-of-load duration by
// fully eliminating the shallowest eliminable periods first (only periods
// with depth <= power can be eliminated). Leftover energy is then spent on
// partial reduction so the EEU reduction matches the other policies whenever
// the power constraint does not bind.
inline DispatchResult dispatch_min_lole(const Store& store,
                                        const std::vector<double>& day_depths,
                                        double period_length_h = 1.0) {
    const double h = period_length_h;
    const int n = static_cast<int>(day_depths.size());
    std::vector<std::vector<double>> discharge(1, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    double energy = store.energy_mwh;

    std::vector<int> order;
    for (int t = 0; t < n; ++t)
        if (day_depths[static_cast<std::size_t>(t)] > 0.0) order.push_back(t);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return day_depths[static_cast<std::size_t>(a)] < day_depths[static_cast<std::size_t>(b)];
    });

    for (int t : order) {
        const double d = day_depths[static_cast<std::size_t>(t)];
        if (d > store.power_mw) break; // sorted ascending: nothing further is eliminable
        if (d * h > energy + kEnergyEpsMwh) break;
        discharge[0][static_cast<std::size_t>(t)] = d;
        energy -= d * h;
    }
    if (energy > kEnergyEpsMwh) {
        for (int t : order) {
            if (energy <= kEnergyEpsMwh) break;
            const double already = discharge[0][static_cast<std::size_t>(t)];
            if (already > 0.0) continue;
            const double x = std::min({store.power_mw, day_depths[static_cast<std::size_t>(t)], energy / h});
            if (x > 0.0) {
                discharge[0][static_cast<std::size_t>(t)] = x;
                energy -= x * h;
            }
        }
    }
    DispatchResult r = detail::result_from({store}, std::move(discharge), day_depths);
    if (energy <= kEnergyEpsMwh) r.empty_store_ids.push_back(store.id);
    return r;
}

// Illustrative single-store policy: minimise the maximum depth of shortfall
// (water-filling from the top, per-period discharge capped at the store
// power). Residual depths equal max(min(depth, L), depth - power) with the
// level L chosen to spend min(energy, shavable energy).
inline DispatchResult dispatch_min_peak(const Store& store,
                                        const std::vector<double>& day_depths,
                                        double period_length_h = 1.0) {
    const double h = period_length_h;
    const double power = store.power_mw;
    const int n = static_cast<int>(day_depths.size());

    auto shaved_at = [&](double level) {
        double s = 0.0;
        for (int t = 0; t < n; ++t) {
            const double d = day_depths[static_cast<std::size_t>(t)];
            if (d > level) s += std::min(d - level, power) * h;
        }
        return s;
    };

    double max_depth = 0.0;
    std::vector<double> breaks{0.0};
    for (int t = 0; t < n; ++t) {
        const double d = day_depths[static_cast<std::size_t>(t)];
        if (d > 0.0) {
            breaks.push_back(d);
            if (d - power > 0.0) breaks.push_back(d - power);
            max_depth = std::max(max_depth, d);
        }
    }
    std::sort(breaks.begin(), breaks.end(), std::greater<>());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

    const double target = std::min(store.energy_mwh, shaved_at(0.0));
    double level = max_depth;
    if (target > 0.0) {
        double prev_b = max_depth, prev_s = 0.0;
        for (double b : breaks) {
            const double s = shaved_at(b);
            if (s >= target) {
                // Crossing lies in [b, prev_b]; shaved is linear there.
                level = (s == prev_s) ? b
                                      : prev_b + (b - prev_b) * (target - prev_s) / (s - prev_s);
                break;
            }
            prev_b = b;
            prev_s = s;
        }
    }

    std::vector<std::vector<double>> discharge(1, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    double spent = 0.0;
    for (int t = 0; t < n; ++t) {
        const double d = day_depths[static_cast<std::size_t>(t)];
        if (d <= 0.0) continue;
        const double residual = std::max(std::min(d, level), d - power);
        const double x = std::max(0.0, d - residual);
        discharge[0][static_cast<std::size_t>(t)] = x;
        spent += x * h;
    }
    DispatchResult r = detail::result_from({store}, std::move(discharge), day_depths);
    if (store.energy_mwh - spent <= kEnergyEpsMwh) r.empty_store_ids.push_back(store.id);
    return r;
}

} // namespace capsim
