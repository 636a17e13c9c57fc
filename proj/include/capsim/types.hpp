#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace capsim {

// Every failure mode the CLI can report carries a stable machine-readable
// code alongside the human message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config", w) {}
};
struct FlatRiskError : Error {
    explicit FlatRiskError(const std::string& w) : Error("flat_risk", w) {}
};
struct ZeroDerivativeError : Error {
    explicit ZeroDerivativeError(const std::string& w) : Error("zero_derivative", w) {}
};
struct InfeasibleError : Error {
    explicit InfeasibleError(const std::string& w) : Error("infeasible", w) {}
};
struct NonConvergenceError : Error {
    explicit NonConvergenceError(const std::string& w) : Error("non_convergent", w) {}
};
struct UnreachableTargetError : Error {
    explicit UnreachableTargetError(const std::string& w) : Error("unreachable_target", w) {}
};

struct TimeGrid {
    int periods_per_day = 24;
    int num_days = 1;
    double period_length_h = 1.0;

    int total_periods() const { return periods_per_day * num_days; }

    void validate() const {
        if (periods_per_day < 1 || num_days < 1)
            throw ConfigError("time grid must have at least one period");
        if (!(period_length_h > 0.0) || !std::isfinite(period_length_h))
            throw ConfigError("period_length must be positive");
    }
};

// Conventional unit, fully available or fully out, two-state Markov
// availability with mean up-time mttf and mean down-time mttr (hours).
struct GeneratorUnit {
    std::string id;
    double capacity_mw = 0.0;
    double mttf_h = 0.0;
    double mttr_h = 0.0;

    double equilibrium_availability() const { return mttf_h / (mttf_h + mttr_h); }

    void validate() const {
        if (id.empty()) throw ConfigError("generator id must be non-empty");
        if (!(capacity_mw > 0.0)) throw ConfigError("generator " + id + ": capacity must be > 0");
        if (!(mttf_h > 0.0)) throw ConfigError("generator " + id + ": mttf must be > 0");
        if (!(mttr_h > 0.0)) throw ConfigError("generator " + id + ": mttr must be > 0");
    }
};

// Demand net of wind, one energy value per period.
struct DemandTrace {
    std::vector<double> mwh;
    std::string label;

    void validate(const TimeGrid& grid) const {
        if (static_cast<int>(mwh.size()) != grid.total_periods())
            throw ConfigError("demand trace length " + std::to_string(mwh.size()) +
                              " does not match grid periods " +
                              std::to_string(grid.total_periods()));
        for (double v : mwh)
            if (!std::isfinite(v)) throw ConfigError("demand trace contains a non-finite value");
    }
};

// Energy-limited flexible resource: discharges at up to power_mw and can
// deliver at most energy_mwh per day (full recharge at day boundaries).
struct Store {
    std::string id;
    double power_mw = 0.0;
    double energy_mwh = 0.0;

    // Time the store can sustain its maximum rate from full charge.
    double full_lifetime_h() const { return energy_mwh / power_mw; }

    void validate() const {
        if (id.empty()) throw ConfigError("store id must be non-empty");
        if (!(power_mw > 0.0)) throw ConfigError("store " + id + ": power must be > 0");
        if (!(energy_mwh > 0.0)) throw ConfigError("store " + id + ": energy must be > 0");
    }
};

// The portfolio every risk metric is a function of: firm capacity plus
// generators plus stores. Adding firm capacity y to a set R increments
// `firm_mw`.
struct ResourceSet {
    double firm_mw = 0.0;
    std::vector<GeneratorUnit> generators;
    std::vector<Store> stores;

    bool has_stores() const { return !stores.empty(); }

    double nominal_capacity_mw() const {
        double total = firm_mw;
        for (const auto& g : generators) total += g.capacity_mw;
        for (const auto& s : stores) total += s.power_mw;
        return total;
    }

    ResourceSet with_firm(double extra_mw) const {
        ResourceSet r = *this;
        r.firm_mw += extra_mw;
        return r;
    }

    ResourceSet merged(const ResourceSet& add) const {
        ResourceSet r = *this;
        r.firm_mw += add.firm_mw;
        r.generators.insert(r.generators.end(), add.generators.begin(), add.generators.end());
        r.stores.insert(r.stores.end(), add.stores.begin(), add.stores.end());
        r.validate();
        return r;
    }

    void validate() const {
        if (firm_mw < 0.0 || !std::isfinite(firm_mw))
            throw ConfigError("firm capacity must be >= 0");
        std::unordered_set<std::string> ids;
        for (const auto& g : generators) {
            g.validate();
            if (!ids.insert(g.id).second) throw ConfigError("duplicate resource id: " + g.id);
        }
        for (const auto& s : stores) {
            s.validate();
            if (!ids.insert(s.id).second) throw ConfigError("duplicate resource id: " + s.id);
        }
    }
};

enum class Metric { lole, eeu };

inline const char* metric_name(Metric m) { return m == Metric::lole ? "lole" : "eeu"; }

inline Metric metric_from_string(const std::string& s) {
    if (s == "lole") return Metric::lole;
    if (s == "eeu") return Metric::eeu;
    throw ConfigError("unknown metric '" + s + "' (expected lole or eeu)");
}

} // namespace capsim
