#pragma once

// Independent oracle for the storage dispatch: exhaustive search over all
// feasible day dispatches on a 1 MW / 1 MWh grid, minimising total residual
// unserved energy via dynamic programming over (period, remaining energies).
// Test-only; never consults the production greedy.

#include <algorithm>
#include <vector>

namespace dispatch_oracle {

struct Instance {
    std::vector<int> power;
    std::vector<int> energy;
    std::vector<int> depths;
};

inline int min_residual(const Instance& inst) {
    const int ns = static_cast<int>(inst.power.size());
    const int np = static_cast<int>(inst.depths.size());
    std::vector<int> dims(static_cast<std::size_t>(ns));
    int states = 1;
    for (int i = 0; i < ns; ++i) {
        dims[static_cast<std::size_t>(i)] = inst.energy[static_cast<std::size_t>(i)] + 1;
        states *= dims[static_cast<std::size_t>(i)];
    }
    auto decode = [&](int code, std::vector<int>& e) {
        for (int i = 0; i < ns; ++i) {
            e[static_cast<std::size_t>(i)] = code % dims[static_cast<std::size_t>(i)];
            code /= dims[static_cast<std::size_t>(i)];
        }
    };
    auto encode = [&](const std::vector<int>& e) {
        int code = 0;
        for (int i = ns - 1; i >= 0; --i)
            code = code * dims[static_cast<std::size_t>(i)] + e[static_cast<std::size_t>(i)];
        return code;
    };

    const int kInf = 1 << 28;
    std::vector<int> next(static_cast<std::size_t>(states), 0), cur;
    std::vector<int> e(static_cast<std::size_t>(ns)), e2(static_cast<std::size_t>(ns));
    for (int t = np - 1; t >= 0; --t) {
        cur.assign(static_cast<std::size_t>(states), kInf);
        const int depth = inst.depths[static_cast<std::size_t>(t)];
        for (int code = 0; code < states; ++code) {
            decode(code, e);
            if (depth <= 0) {
                cur[static_cast<std::size_t>(code)] = next[static_cast<std::size_t>(code)];
                continue;
            }
            std::vector<int> d(static_cast<std::size_t>(ns), 0);
            int best = kInf;
            auto recurse = [&](auto&& self, int i, int used) -> void {
                if (i == ns) {
                    for (int j = 0; j < ns; ++j)
                        e2[static_cast<std::size_t>(j)] =
                            e[static_cast<std::size_t>(j)] - d[static_cast<std::size_t>(j)];
                    best = std::min(best,
                                    depth - used + next[static_cast<std::size_t>(encode(e2))]);
                    return;
                }
                const int cap = std::min({inst.power[static_cast<std::size_t>(i)],
                                          e[static_cast<std::size_t>(i)], depth - used});
                for (int x = 0; x <= cap; ++x) {
                    d[static_cast<std::size_t>(i)] = x;
                    self(self, i + 1, used + x);
                }
                d[static_cast<std::size_t>(i)] = 0;
            };
            recurse(recurse, 0, 0);
            cur[static_cast<std::size_t>(code)] = best;
        }
        next = cur;
    }
    std::vector<int> full(static_cast<std::size_t>(ns));
    for (int i = 0; i < ns; ++i)
        full[static_cast<std::size_t>(i)] = inst.energy[static_cast<std::size_t>(i)];
    return next[static_cast<std::size_t>(encode(full))];
}

} // namespace dispatch_oracle
