#pragma once

#include <cstdint>
#include <string_view>

namespace capsim {

// Counter-based random numbers: every draw is a pure hash of
// (root seed, domain, key0, key1, counter). There is no mutable generator
// state, so any substream can be evaluated at any index from any thread and
// the result depends only on the scenario seed. Substream layout:
//
//   domain 1: background fleet draws, keys = (trace index, unit index)
//   domain 2: resource-set generator draws, keys = (trace index, fnv1a(id))
//   domain 3: scratch/test streams
//
// Domain 2 is deliberately independent of domain 1 and fixed per
// (resource id, trace index), which makes risk differences between candidate
// resource sets common-random-number comparisons.

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

inline std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
    return mix64(h + kGolden + v);
}

} // namespace detail

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

class Substream {
public:
    Substream(std::uint64_t seed, std::uint64_t domain, std::uint64_t key0,
              std::uint64_t key1)
        : key_(detail::combine(
              detail::combine(detail::combine(detail::mix64(seed), domain), key0),
              key1)) {}

    std::uint64_t bits(std::uint64_t counter) const {
        return detail::mix64(key_ ^ detail::mix64(counter * detail::kGolden + 1));
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t counter) const {
        return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
    }

    bool bernoulli(std::uint64_t counter, double p) const {
        return uniform(counter) < p;
    }

private:
    std::uint64_t key_;
};

inline Substream background_unit_stream(std::uint64_t seed, std::uint64_t trace,
                                        std::uint64_t unit_index) {
    return Substream(seed, 1, trace, unit_index);
}

inline Substream resource_unit_stream(std::uint64_t seed, std::uint64_t trace,
                                      std::string_view resource_id) {
    return Substream(seed, 2, trace, fnv1a(resource_id));
}

inline Substream scratch_stream(std::uint64_t seed, std::uint64_t key0,
                                std::uint64_t key1) {
    return Substream(seed, 3, key0, key1);
}

} // namespace capsim
