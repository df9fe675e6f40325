#pragma once

#include <cstdint>
#include <string_view>

namespace rvml {

// SplitMix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
    return h;
}

/**
 * Counter-based stream: draw k of stream (seed, id) is a pure function of
 * (seed, id, k), so results do not depend on which thread asks or when.
 */
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix64(seed ^ mix64(stream))) {}
    CounterRng(std::uint64_t seed, std::string_view stream) : CounterRng(seed, hash_name(stream)) {}

    std::uint64_t at(std::uint64_t k) const { return mix64(key_ ^ mix64(k + 0x632be59bd9b4e019ULL)); }
    std::uint64_t next() { return at(counter_++); }
    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    void skip_to(std::uint64_t k) { counter_ = k; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace rvml
