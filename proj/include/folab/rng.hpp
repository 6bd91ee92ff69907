#pragma once

#include <cstdint>
#include <vector>

namespace folab {

// SplitMix64 (Steele/Lea/Flood). Small, fast, and trivially seedable; each
// sample index gets its own stream so results cannot depend on evaluation
// order or thread count.
struct SplitMix64 {
    uint64_t state;

    explicit SplitMix64(uint64_t seed) : state(seed) {}

    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 mantissa bits.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

// Decorrelates (seed, index) pairs into independent stream seeds.
inline uint64_t stream_seed(uint64_t seed, uint64_t index) {
    SplitMix64 g(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    return g.next();
}

// Inverse-CDF draw against cumulative weights (strictly the first index whose
// cumulative mass exceeds u). cumulative.back() is the total mass.
inline int draw_index(const std::vector<double>& cumulative, double u) {
    double target = u * cumulative.back();
    int lo = 0, hi = static_cast<int>(cumulative.size()) - 1;
    while (lo < hi) {
        int mid = (lo + hi) / 2;
        if (cumulative[mid] > target) hi = mid; else lo = mid + 1;
    }
    return lo;
}

} // namespace folab
