#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "tep/errors.hpp"

namespace tep {

// Linear-interpolation quantile (the "type 7" estimator) on an already
// sorted sample. p in [0, 1].
inline double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InvalidArgumentError("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t k = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(k);
    if (frac == 0.0 || k + 1 >= sorted.size()) return sorted[k];
    return sorted[k] + frac * (sorted[k + 1] - sorted[k]);
}

inline double quantile(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    return quantile_sorted(values, p);
}

inline double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidArgumentError("mean of empty sample");
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Small deterministic PRNG (xorshift64*). Used for synthetic fixtures and
// randomized tests so that generated bytes do not depend on the standard
// library's distribution implementations.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

    std::uint64_t next_u64() {
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545f4914f6cdd1dull;
    }

    // Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

  private:
    std::uint64_t state_;
};

}  // namespace tep
