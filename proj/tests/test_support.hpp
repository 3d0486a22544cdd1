#ifndef IVMM_TEST_SUPPORT_HPP
#define IVMM_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>

#include "ivmm/dyadic.hpp"

namespace ivmm::test {

// Small deterministic generator for tests that do not go through the sim
// module's stream machinery.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

// Random dyadic with precision <= max_prec (value in [0, 1]).
inline Dyadic random_dyadic(Rng& rng, unsigned max_prec) {
    const unsigned prec = static_cast<unsigned>(rng.below(max_prec + 1));
    const std::uint64_t num = rng.below((std::uint64_t{1} << prec) + 1);
    return Dyadic::from_parts(num, prec);
}

// Random interval [lo, hi) with distinct endpoints of precision <= max_prec.
inline Interval random_interval(Rng& rng, unsigned max_prec) {
    for (;;) {
        Dyadic a = random_dyadic(rng, max_prec);
        Dyadic b = random_dyadic(rng, max_prec);
        if (a == b) continue;
        if (b < a) std::swap(a, b);
        return Interval(a, b);
    }
}

// Relative comparison with an absolute floor: quantities produced by
// catastrophic cancellation (a two-sided price is a difference of two O(1)
// one-sided prices) carry ~1e-16 absolute noise in any double
// implementation, so pure relative tolerance is unattainable for tiny
// values.
inline bool rel_close(double a, double b, double tol, double abs_floor = 1e-12) {
    const double diff = std::abs(a - b);
    if (diff <= abs_floor) return true;
    return diff <= tol * std::max(std::abs(a), std::abs(b));
}

} // namespace ivmm::test

#endif // IVMM_TEST_SUPPORT_HPP
