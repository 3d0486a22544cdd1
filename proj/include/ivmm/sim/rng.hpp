#ifndef IVMM_SIM_RNG_HPP
#define IVMM_SIM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace ivmm::sim {

// splitmix64. The state advances by the 64-bit golden gamma and the output
// mix uses the standard finalizer constants, fixed here so that simulation
// traces are reproducible across implementations:
//   state += 0x9E3779B97F4A7C15
//   z = state; z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//   z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1): 53-bit mantissa, offset half an ulp so that log()
    // and Box-Muller never see zero.
    double uniform() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Marsaglia-Tsang; shapes below 1 are boosted through Gamma(shape + 1).
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            const double x = normal();
            const double v1 = 1.0 + c * x;
            if (v1 <= 0.0) continue;
            const double v = v1 * v1 * v1;
            const double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    double beta(double a, double b) {
        const double x = gamma(a);
        const double y = gamma(b);
        return x / (x + y);
    }

    int binomial(int n, double p) {
        int k = 0;
        for (int i = 0; i < n; ++i) k += uniform() < p ? 1 : 0;
        return k;
    }

private:
    std::uint64_t state_;
};

// Derives an independent stream from a base seed and a list of tag words by
// chaining the splitmix output mix. Used to key arrival picks, candidate
// draws and quiescence sweeps off (trace, arrival, trader) coordinates so
// that controlled traces share their randomness across market makers.
inline std::uint64_t derive_stream(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    SplitMix64 h(base);
    std::uint64_t acc = h.next();
    for (std::uint64_t t : tags) {
        SplitMix64 g(acc ^ (t + 0x9E3779B97F4A7C15ull));
        acc = g.next();
    }
    return acc;
}

} // namespace ivmm::sim

#endif // IVMM_SIM_RNG_HPP
