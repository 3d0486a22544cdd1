#ifndef IVMM_DYADIC_HPP
#define IVMM_DYADIC_HPP

#include <compare>
#include <cstdint>
#include <string>

#include "ivmm/errors.hpp"

namespace ivmm {

// Exact dyadic rational in [0, 1]: value = num / 2^prec, prec <= 62.
// Stored canonically (num odd, or the whole numbers 0 and 1 at prec 0), so
// equality and ordering are plain field comparisons on a common denominator.
class Dyadic {
public:
    static constexpr unsigned kMaxPrec = 62;

    constexpr Dyadic() = default;

    // Canonicalizes; rejects prec > 62 and values outside [0, 1].
    static Dyadic from_parts(std::uint64_t num, unsigned prec);

    static constexpr Dyadic zero() { return Dyadic{}; }
    static constexpr Dyadic one() { return Dyadic{1, 0}; }

    std::uint64_t num() const { return num_; }
    unsigned prec() const { return prec_; }

    double to_double() const;
    bool is_zero() const { return num_ == 0; }
    bool is_one() const { return num_ == 1 && prec_ == 0; }

    // Numerator rescaled to denominator 2^p; requires p >= prec().
    std::uint64_t scaled_num(unsigned p) const { return num_ << (p - prec_); }

    friend std::strong_ordering operator<=>(Dyadic a, Dyadic b) {
        const unsigned p = a.prec_ > b.prec_ ? a.prec_ : b.prec_;
        return a.scaled_num(p) <=> b.scaled_num(p);
    }
    friend bool operator==(Dyadic a, Dyadic b) {
        return a.num_ == b.num_ && a.prec_ == b.prec_;
    }

private:
    constexpr Dyadic(std::uint64_t num, unsigned prec) : num_(num), prec_(prec) {}

    std::uint64_t num_ = 0;
    unsigned prec_ = 0;
};

// Smallest k >= 0 such that d * 2^k is an integer; equals d.prec() in
// canonical form.
inline unsigned precision(Dyadic d) { return d.prec(); }

// Exact difference hi - lo rounded once to double; requires lo <= hi.
double dyadic_sub(Dyadic hi, Dyadic lo);

// Exact midpoint (lo + hi) / 2; throws StructureViolation if the result would
// need more than 62 bits.
Dyadic dyadic_midpoint(Dyadic lo, Dyadic hi);

// Canonical text form "num/2^prec"; parses that form plus decimal strings
// that are exactly dyadic at <= 62 bits ("0.25" ok, "0.1" rejected).
std::string to_string(Dyadic d);
Dyadic parse_dyadic(const std::string& text);

// Half-open interval [lo, hi) with dyadic endpoints, lo < hi.
struct Interval {
    Dyadic lo;
    Dyadic hi;

    Interval(Dyadic lo_, Dyadic hi_) : lo(lo_), hi(hi_) {
        if (!(lo < hi))
            throw InvalidInterval("interval requires lo < hi: [" + ivmm::to_string(lo) +
                                  ", " + ivmm::to_string(hi) + ")");
    }

    double width() const { return dyadic_sub(hi, lo); }
    friend bool operator==(const Interval& a, const Interval& b) {
        return a.lo == b.lo && a.hi == b.hi;
    }
};

inline Interval full_interval() { return Interval(Dyadic::zero(), Dyadic::one()); }

// Indicator payoff of the interval security: 1 if lo <= outcome < hi.
inline int payout(const Interval& iv, Dyadic outcome) {
    return (iv.lo <= outcome && outcome < iv.hi) ? 1 : 0;
}

inline std::string to_string(const Interval& iv) {
    return "[" + to_string(iv.lo) + ", " + to_string(iv.hi) + ")";
}

} // namespace ivmm

#endif // IVMM_DYADIC_HPP
