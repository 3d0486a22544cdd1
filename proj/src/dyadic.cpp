#include "ivmm/dyadic.hpp"

#include <bit>
#include <cctype>
#include <cmath>

namespace ivmm {

Dyadic Dyadic::from_parts(std::uint64_t num, unsigned prec) {
    if (prec > kMaxPrec)
        throw BadArgs("dyadic precision " + std::to_string(prec) + " exceeds 62 bits");
    if (num > (std::uint64_t{1} << prec))
        throw BadArgs("dyadic value exceeds 1: " + std::to_string(num) + "/2^" +
                      std::to_string(prec));
    if (num == 0) return Dyadic{0, 0};
    const unsigned shift = std::min<unsigned>(std::countr_zero(num), prec);
    return Dyadic{num >> shift, prec - shift};
}

double Dyadic::to_double() const {
    return std::ldexp(static_cast<double>(num_), -static_cast<int>(prec_));
}

double dyadic_sub(Dyadic hi, Dyadic lo) {
    const unsigned p = std::max(hi.prec(), lo.prec());
    const std::uint64_t d = hi.scaled_num(p) - lo.scaled_num(p);
    return std::ldexp(static_cast<double>(d), -static_cast<int>(p));
}

Dyadic dyadic_midpoint(Dyadic lo, Dyadic hi) {
    const unsigned p = std::max(lo.prec(), hi.prec());
    const std::uint64_t sum = lo.scaled_num(p) + hi.scaled_num(p); // <= 2^63
    if ((sum & 1) && p + 1 > Dyadic::kMaxPrec)
        throw StructureViolation("midpoint below 2^-62 resolution");
    if (sum & 1) return Dyadic::from_parts(sum, p + 1);
    return Dyadic::from_parts(sum >> 1, p);
}

std::string to_string(Dyadic d) {
    return std::to_string(d.num()) + "/2^" + std::to_string(d.prec());
}

namespace {

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    if (s.empty()) throw ParseError("empty " + what);
    std::uint64_t v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError("bad digit in " + what + ": '" + s + "'");
        if (v > (UINT64_MAX - (c - '0')) / 10) throw ParseError(what + " overflows: " + s);
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
}

} // namespace

Dyadic parse_dyadic(const std::string& text) {
    if (text.empty()) throw ParseError("empty dyadic");

    // "num/2^prec"
    if (auto slash = text.find('/'); slash != std::string::npos) {
        if (text.compare(slash, 3, "/2^") != 0)
            throw ParseError("expected num/2^prec, got '" + text + "'");
        const std::uint64_t num = parse_u64(text.substr(0, slash), "numerator");
        const std::uint64_t prec = parse_u64(text.substr(slash + 3), "precision");
        if (prec > Dyadic::kMaxPrec)
            throw ParseError("precision " + std::to_string(prec) + " exceeds 62 in '" + text + "'");
        try {
            return Dyadic::from_parts(num, static_cast<unsigned>(prec));
        } catch (const BadArgs& e) {
            throw ParseError(e.what());
        }
    }

    // Decimal: accepted only when the value is exactly a dyadic rational.
    const auto dot = text.find('.');
    const std::string int_part = dot == std::string::npos ? text : text.substr(0, dot);
    const std::string frac_part = dot == std::string::npos ? "" : text.substr(dot + 1);
    const std::uint64_t whole = parse_u64(int_part.empty() ? "0" : int_part, "integer part");
    if (whole > 1) throw ParseError("dyadic value exceeds 1: '" + text + "'");

    if (frac_part.size() > 18)
        throw ParseError("more than 18 decimal digits in '" + text + "'");
    std::uint64_t frac = 0;
    std::uint64_t pow10 = 1;
    for (char c : frac_part) {
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ParseError("bad digit in '" + text + "'");
        frac = frac * 10 + static_cast<std::uint64_t>(c - '0');
        pow10 *= 10;
    }
    if (whole == 1 && frac != 0) throw ParseError("dyadic value exceeds 1: '" + text + "'");
    if (frac == 0) return whole == 1 ? Dyadic::one() : Dyadic::zero();

    // frac / 10^d = frac / (2^d 5^d): dyadic iff 5^d divides frac.
    const unsigned d = static_cast<unsigned>(frac_part.size());
    std::uint64_t pow5 = pow10;
    for (unsigned i = 0; i < d; ++i) pow5 /= 2;
    if (frac % pow5 != 0)
        throw ParseError("'" + text + "' is not an exact dyadic rational");
    return Dyadic::from_parts(frac / pow5, d);
}

} // namespace ivmm
