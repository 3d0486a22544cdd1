#include "ivmm/dense_lmsr.hpp"

#include <cmath>

#include "ivmm/numeric.hpp"

namespace ivmm {

DenseLmsr::DenseLmsr(double b, int K) : b_(b), K_(K) {
    if (!(b > 0.0) || !std::isfinite(b)) throw BadArgs("liquidity b must be positive and finite");
    if (K < 1 || K > kMaxK)
        throw BadArgs("dense oracle supports K in [1, " + std::to_string(kMaxK) + "], got " +
                      std::to_string(K));
    theta_.assign(std::size_t{1} << K, 0.0);
}

std::pair<std::size_t, std::size_t> DenseLmsr::bucket_range(const Interval& iv) const {
    const unsigned k = static_cast<unsigned>(K_);
    if (precision(iv.lo) > k || precision(iv.hi) > k)
        throw EndpointTooFine("endpoint precision exceeds oracle K=" + std::to_string(K_) +
                              " for " + to_string(iv));
    return {static_cast<std::size_t>(iv.lo.scaled_num(k)),
            static_cast<std::size_t>(iv.hi.scaled_num(k))};
}

double DenseLmsr::log_normalizer() const {
    double m = theta_[0];
    for (double t : theta_) m = std::max(m, t);
    double sum = 0.0;
    for (double t : theta_) sum += std::exp((t - m) / b_);
    return m / b_ + std::log(sum);
}

double DenseLmsr::log_mean_normalizer() const {
    return log_normalizer() - std::log(static_cast<double>(theta_.size()));
}

double DenseLmsr::outcome_price(std::size_t i) const {
    return std::exp(theta_[i] / b_ - log_normalizer());
}

void DenseLmsr::set_theta(std::size_t i, double v) {
    if (!std::isfinite(v)) throw NonFiniteShares("theta must be finite");
    theta_[i] = v;
}

double DenseLmsr::log_range_sum(std::size_t lo, std::size_t hi) const {
    if (lo >= hi) return kNegInf;
    double m = kNegInf;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, theta_[i]);
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += std::exp((theta_[i] - m) / b_);
    return m / b_ + std::log(sum);
}

double DenseLmsr::price(const Interval& iv) const {
    const auto [lo, hi] = bucket_range(iv);
    return std::exp(log_range_sum(lo, hi) - log_normalizer());
}

double DenseLmsr::cost(const Interval& iv, double s) const {
    if (!std::isfinite(s)) throw NonFiniteShares("share quantity must be finite");
    if (s == 0.0) return 0.0;
    // b log(1 - p + p e^{s/b}) with p and 1-p both carried as logs, so the
    // complement keeps full precision when p is within an ulp of 0 or 1.
    const auto [lo, hi] = bucket_range(iv);
    const double log_z = log_normalizer();
    const double log_p = log_range_sum(lo, hi) - log_z;
    const double log_comp =
        log_add_exp(log_range_sum(0, lo), log_range_sum(hi, theta_.size())) - log_z;
    if (log_comp == kNegInf) return s; // full-support bundle: pure cash
    return b_ * log_add_exp(log_comp, s / b_ + log_p);
}

double DenseLmsr::buy(const Interval& iv, double s) {
    const double c = cost(iv, s); // validates iv and s before mutating
    const auto [lo, hi] = bucket_range(iv);
    for (std::size_t i = lo; i < hi; ++i) theta_[i] += s;
    return c;
}

} // namespace ivmm
