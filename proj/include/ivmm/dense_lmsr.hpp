#ifndef IVMM_DENSE_LMSR_HPP
#define IVMM_DENSE_LMSR_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "ivmm/dyadic.hpp"

namespace ivmm {

// Explicit complete-market LMSR over 2^K atomic outcomes. This is the
// correctness oracle for the tree engines, so K is capped at 16: it exists
// for desk-scale verification, not production use. Single-threaded.
class DenseLmsr {
public:
    static constexpr int kMaxK = 16;

    DenseLmsr(double b, int K);

    // Price of the interval bundle per the softmax over outcome shares,
    // computed in the log domain.
    double price(const Interval& iv) const;

    // Cost of s shares at the current state; does not mutate.
    double cost(const Interval& iv, double s) const;

    // Executes the trade: adds s to every outcome share in iv, returns the
    // cost charged.
    double buy(const Interval& iv, double s);

    double b() const { return b_; }
    int K() const { return K_; }
    std::size_t n_outcomes() const { return theta_.size(); }

    // Instantaneous price of atomic outcome i.
    double outcome_price(std::size_t i) const;

    // log( (1/N) * sum_w e^{theta_w / b} ), the implied log partial
    // normalizer of the whole market (matches an LMSR tree's root).
    double log_mean_normalizer() const;

    double theta(std::size_t i) const { return theta_[i]; }
    void set_theta(std::size_t i, double v);

    // [first, last) outcome indexes covered by iv; throws EndpointTooFine if
    // an endpoint needs more than K bits.
    std::pair<std::size_t, std::size_t> bucket_range(const Interval& iv) const;

private:
    double log_normalizer() const;
    double log_range_sum(std::size_t lo, std::size_t hi) const;

    double b_;
    int K_;
    std::vector<double> theta_;
};

} // namespace ivmm

#endif // IVMM_DENSE_LMSR_HPP
