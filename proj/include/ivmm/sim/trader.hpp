#ifndef IVMM_SIM_TRADER_HPP
#define IVMM_SIM_TRADER_HPP

#include <span>
#include <vector>

#include "ivmm/sim/rng.hpp"

namespace ivmm::sim {

// Exponential-utility trader, u(W) = -e^{-W}, with a Beta(alpha, beta)
// belief over the outcome.
struct Trader {
    int id;
    double alpha;
    double beta;
};

// Noisy observers of the true signal p: trader i draws
// a_i ~ Binomial(n_i, p) with n_i = 16 i, b_i = n_i - a_i. a_i is clamped to
// [1, n_i - 1] to keep the belief proper.
std::vector<Trader> sample_traders(int n_traders, double true_signal, SplitMix64& rng);

// Trader's belief discretized into 2^K equal bins.
std::vector<double> belief_masses(const Trader& t, int K);

// Equal-weight logarithmic opinion pool of the traders' discretized beliefs:
// q*(w) proportional to exp((1/n) sum_i log q_i(w)). This is the
// market-clearing price of the exponential-utility trader population.
// Throws DegenerateBelief if every bin pools to zero mass.
std::vector<double> clearing_distribution(std::span<const Trader> traders, int K);

// KL(p || q) in nats; q is clamped below at 1e-300, zero-mass p bins
// contribute nothing.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// Sums 2^{from_K - to_K} adjacent bins.
std::vector<double> coarsen(std::span<const double> dist, int from_K, int to_K);

} // namespace ivmm::sim

#endif // IVMM_SIM_TRADER_HPP
