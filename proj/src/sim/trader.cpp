#include "ivmm/sim/trader.hpp"

#include <algorithm>
#include <cmath>

#include "ivmm/errors.hpp"
#include "ivmm/numeric.hpp"
#include "ivmm/sim/beta_math.hpp"

namespace ivmm::sim {

std::vector<Trader> sample_traders(int n_traders, double true_signal, SplitMix64& rng) {
    std::vector<Trader> out;
    out.reserve(static_cast<std::size_t>(n_traders));
    for (int i = 1; i <= n_traders; ++i) {
        const int n_i = 16 * i;
        int a = rng.binomial(n_i, true_signal);
        a = std::clamp(a, 1, n_i - 1);
        out.push_back({i, static_cast<double>(a), static_cast<double>(n_i - a)});
    }
    return out;
}

std::vector<double> belief_masses(const Trader& t, int K) {
    return beta_bin_masses(t.alpha, t.beta, K);
}

std::vector<double> clearing_distribution(std::span<const Trader> traders, int K) {
    if (traders.empty()) throw BadArgs("clearing distribution needs at least one trader");
    const std::size_t n = std::size_t{1} << K;
    std::vector<double> pool_log(n, 0.0);
    for (const Trader& t : traders) {
        const std::vector<double> mass = belief_masses(t, K);
        for (std::size_t j = 0; j < n; ++j)
            pool_log[j] += mass[j] > 0.0 ? std::log(mass[j]) : kNegInf;
    }
    const double inv_n = 1.0 / static_cast<double>(traders.size());
    for (double& v : pool_log) v *= inv_n;
    const double log_z = log_sum_exp(pool_log);
    if (log_z == kNegInf)
        throw DegenerateBelief("every bin of the opinion pool underflowed to zero");
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j)
        out[j] = pool_log[j] == kNegInf ? 0.0 : std::exp(pool_log[j] - log_z);
    return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    double kl = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (p[j] <= 0.0) continue;
        kl += p[j] * (std::log(p[j]) - std::log(std::max(q[j], 1e-300)));
    }
    return std::max(kl, 0.0);
}

std::vector<double> coarsen(std::span<const double> dist, int from_K, int to_K) {
    const std::size_t factor = std::size_t{1} << (from_K - to_K);
    std::vector<double> out(std::size_t{1} << to_K, 0.0);
    for (std::size_t j = 0; j < dist.size(); ++j) out[j / factor] += dist[j];
    return out;
}

} // namespace ivmm::sim
