#ifndef IVMM_SIM_DYNAMICS_HPP
#define IVMM_SIM_DYNAMICS_HPP

#include <optional>
#include <vector>

#include "ivmm/sim/market.hpp"
#include "ivmm/sim/rng.hpp"
#include "ivmm/sim/trader.hpp"

namespace ivmm::sim {

struct OptimalShares {
    double shares; // 0 when the best attainable gain is below tolerance
    double gain;   // expected-utility gain over not trading (>= 0)
};

// Expected-utility-optimal position in the interval security for a trader
// whose (position-adjusted) belief assigns probability q to the interval:
//   argmax_s -( q e^{-(s - c(s))} + (1-q) e^{c(s)} ),  c(s) = cost(I, s),
// solved by golden-section search on s in [-64, 64] to 1e-8. Degenerate q
// returns {0, 0}.
OptimalShares optimal_shares(double q, const SimMarket& market, const Interval& iv,
                             double quiescence_tol);

// Log-space core: takes log q and log(1 - q) separately, so beliefs that sit
// within an ulp of 0 or 1 (heavily tilted wealth profiles) keep their full
// odds information.
OptimalShares optimal_shares_log(double log_q, double log_1mq, const SimMarket& market,
                                 const Interval& iv, double quiescence_tol);

struct TradeEvent {
    int step;
    int trader_id;
    Interval iv;
    double shares;
    double cost;
    double gain;
};

// One (trace, market) trading run: exponential-utility traders with Beta
// beliefs arrive one at a time, each considering a fresh batch of candidate
// intervals sampled from their belief and executing the single
// expected-utility-best trade. Wealth profiles accumulate so a trader's
// effective belief is their prior tilted by e^{-wealth}; this is what drives
// the population to the market-clearing logarithmic pool.
class TradingSession {
public:
    // Streams are keyed off (seed, trace, arrival [, trader]) so that runs
    // of different market makers on the same trace see identical arrival
    // orders and raw candidate draws.
    TradingSession(SimMarket market, std::span<const Trader> traders, int K,
                   int candidates_per_turn, double quiescence_tol, std::uint64_t seed,
                   std::uint64_t trace);

    // Consumes arrivals until one trade executes (returned) or a
    // full-population sweep with fresh candidates certifies quiescence
    // (nullopt). Quiescence is a sampled approximation of "no trader has an
    // incentive to trade".
    std::optional<TradeEvent> next_trade();

    const SimMarket& market() const { return market_; }
    SimMarket& market() { return market_; }

    // Sum of all trader wealth profiles at one outcome bin; equals the
    // market maker's realized loss at that outcome.
    double total_trader_wealth(std::size_t bin) const;

    int arrivals_consumed() const { return arrival_; }

    std::size_t n_traders() const { return traders_.size(); }
    const std::vector<double>& wealth_of(std::size_t i) const { return traders_[i].wealth; }
    const std::vector<double>& log_belief_of(std::size_t i) const {
        return traders_[i].log_belief;
    }

private:
    struct TraderState {
        Trader trader;
        std::vector<double> log_belief; // log bin masses at resolution K
        std::vector<double> wealth;     // per-bin wealth profile
    };

    struct Candidate {
        Interval iv;
        double shares;
        double cost_quote;
        double gain;
    };

    std::optional<Candidate> best_candidate(const TraderState& ts, SplitMix64 stream) const;
    std::optional<Interval> draw_interval(const TraderState& ts, SplitMix64& stream) const;

    SimMarket market_;
    std::vector<TraderState> traders_;
    int K_;
    int candidates_;
    double tol_;
    std::uint64_t seed_;
    std::uint64_t trace_;
    int arrival_ = 0;
    int steps_ = 0;
};

} // namespace ivmm::sim

#endif // IVMM_SIM_DYNAMICS_HPP
