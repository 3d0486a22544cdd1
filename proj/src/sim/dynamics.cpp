#include "ivmm/sim/dynamics.hpp"

#include <cmath>

#include "ivmm/errors.hpp"
#include "ivmm/numeric.hpp"

namespace ivmm::sim {

namespace {

constexpr std::uint64_t kArrivalTag = 0xA881;
constexpr std::uint64_t kCandidateTag = 0xCA4D;
constexpr std::uint64_t kSweepTag = 0x53EE;
constexpr double kShareRange = 64.0;

} // namespace

OptimalShares optimal_shares(double q, const SimMarket& market, const Interval& iv,
                             double quiescence_tol) {
    if (!(q > 0.0) || !(q < 1.0)) return {0.0, 0.0};
    return optimal_shares_log(std::log(q), std::log1p(-q), market, iv, quiescence_tol);
}

OptimalShares optimal_shares_log(double log_q, double log_1mq, const SimMarket& market,
                                 const Interval& iv, double quiescence_tol) {
    if (log_q == kNegInf || log_1mq == kNegInf) return {0.0, 0.0};
    // Equivalent convex objective: minimize
    //   f(s) = c(s) + log( q e^{-s} + 1 - q ),  with f(0) = 0;
    // the expected utility is -e^{f(s)}, so the gain over s = 0 is
    // 1 - e^{f(s*)}.
    const auto f = [&](double s) {
        return market.cost(iv, s) + log_add_exp(log_q - s, log_1mq);
    };

    double lo = -kShareRange, hi = kShareRange;
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > 1e-8) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    const double s_star = 0.5 * (lo + hi);
    const double f_star = f(s_star);
    const double gain = -std::expm1(f_star); // 1 - e^{f*}
    if (!(gain > quiescence_tol)) return {0.0, std::max(gain, 0.0)};
    return {s_star, gain};
}

TradingSession::TradingSession(SimMarket market, std::span<const Trader> traders, int K,
                               int candidates_per_turn, double quiescence_tol,
                               std::uint64_t seed, std::uint64_t trace)
    : market_(std::move(market)),
      K_(K),
      candidates_(candidates_per_turn),
      tol_(quiescence_tol),
      seed_(seed),
      trace_(trace) {
    const std::size_t bins = std::size_t{1} << K_;
    for (const Trader& t : traders) {
        TraderState ts;
        ts.trader = t;
        ts.wealth.assign(bins, 0.0);
        const std::vector<double> mass = belief_masses(t, K_);
        ts.log_belief.resize(bins);
        for (std::size_t j = 0; j < bins; ++j)
            ts.log_belief[j] = mass[j] > 0.0 ? std::log(mass[j]) : kNegInf;
        traders_.push_back(std::move(ts));
    }
}

std::optional<Interval> TradingSession::draw_interval(const TraderState& ts,
                                                      SplitMix64& stream) const {
    const double scale = static_cast<double>(std::uint64_t{1} << market_.precision());
    for (int attempt = 0; attempt < 100; ++attempt) {
        const double x1 = stream.beta(ts.trader.alpha, ts.trader.beta);
        const double x2 = stream.beta(ts.trader.alpha, ts.trader.beta);
        const auto snap = [&](double x) {
            return Dyadic::from_parts(
                static_cast<std::uint64_t>(std::llround(x * scale)),
                static_cast<unsigned>(market_.precision()));
        };
        Dyadic a = snap(x1);
        Dyadic b = snap(x2);
        if (a == b) continue; // rounded to a degenerate interval, resample
        if (b < a) std::swap(a, b);
        return Interval(a, b);
    }
    return std::nullopt;
}

std::optional<TradingSession::Candidate>
TradingSession::best_candidate(const TraderState& ts, SplitMix64 stream) const {
    // Position-adjusted belief: prior tilted by e^{-wealth}, evaluated via a
    // prefix sum so every candidate interval is O(1).
    const std::size_t bins = ts.wealth.size();
    double peak = kNegInf;
    for (std::size_t j = 0; j < bins; ++j)
        peak = std::max(peak, ts.log_belief[j] - ts.wealth[j]);
    if (peak == kNegInf) return std::nullopt;
    std::vector<double> prefix(bins + 1, 0.0);
    for (std::size_t j = 0; j < bins; ++j)
        prefix[j + 1] = prefix[j] + std::exp(ts.log_belief[j] - ts.wealth[j] - peak);
    const double total = prefix[bins];

    const double log_total = std::log(total);
    std::optional<Candidate> best;
    for (int c = 0; c < candidates_; ++c) {
        const std::optional<Interval> iv = draw_interval(ts, stream);
        if (!iv) continue;
        const std::size_t lo = iv->lo.scaled_num(static_cast<unsigned>(K_));
        const std::size_t hi = iv->hi.scaled_num(static_cast<unsigned>(K_));
        const double inside = prefix[hi] - prefix[lo];
        const double outside = prefix[lo] + (total - prefix[hi]);
        const double log_q = inside > 0.0 ? std::log(inside) - log_total : kNegInf;
        const double log_1mq = outside > 0.0 ? std::log(outside) - log_total : kNegInf;
        const OptimalShares opt = optimal_shares_log(log_q, log_1mq, market_, *iv, tol_);
        if (opt.shares == 0.0) continue;
        if (!best || opt.gain > best->gain)
            best = Candidate{*iv, opt.shares, 0.0, opt.gain};
    }
    return best;
}

std::optional<TradeEvent> TradingSession::next_trade() {
    constexpr int arrival_cap = 2'000'000;
    // Quiescence ("no trader in the population has an incentive to trade")
    // is undecidable exactly, so it is certified by sampling: full-population
    // sweeps with fresh candidate draws. A single quiet sweep can be a
    // sampling fluke, so several consecutive ones are required.
    constexpr int quiet_sweeps_needed = 5;
    int quiet_sweeps = 0;
    while (arrival_ < arrival_cap) {
        const int i = arrival_++;
        const std::size_t who = SplitMix64(derive_stream(seed_, {kArrivalTag, trace_,
                                                                 static_cast<std::uint64_t>(i)}))
                                    .below(traders_.size());
        TraderState& ts = traders_[who];
        const SplitMix64 cand_stream(derive_stream(
            seed_, {kCandidateTag, trace_, static_cast<std::uint64_t>(i)}));
        if (const auto best = best_candidate(ts, cand_stream)) {
            const double cost = market_.buy(best->iv, best->shares);
            const std::size_t lo = best->iv.lo.scaled_num(static_cast<unsigned>(K_));
            const std::size_t hi = best->iv.hi.scaled_num(static_cast<unsigned>(K_));
            for (std::size_t j = 0; j < ts.wealth.size(); ++j) {
                ts.wealth[j] -= cost;
                if (j >= lo && j < hi) ts.wealth[j] += best->shares;
            }
            return TradeEvent{++steps_, ts.trader.id, best->iv, best->shares, cost, best->gain};
        }
        // The picked trader declined: sweep everyone.
        bool anyone = false;
        for (std::size_t j = 0; j < traders_.size() && !anyone; ++j) {
            const SplitMix64 sweep_stream(derive_stream(
                seed_, {kSweepTag, trace_, static_cast<std::uint64_t>(i),
                        static_cast<std::uint64_t>(j)}));
            anyone = best_candidate(traders_[j], sweep_stream).has_value();
        }
        quiet_sweeps = anyone ? 0 : quiet_sweeps + 1;
        if (quiet_sweeps >= quiet_sweeps_needed) return std::nullopt;
    }
    throw EngineError("trading session exceeded the arrival cap without quiescing");
}

double TradingSession::total_trader_wealth(std::size_t bin) const {
    double sum = 0.0;
    for (const TraderState& ts : traders_) sum += ts.wealth[bin];
    return sum;
}

} // namespace ivmm::sim
