#include "ivmm/loss_audit.hpp"

#include <algorithm>
#include <map>

namespace ivmm {

double LossAudit::payout(Dyadic outcome) const {
    double total = 0.0;
    for (const Trade& t : trades_) total += t.shares * ivmm::payout(t.iv, outcome);
    return total;
}

double LossAudit::worst_loss() const {
    // Sweep: +shares at lo, -shares at hi; the running sum is the payout on
    // each segment between consecutive endpoints. Segments partition [0, 1),
    // so the max over segments is the max over every settleable outcome.
    std::map<Dyadic, double> delta;
    for (const Trade& t : trades_) {
        delta[t.iv.lo] += t.shares;
        delta[t.iv.hi] -= t.shares;
    }
    double run = 0.0;
    bool have = false;
    double best = 0.0;
    if (delta.empty() || delta.begin()->first != Dyadic::zero()) {
        best = 0.0; // leading segment [0, first endpoint) pays nothing
        have = true;
    }
    for (const auto& [at, d] : delta) {
        if (at == Dyadic::one()) break; // outcomes live in [0, 1)
        run += d;
        if (!have || run > best) best = run;
        have = true;
    }
    return best - collected_;
}

} // namespace ivmm
