#ifndef IVMM_LOSS_AUDIT_HPP
#define IVMM_LOSS_AUDIT_HPP

#include <vector>

#include "ivmm/dyadic.hpp"

namespace ivmm {

// Records every executed trade and the money the market maker collected, so
// the realized loss at any settled outcome can be audited against the
// engine's advertised worst-case bound. Test/CLI utility, single-threaded.
class LossAudit {
public:
    struct Trade {
        Interval iv;
        double shares;
        double cost;
    };

    void record(const Interval& iv, double shares, double cost) {
        trades_.push_back({iv, shares, cost});
        collected_ += cost;
    }

    double collected() const { return collected_; }
    const std::vector<Trade>& trades() const { return trades_; }

    // Total payout owed if the market settles at `outcome`.
    double payout(Dyadic outcome) const;

    // Realized loss at one outcome: payout owed minus money collected.
    double loss(Dyadic outcome) const { return payout(outcome) - collected_; }

    // Max loss over all outcomes. The payout profile is piecewise constant
    // between recorded endpoints, so a breakpoint sweep is exact.
    double worst_loss() const;

private:
    std::vector<Trade> trades_;
    double collected_ = 0.0;
};

} // namespace ivmm

#endif // IVMM_LOSS_AUDIT_HPP
