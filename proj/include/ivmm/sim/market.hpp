#ifndef IVMM_SIM_MARKET_HPP
#define IVMM_SIM_MARKET_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ivmm/lcmm.hpp"
#include "ivmm/lmsr_tree.hpp"

namespace ivmm::sim {

// Budget-limited market maker as configured in an experiment: either an LMSR
// tree operating at a fixed precision, or an LCMM splitting the budget
// across levels. The liquidity mapping makes the worst-case loss equal the
// budget: b = B / (k log 2) for an LMSR at precision k, and
// b_k = f_k B / (k log 2) per funded LCMM level (a tiny epsilon elsewhere).
class SimMarket {
public:
    static SimMarket lmsr_at(int precision, double budget);

    // split: (level, budget fraction) pairs; fractions must sum to 1.
    static SimMarket lcmm_split(std::vector<std::pair<int, double>> split, double budget);

    const std::string& name() const { return name_; }
    int precision() const { return precision_; }
    double loss_bound() const;

    double price(const Interval& iv) const;
    double cost(const Interval& iv, double s) const;
    double buy(const Interval& iv, double s); // accumulates collected()

    // Money collected across all executed trades.
    double collected() const { return collected_; }

    // Market distribution over the 2^level equal bins. Queries below the
    // engine's trading precision resolve by the engines' uniform-within-leaf
    // rule, which realizes the even-split refinement of coarse prices.
    std::vector<double> level_distribution(int level) const;

private:
    SimMarket() = default;

    std::string name_;
    int precision_ = 0;
    std::unique_ptr<LmsrTree> lmsr_;
    std::unique_ptr<LcmmTree> lcmm_;
    double collected_ = 0.0;
};

} // namespace ivmm::sim

#endif // IVMM_SIM_MARKET_HPP
