#ifndef IVMM_LCMM_HPP
#define IVMM_LCMM_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "ivmm/dyadic.hpp"

namespace ivmm {

// Per-level liquidity parameters b_1, b_2, ... of the multi-resolution
// market, with the cumulative tails B_l = sum_{k>l} b_k available in O(1).
// GeometricTail extends to unbounded depth, which removes any dependence on
// a pre-specified market precision.
class LiquiditySchedule {
public:
    enum class Kind { ExplicitFinite, GeometricTail };

    // b must be non-empty, every entry positive; levels are b_1..b_K, K <= 62.
    static LiquiditySchedule explicit_levels(std::vector<double> b);

    // b_k = b1 * ratio^{k-1} for all k >= 1; ratio in (0, 1).
    static LiquiditySchedule geometric(double b1, double ratio);

    Kind kind() const { return kind_; }

    // Deepest level buys may touch (K, or the dyadic cap 62 for geometric).
    int max_level() const;

    // b_k for k >= 1; LevelOutOfRange when an explicit schedule lacks k.
    double level(int k) const;

    // B_l = sum_{k>l} b_k for l >= 0; exact suffix sums or the geometric
    // closed form b1 * r^l / (1 - r).
    double cumulative(int l) const;

    // Worst-case loss (sum_k k*b_k) * log 2.
    double loss_bound() const;

    // Descriptor accessors for serialization.
    const std::vector<double>& explicit_b() const { return levels_; }
    double b1() const { return b1_; }
    double ratio() const { return ratio_; }

private:
    LiquiditySchedule() = default;

    Kind kind_ = Kind::ExplicitFinite;
    std::vector<double> levels_; // explicit b_1..b_K
    std::vector<double> suffix_; // suffix_[l] = B_l for l in [0, K]
    double b1_ = 0.0;
    double ratio_ = 0.0;
};

// Node of the lazily materialized midpoint-split tree: theta accumulates
// trader shares for this node's security, eta the automatic arbitrage
// purchases. Unmaterialized descendants implicitly carry theta = eta = 0.
struct LcmmNode {
    Interval iv;
    double theta = 0.0;
    double eta = 0.0;
    std::unique_ptr<LcmmNode> left;
    std::unique_ptr<LcmmNode> right;

    explicit LcmmNode(Interval i) : iv(i) {}
    bool is_leaf() const { return !left; }
};

// Multi-resolution linearly constrained market maker: one LMSR per tree
// level tied together by liquidity-weighted coherence constraints, with
// closed-form bottom-up arbitrage removal. Operations run in time linear in
// the bit precision of the traded endpoint. Single-writer buy; price and
// cost are read-only and may run concurrently with each other.
class LcmmTree {
public:
    explicit LcmmTree(LiquiditySchedule sched);

    // Price of the interval bundle from a coherent tree. Read-only.
    double price(const Interval& iv) const;
    double price_from(Dyadic alpha) const;

    // Exactly what buy would charge, via a transient overlay of the touched
    // nodes; the tree is not modified and no materialization persists.
    double cost(const Interval& iv, double s) const;

    // Executes the trade (including automatic arbitrage removal up the
    // search path) and returns the total cost. The tree is coherent again
    // afterwards. s == 0 is a no-op.
    double buy(const Interval& iv, double s);

    double loss_bound() const { return sched_.loss_bound(); }
    const LiquiditySchedule& schedule() const { return sched_; }

    const LcmmNode& root() const { return *root_; }
    LcmmNode& mutable_root() { return *root_; } // snapshot loader / tests

    std::uint64_t last_visits() const { return visits_.load(std::memory_order_relaxed); }

    // Max cross-level price mismatch |mu_y - mu_left - mu_right| over
    // materialized inner nodes, with every level price recomputed from
    // scratch on its own submarket. This is the honest audit of coherence.
    double coherence_violation() const;

    // Throws IncoherentState when the audit exceeds tol.
    void assert_coherent(double tol = 1e-6) const;

    // Maintenance pass for long-running markets: re-derives per-level prices
    // and sweeps arbitrage removal bottom-up until drift is gone.
    void recohere(double tol = 1e-12, int max_rounds = 8);

private:
    struct NodeKey {
        int level;
        std::uint64_t idx;
        auto operator<=>(const NodeKey&) const = default;
    };
    struct NodeVals {
        double theta;
        double eta;
    };
    using Overlay = std::map<NodeKey, NodeVals>;

    double one_sided_transact(Dyadic alpha, double s, Overlay& ov) const;
    double run_passes(const Interval& iv, double s, Overlay& ov) const;
    void apply_overlay(const Overlay& ov);

    std::unique_ptr<LcmmNode> root_;
    LiquiditySchedule sched_;
    mutable std::atomic<std::uint64_t> visits_{0};
};

namespace lcmm_detail {

// Closed-form arbitrage-removal step at level l: the eta adjustment that
// aligns the level-l price mu_y with the finer-level mass mu_other.
double arbitrage_step(double b_l, double B_lm1, double mu_y, double mu_other);

} // namespace lcmm_detail

} // namespace ivmm

#endif // IVMM_LCMM_HPP
