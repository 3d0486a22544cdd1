#ifndef IVMM_LMSR_TREE_HPP
#define IVMM_LMSR_TREE_HPP

#include <atomic>
#include <cstdint>
#include <memory>

#include "ivmm/dyadic.hpp"

namespace ivmm {

// Node of the LMSR tree. Each node carries the bundle shares sold for its
// interval and the log of its partial normalization constant:
//   leaf:  log_partial = shares/b + log(width)
//   inner: log_partial = shares/b + logaddexp(left, right)
// Storing logs turns the multiplicative share updates into additions and
// keeps deep products of exponentials finite.
struct LmsrNode {
    Interval iv;
    double shares = 0.0;
    double log_partial = 0.0;
    int height = 0;
    std::unique_ptr<LmsrNode> left;
    std::unique_ptr<LmsrNode> right;

    explicit LmsrNode(Interval i) : iv(i) {}
    bool is_leaf() const { return !left; }
};

namespace lmsr_detail {

void reset_inner(LmsrNode& z, double b);
void add_shares(LmsrNode& z, double s, double b);

// AVL rotations in the interval-preserving formulation: the subtree root z
// keeps its interval and shares; the rotated-over child is deleted after its
// shares are pushed into its children, and a fresh zero-share node takes the
// other side. The implied market state is unchanged.
void rotate_left(LmsrNode& z, double b);
void rotate_right(LmsrNode& z, double b);

// Applies the single/double rotation needed when |balance factor| >= 2.
// Returns the number of rotations performed (0, 1 or 2).
int rebalance(LmsrNode& z, double b);

} // namespace lmsr_detail

// Exact LMSR market over [0, 1) with price/cost/buy in time logarithmic in
// the number of distinct endpoint values ever traded. Single-writer: buy
// needs exclusive access; price/cost are pure reads and may run concurrently
// with each other.
class LmsrTree {
public:
    explicit LmsrTree(double b);

    // Price of the interval bundle. Read-only.
    double price(const Interval& iv) const;

    // Price of the one-sided bundle [alpha, 1); alpha == 1 prices the empty
    // interval at 0.
    double price_from(Dyadic alpha) const;

    // Cost of s shares at the current state. Read-only.
    double cost(const Interval& iv, double s) const;

    // Executes the trade and returns the cost charged. The cost is computed
    // before any mutation. A two-sided buy runs as buy([lo,1), s) then
    // buy([hi,1), -s). s == 0 is a no-op (no leaf split).
    double buy(const Interval& iv, double s);

    double b() const { return b_; }

    // Count of distinct endpoint values present in the tree (0 and 1 count).
    std::size_t n_vals() const { return n_vals_; }

    // Distinct nodes touched by the most recent one-sided primitive
    // (instrumentation; a two-sided op runs two primitives).
    std::uint64_t last_visits() const { return visits_.load(std::memory_order_relaxed); }

    const LmsrNode& root() const { return *root_; }
    LmsrNode& mutable_root() { return *root_; } // snapshot loader / tests

    // Rebuilds every log_partial bottom-up; long-run numerical hygiene.
    void recompute_all();

    void set_n_vals(std::size_t n) { n_vals_ = n; } // snapshot loader

private:
    struct PriceResult {
        double log_price; // log price of [alpha, 1)
        double log_comp;  // log price of the complement [0, alpha)
        std::uint64_t visits;
    };
    PriceResult one_sided_price(Dyadic alpha) const;
    struct TwoSidedMass {
        double log_price;
        double log_comp;
    };
    TwoSidedMass two_sided_mass(Dyadic a, Dyadic bnd) const;
    double one_sided_buy(Dyadic alpha, double s);

    std::unique_ptr<LmsrNode> root_;
    double b_;
    std::size_t n_vals_ = 2;
    mutable std::atomic<std::uint64_t> visits_{0};
};

} // namespace ivmm

#endif // IVMM_LMSR_TREE_HPP
