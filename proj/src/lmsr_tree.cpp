#include "ivmm/lmsr_tree.hpp"

#include <cmath>
#include <vector>

#include "ivmm/numeric.hpp"

namespace ivmm {

namespace lmsr_detail {

namespace {

std::unique_ptr<LmsrNode> new_leaf(Dyadic lo, Dyadic hi, double /*b*/) {
    auto z = std::make_unique<LmsrNode>(Interval(lo, hi));
    z->log_partial = std::log(z->iv.width());
    return z;
}

int height_of(const LmsrNode* z) { return z ? z->height : -1; }

int balance_factor(const LmsrNode& z) {
    return height_of(z.left.get()) - height_of(z.right.get());
}

} // namespace

void reset_inner(LmsrNode& z, double b) {
    z.height = 1 + std::max(z.left->height, z.right->height);
    z.log_partial = z.shares / b + log_add_exp(z.left->log_partial, z.right->log_partial);
}

void add_shares(LmsrNode& z, double s, double b) {
    z.shares += s;
    z.log_partial += s / b;
}

void rotate_left(LmsrNode& z, double b) {
    if (z.is_leaf() || z.right->is_leaf())
        throw StructureViolation("rotate_left requires an inner right child");
    auto z1 = std::move(z.left);
    auto z23 = std::move(z.right);
    auto z2 = std::move(z23->left);
    auto z3 = std::move(z23->right);
    // Move the removed node's shares into its children so deleting it leaves
    // the implied state untouched.
    add_shares(*z2, z23->shares, b);
    add_shares(*z3, z23->shares, b);

    auto z12 = std::make_unique<LmsrNode>(Interval(z1->iv.lo, z2->iv.hi));
    z12->left = std::move(z1);
    z12->right = std::move(z2);
    reset_inner(*z12, b);

    z.left = std::move(z12);
    z.right = std::move(z3);
    reset_inner(z, b);
}

void rotate_right(LmsrNode& z, double b) {
    if (z.is_leaf() || z.left->is_leaf())
        throw StructureViolation("rotate_right requires an inner left child");
    auto z12 = std::move(z.left);
    auto z3 = std::move(z.right);
    auto z1 = std::move(z12->left);
    auto z2 = std::move(z12->right);
    add_shares(*z1, z12->shares, b);
    add_shares(*z2, z12->shares, b);

    auto z23 = std::make_unique<LmsrNode>(Interval(z2->iv.lo, z3->iv.hi));
    z23->left = std::move(z2);
    z23->right = std::move(z3);
    reset_inner(*z23, b);

    z.left = std::move(z1);
    z.right = std::move(z23);
    reset_inner(z, b);
}

int rebalance(LmsrNode& z, double b) {
    const int bf = balance_factor(z);
    if (bf >= 2) {
        if (balance_factor(*z.left) >= 0) {
            rotate_right(z, b);
            return 1;
        }
        rotate_left(*z.left, b);
        rotate_right(z, b);
        return 2;
    }
    if (bf <= -2) {
        if (balance_factor(*z.right) <= 0) {
            rotate_left(z, b);
            return 1;
        }
        rotate_right(*z.right, b);
        rotate_left(z, b);
        return 2;
    }
    return 0;
}

} // namespace lmsr_detail

LmsrTree::LmsrTree(double b) : b_(b) {
    if (!(b > 0.0) || !std::isfinite(b)) throw BadArgs("liquidity b must be positive and finite");
    root_ = lmsr_detail::new_leaf(Dyadic::zero(), Dyadic::one(), b_);
}

// Algorithm: descend the search path for alpha, carrying the running ancestor
// share sum log P. Right children skipped over at left turns contribute to
// the price of [alpha, 1); left children skipped over at right turns
// contribute to its complement [0, alpha). Both sums are accumulated in the
// log domain, so one-sided prices and their complements stay accurate
// arbitrarily close to 0 and 1 — the cost of a deep in- or out-of-the-money
// bundle needs log(1-p) at full precision.
LmsrTree::PriceResult LmsrTree::one_sided_price(Dyadic alpha) const {
    if (alpha.is_one()) return {kNegInf, 0.0, 0};
    const double log_root = root_->log_partial;
    const LmsrNode* z = root_.get();
    double log_p = 0.0;
    double log_price = kNegInf;
    double log_comp = kNegInf;
    std::uint64_t visits = 1;
    while (z->iv.lo != alpha && !z->is_leaf()) {
        log_p += z->shares / b_;
        visits += 2; // stepped-onto child plus the sibling read
        if (alpha < z->right->iv.lo) {
            log_price = log_add_exp(log_price, log_p + z->right->log_partial - log_root);
            z = z->left.get();
        } else {
            log_comp = log_add_exp(log_comp, log_p + z->left->log_partial - log_root);
            z = z->right.get();
        }
    }
    const double term = log_p + z->log_partial - log_root;
    if (z->iv.lo == alpha) {
        log_price = log_add_exp(log_price, term);
    } else {
        const double w = z->iv.width();
        log_price = log_add_exp(log_price, std::log(dyadic_sub(z->iv.hi, alpha) / w) + term);
        log_comp = log_add_exp(log_comp, std::log(dyadic_sub(alpha, z->iv.lo) / w) + term);
    }
    return {log_price, log_comp, visits};
}

double LmsrTree::price_from(Dyadic alpha) const {
    const PriceResult r = one_sided_price(alpha);
    visits_.store(r.visits, std::memory_order_relaxed);
    return std::exp(r.log_price);
}

double LmsrTree::price(const Interval& iv) const {
    const PriceResult a = one_sided_price(iv.lo);
    visits_.store(a.visits, std::memory_order_relaxed);
    double p = std::exp(a.log_price);
    if (!iv.hi.is_one()) {
        const PriceResult b = one_sided_price(iv.hi);
        visits_.store(b.visits, std::memory_order_relaxed);
        p -= std::exp(b.log_price);
    }
    return std::min(std::max(p, 0.0), 1.0);
}

// Direct two-sided descent: accumulates the interval's mass and its
// complement as log-sum-exps of positive contributions, so both stay
// relatively accurate no matter how extreme the state. Same cost formula as
// the one-sided path, b log(1 - p + p e^{s/b}), evaluated from the logs.
LmsrTree::TwoSidedMass LmsrTree::two_sided_mass(Dyadic a, Dyadic bnd) const {
    const double log_root = root_->log_partial;
    double lse_p = kNegInf;
    double lse_c = kNegInf;

    // mass of [a, node.hi) under `z`, plus complement terms left of `a`
    const auto suffix = [&](const LmsrNode* z, double log_p) {
        while (z->iv.lo != a && !z->is_leaf()) {
            log_p += z->shares / b_;
            if (a < z->right->iv.lo) {
                lse_p = log_add_exp(lse_p, log_p + z->right->log_partial - log_root);
                z = z->left.get();
            } else {
                lse_c = log_add_exp(lse_c, log_p + z->left->log_partial - log_root);
                z = z->right.get();
            }
        }
        const double term = log_p + z->log_partial - log_root;
        if (z->iv.lo == a) {
            lse_p = log_add_exp(lse_p, term);
        } else {
            const double w = z->iv.width();
            lse_p = log_add_exp(lse_p, std::log(dyadic_sub(z->iv.hi, a) / w) + term);
            lse_c = log_add_exp(lse_c, std::log(dyadic_sub(a, z->iv.lo) / w) + term);
        }
    };
    // mass of [node.lo, bnd) under `z`, plus complement terms right of `bnd`
    const auto prefix = [&](const LmsrNode* z, double log_p) {
        while (z->iv.hi != bnd && !z->is_leaf()) {
            log_p += z->shares / b_;
            if (bnd > z->right->iv.lo) {
                lse_p = log_add_exp(lse_p, log_p + z->left->log_partial - log_root);
                z = z->right.get();
            } else {
                lse_c = log_add_exp(lse_c, log_p + z->right->log_partial - log_root);
                z = z->left.get();
            }
        }
        const double term = log_p + z->log_partial - log_root;
        if (z->iv.hi == bnd) {
            lse_p = log_add_exp(lse_p, term);
        } else {
            const double w = z->iv.width();
            lse_p = log_add_exp(lse_p, std::log(dyadic_sub(bnd, z->iv.lo) / w) + term);
            lse_c = log_add_exp(lse_c, std::log(dyadic_sub(z->iv.hi, bnd) / w) + term);
        }
    };

    const LmsrNode* z = root_.get();
    double log_p = 0.0;
    for (;;) {
        if (z->iv.lo == a && z->iv.hi == bnd) {
            lse_p = log_add_exp(lse_p, log_p + z->log_partial - log_root);
            break;
        }
        if (z->is_leaf()) {
            const double w = z->iv.width();
            const double term = log_p + z->log_partial - log_root;
            lse_p = log_add_exp(lse_p, std::log(dyadic_sub(bnd, a) / w) + term);
            if (a != z->iv.lo)
                lse_c = log_add_exp(lse_c, std::log(dyadic_sub(a, z->iv.lo) / w) + term);
            if (bnd != z->iv.hi)
                lse_c = log_add_exp(lse_c, std::log(dyadic_sub(z->iv.hi, bnd) / w) + term);
            break;
        }
        const Dyadic mid = z->right->iv.lo;
        log_p += z->shares / b_;
        if (!(mid < bnd)) {
            lse_c = log_add_exp(lse_c, log_p + z->right->log_partial - log_root);
            z = z->left.get();
        } else if (!(a < mid)) {
            lse_c = log_add_exp(lse_c, log_p + z->left->log_partial - log_root);
            z = z->right.get();
        } else {
            suffix(z->left.get(), log_p);
            prefix(z->right.get(), log_p);
            break;
        }
    }
    return {lse_p, lse_c};
}

double LmsrTree::cost(const Interval& iv, double s) const {
    if (!std::isfinite(s)) throw NonFiniteShares("share quantity must be finite");
    if (s == 0.0) return 0.0;
    const TwoSidedMass m = two_sided_mass(iv.lo, iv.hi);
    if (m.log_comp == kNegInf) return s; // full-support bundle: pure cash
    return b_ * log_add_exp(m.log_comp, s / b_ + m.log_price);
}

double LmsrTree::one_sided_buy(Dyadic alpha, double s) {
    using namespace lmsr_detail;
    // Cost first, from the pre-trade price; a failed mutation cannot charge.
    // cost = b log(1 - p + p e^{s/b}) with p and 1-p both carried as logs.
    const PriceResult pr = one_sided_price(alpha);
    const double charged =
        pr.log_comp == kNegInf ? s : b_ * log_add_exp(pr.log_comp, s / b_ + pr.log_price);
    std::uint64_t visits = pr.visits;

    std::vector<LmsrNode*> path;
    LmsrNode* z = root_.get();
    while (z->iv.lo != alpha && !z->is_leaf()) {
        path.push_back(z);
        if (alpha < z->right->iv.lo) {
            add_shares(*z->right, s, b_);
            z = z->left.get();
        } else {
            z = z->right.get();
        }
    }
    if (z->iv.lo != alpha) {
        // Leaf with alpha strictly inside: split it. The old leaf keeps its
        // shares and becomes inner; the new children start at zero.
        z->left = new_leaf(z->iv.lo, alpha, b_);
        z->right = new_leaf(alpha, z->iv.hi, b_);
        z->height = 1;
        path.push_back(z);
        z = z->right.get();
        n_vals_ += 1;
        visits += 2;
    }
    add_shares(*z, s, b_);

    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        visits += 3 * static_cast<std::uint64_t>(rebalance(**it, b_));
        reset_inner(**it, b_);
    }
    visits_.store(visits, std::memory_order_relaxed);
    return charged;
}

double LmsrTree::buy(const Interval& iv, double s) {
    if (!std::isfinite(s)) throw NonFiniteShares("share quantity must be finite");
    if (s == 0.0) return 0.0;
    double c = one_sided_buy(iv.lo, s);
    if (!iv.hi.is_one()) c += one_sided_buy(iv.hi, -s);
    return c;
}

void LmsrTree::recompute_all() {
    struct Rec {
        static void run(LmsrNode& z, double b) {
            if (z.is_leaf()) {
                z.log_partial = z.shares / b + std::log(z.iv.width());
                return;
            }
            run(*z.left, b);
            run(*z.right, b);
            lmsr_detail::reset_inner(z, b);
        }
    };
    Rec::run(*root_, b_);
}

} // namespace ivmm
