#include "ivmm/lcmm.hpp"

#include <cmath>
#include <numbers>
#include <unordered_map>
#include <vector>

#include "ivmm/numeric.hpp"

namespace ivmm {

// ---------------------------------------------------------------------------
// LiquiditySchedule
// ---------------------------------------------------------------------------

LiquiditySchedule LiquiditySchedule::explicit_levels(std::vector<double> b) {
    if (b.empty()) throw BadArgs("liquidity schedule needs at least one level");
    if (b.size() > Dyadic::kMaxPrec)
        throw BadArgs("liquidity schedule deeper than 62 levels");
    for (double v : b)
        if (!(v > 0.0) || !std::isfinite(v))
            throw BadArgs("liquidity levels must be positive and finite");
    LiquiditySchedule s;
    s.kind_ = Kind::ExplicitFinite;
    s.levels_ = std::move(b);
    s.suffix_.assign(s.levels_.size() + 1, 0.0);
    for (std::size_t i = s.levels_.size(); i-- > 0;)
        s.suffix_[i] = s.suffix_[i + 1] + s.levels_[i];
    return s;
}

LiquiditySchedule LiquiditySchedule::geometric(double b1, double ratio) {
    if (!(b1 > 0.0) || !std::isfinite(b1)) throw BadArgs("geometric b1 must be positive");
    if (!(ratio > 0.0) || !(ratio < 1.0)) throw BadArgs("geometric ratio must be in (0, 1)");
    LiquiditySchedule s;
    s.kind_ = Kind::GeometricTail;
    s.b1_ = b1;
    s.ratio_ = ratio;
    return s;
}

int LiquiditySchedule::max_level() const {
    return kind_ == Kind::ExplicitFinite ? static_cast<int>(levels_.size())
                                         : static_cast<int>(Dyadic::kMaxPrec);
}

double LiquiditySchedule::level(int k) const {
    if (k < 1) throw LevelOutOfRange("level index must be >= 1");
    if (kind_ == Kind::GeometricTail) return b1_ * std::pow(ratio_, k - 1);
    if (k > static_cast<int>(levels_.size()))
        throw LevelOutOfRange("level " + std::to_string(k) + " beyond schedule depth " +
                              std::to_string(levels_.size()));
    return levels_[static_cast<std::size_t>(k - 1)];
}

double LiquiditySchedule::cumulative(int l) const {
    if (l < 0) throw LevelOutOfRange("cumulative level must be >= 0");
    if (kind_ == Kind::GeometricTail) return b1_ * std::pow(ratio_, l) / (1.0 - ratio_);
    if (l > static_cast<int>(levels_.size()))
        throw LevelOutOfRange("cumulative level " + std::to_string(l) +
                              " beyond schedule depth " + std::to_string(levels_.size()));
    return suffix_[static_cast<std::size_t>(l)];
}

double LiquiditySchedule::loss_bound() const {
    if (kind_ == Kind::GeometricTail) {
        const double one_minus = 1.0 - ratio_;
        return b1_ * std::numbers::ln2 / (one_minus * one_minus);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < levels_.size(); ++i)
        sum += static_cast<double>(i + 1) * levels_[i];
    return sum * std::numbers::ln2;
}

// ---------------------------------------------------------------------------
// LcmmTree
// ---------------------------------------------------------------------------

namespace lcmm_detail {

double arbitrage_step(double b_l, double B_lm1, double mu_y, double mu_other) {
    constexpr double eps = 1e-300;
    if (!(mu_y > eps) || !(mu_y < 1.0) || !(mu_other > eps) || !(mu_other < 1.0))
        throw DegeneratePrice("price mass numerically vanished in arbitrage removal");
    const double log_odds = std::log1p(-mu_y) - std::log(mu_y) + std::log(mu_other) -
                            std::log1p(-mu_other);
    return b_l / B_lm1 * log_odds;
}

} // namespace lcmm_detail

namespace {

// Per-level working state of the two siblings along the search path. Prices
// are carried as logs — log mu of the path child, of its sibling, and of the
// mass held by the rest of the level ("neither") — so that complements like
// 1 - mu stay exact even when trades push prices within 1e-300 of 0 or 1.
// All transaction arithmetic happens on these copies; the tree is written
// only once the whole trade is known to go through.
struct Frame {
    int level;
    bool went_left;            // path took the left child
    double theta, eta;         // path-side child
    double theta_sib, eta_sib; // its sibling
    double lmu, lmu_sib;       // log prices of the two children
    double lneither;           // log(1 - mu - mu_sib)
};

} // namespace

LcmmTree::LcmmTree(LiquiditySchedule sched) : sched_(std::move(sched)) {
    root_ = std::make_unique<LcmmNode>(full_interval());
}

double LcmmTree::price_from(Dyadic alpha) const {
    if (alpha.is_one()) return 0.0;
    const LcmmNode* z = root_.get();
    double mu = 1.0;
    double price = 0.0;
    int level = 0;
    std::uint64_t visits = 1;
    while (z->iv.lo != alpha && !z->is_leaf()) {
        const int k = level + 1;
        const double bk = sched_.level(k);
        const double Bk = sched_.cumulative(k);
        const double xl = (z->left->theta + Bk * z->left->eta) / bk;
        const double xr = (z->right->theta + Bk * z->right->eta) / bk;
        const double mx = std::max(xl, xr);
        const double el = std::exp(xl - mx);
        const double er = std::exp(xr - mx);
        const double fl = el / (el + er);
        visits += 2;
        if (alpha < z->right->iv.lo) {
            price += (1.0 - fl) * mu;
            mu *= fl;
            z = z->left.get();
        } else {
            mu *= 1.0 - fl;
            z = z->right.get();
        }
        level = k;
    }
    visits_.store(visits, std::memory_order_relaxed);
    // Below the materialized frontier every security is untraded, so the
    // price is uniform within the leaf.
    const double frac = z->iv.lo == alpha ? 1.0 : dyadic_sub(z->iv.hi, alpha) / z->iv.width();
    return price + frac * mu;
}

double LcmmTree::price(const Interval& iv) const {
#ifdef IVMM_PARANOID_COHERENCE
    assert_coherent(1e-6);
#endif
    double p = price_from(iv.lo);
    if (!iv.hi.is_one()) p -= price_from(iv.hi);
    return std::min(std::max(p, 0.0), 1.0);
}

double LcmmTree::one_sided_transact(Dyadic alpha, double s, Overlay& ov) const {
    const auto read_vals = [&](NodeKey key, const LcmmNode* real) -> NodeVals {
        if (auto it = ov.find(key); it != ov.end()) return it->second;
        if (real) return {real->theta, real->eta};
        return {0.0, 0.0};
    };

    if (alpha.is_one()) return 0.0;
    std::uint64_t visits = 1;

    // Level-0 trade: the root security always pays 1, so this is a pure cash
    // transfer with no price impact and no arbitrage to remove.
    if (alpha.is_zero()) {
        NodeVals v = read_vals({0, 0}, root_.get());
        v.theta += s;
        ov[{0, 0}] = v;
        visits_.store(visits, std::memory_order_relaxed);
        return s;
    }

    double cost = 0.0;

    // Exponential tilt e^x of the chosen side within the level-l LMSR:
    //   mu <- mu e^x / S with S = mu e^x + 1 - mu; everything else scales 1/S.
    // Returns log S. Pure log-space, exact arbitrarily close to 0 and 1.
    const auto tilt_side = [](Frame& f, bool sib_side, double x) -> double {
        double& lmu = sib_side ? f.lmu_sib : f.lmu;
        double& lmu_other = sib_side ? f.lmu : f.lmu_sib;
        const double lcomp = log_add_exp(lmu_other, f.lneither); // log(1 - mu)
        const double log_s = log_add_exp(lmu + x, lcomp);
        lmu += x - log_s;
        lmu_other -= log_s;
        f.lneither -= log_s;
        return log_s;
    };

    // Aligns the level-l price of the chosen side with the mass the finer
    // levels assign to the same interval (given by log odds lmu_fine /
    // lcomp_fine), via the closed-form eta step. Skipped at the deepest
    // explicit level, where no finer submarkets exist and the step is inert.
    const auto remove_arbitrage_side = [&](Frame& f, bool sib_side, double lmu_fine,
                                           double lcomp_fine) {
        const double Bl = sched_.cumulative(f.level);
        if (Bl == 0.0) return;
        const double bl = sched_.level(f.level);
        const double Blm1 = sched_.cumulative(f.level - 1);
        double& lmu = sib_side ? f.lmu_sib : f.lmu;
        const double lcomp = log_add_exp(sib_side ? f.lmu : f.lmu_sib, f.lneither);
        const double t = bl / Blm1 * ((lcomp - lmu) + (lmu_fine - lcomp_fine));
        if (!std::isfinite(t))
            throw DegeneratePrice("price mass numerically vanished in arbitrage removal");
        (sib_side ? f.eta_sib : f.eta) += t;
        cost += bl * tilt_side(f, sib_side, t * Bl / bl);
        // All finer levels re-price at once; only the cost term is needed.
        cost += Bl * log_add_exp(lmu_fine - t, lcomp_fine);
    };

    const auto add_shares_side = [&](Frame& f, bool sib_side, double q) {
        const double bl = sched_.level(f.level);
        // Finer levels still hold the pre-trade mass of this interval.
        const double lmu_fine = sib_side ? f.lmu_sib : f.lmu;
        const double lcomp_fine = log_add_exp(sib_side ? f.lmu : f.lmu_sib, f.lneither);
        cost += bl * tilt_side(f, sib_side, q / bl);
        (sib_side ? f.theta_sib : f.theta) += q;
        remove_arbitrage_side(f, sib_side, lmu_fine, lcomp_fine);
    };

    std::vector<Frame> frames;
    frames.reserve(64);

    Interval cur = root_->iv;
    const LcmmNode* real = root_.get();
    double lmu = 0.0;          // log price of the current path node
    double lcomp = kNegInf;    // log(1 - that price)
    int level = 0;
    while (cur.lo != alpha) {
        const int k = level + 1;
        const Dyadic mid = dyadic_midpoint(cur.lo, cur.hi);
        const NodeKey key_l{k, cur.lo.scaled_num(static_cast<unsigned>(k))};
        const NodeKey key_r{k, mid.scaled_num(static_cast<unsigned>(k))};
        const LcmmNode* real_l = real && !real->is_leaf() ? real->left.get() : nullptr;
        const LcmmNode* real_r = real && !real->is_leaf() ? real->right.get() : nullptr;
        const NodeVals vl = read_vals(key_l, real_l);
        const NodeVals vr = read_vals(key_r, real_r);

        const double bk = sched_.level(k);
        const double Bk = sched_.cumulative(k);
        const double xl = (vl.theta + Bk * vl.eta) / bk;
        const double xr = (vr.theta + Bk * vr.eta) / bk;
        const double lse = log_add_exp(xl, xr);
        visits += 2;

        Frame f;
        f.level = k;
        f.went_left = alpha < mid;
        f.lneither = lcomp;
        if (f.went_left) {
            f.theta = vl.theta;
            f.eta = vl.eta;
            f.theta_sib = vr.theta;
            f.eta_sib = vr.eta;
            f.lmu = xl - lse + lmu;
            f.lmu_sib = xr - lse + lmu;
            cur = Interval(cur.lo, mid);
            real = real_l;
        } else {
            f.theta = vr.theta;
            f.eta = vr.eta;
            f.theta_sib = vl.theta;
            f.eta_sib = vl.eta;
            f.lmu = xr - lse + lmu;
            f.lmu_sib = xl - lse + lmu;
            cur = Interval(mid, cur.hi);
            real = real_r;
        }
        lmu = f.lmu;
        lcomp = log_add_exp(f.lmu_sib, f.lneither);
        frames.push_back(f);
        level = k;
    }

    add_shares_side(frames.back(), false, s);

    for (std::size_t i = frames.size(); i-- > 0;) {
        Frame& f = frames[i];
        if (f.went_left) add_shares_side(f, true, s); // right sibling is in the cover
        // Parent aligns with the freshly updated mass of its children. The
        // root carries no removal step: its price is pinned at 1 and every
        // level's LMSR prices already sum to 1, so eta_root stays 0.
        if (i > 0)
            remove_arbitrage_side(frames[i - 1], false, log_add_exp(f.lmu, f.lmu_sib),
                                  f.lneither);
    }

    // Publish the working copies into the overlay.
    Interval span = root_->iv;
    for (const Frame& f : frames) {
        const Dyadic mid = dyadic_midpoint(span.lo, span.hi);
        const unsigned k = static_cast<unsigned>(f.level);
        const NodeKey key_l{f.level, span.lo.scaled_num(k)};
        const NodeKey key_r{f.level, mid.scaled_num(k)};
        if (f.went_left) {
            ov[key_l] = {f.theta, f.eta};
            ov[key_r] = {f.theta_sib, f.eta_sib};
            span = Interval(span.lo, mid);
        } else {
            ov[key_r] = {f.theta, f.eta};
            ov[key_l] = {f.theta_sib, f.eta_sib};
            span = Interval(mid, span.hi);
        }
    }

    visits_.store(visits, std::memory_order_relaxed);
    return cost;
}

double LcmmTree::run_passes(const Interval& iv, double s, Overlay& ov) const {
    if (!std::isfinite(s)) throw NonFiniteShares("share quantity must be finite");
    const int max_level = sched_.max_level();
    if (static_cast<int>(precision(iv.lo)) > max_level ||
        static_cast<int>(precision(iv.hi)) > max_level)
        throw PrecisionExceedsSchedule("endpoint precision of " + to_string(iv) +
                                       " exceeds schedule depth " + std::to_string(max_level));
    if (s == 0.0) return 0.0;
    double c = one_sided_transact(iv.lo, s, ov);
    if (!iv.hi.is_one()) c += one_sided_transact(iv.hi, -s, ov);
    return c;
}

double LcmmTree::cost(const Interval& iv, double s) const {
    Overlay ov;
    return run_passes(iv, s, ov);
}

double LcmmTree::buy(const Interval& iv, double s) {
    Overlay ov;
    const double c = run_passes(iv, s, ov);
    apply_overlay(ov);
    return c;
}

void LcmmTree::apply_overlay(const Overlay& ov) {
    for (const auto& [key, vals] : ov) {
        LcmmNode* z = root_.get();
        for (int d = key.level; d-- > 0;) {
            if (z->is_leaf()) {
                const Dyadic mid = dyadic_midpoint(z->iv.lo, z->iv.hi);
                z->left = std::make_unique<LcmmNode>(Interval(z->iv.lo, mid));
                z->right = std::make_unique<LcmmNode>(Interval(mid, z->iv.hi));
            }
            z = (key.idx >> d) & 1 ? z->right.get() : z->left.get();
        }
        z->theta = vals.theta;
        z->eta = vals.eta;
    }
}

// ---------------------------------------------------------------------------
// Coherence audit and maintenance
// ---------------------------------------------------------------------------

namespace {

struct AuditItem {
    const LcmmNode* node;
    int level;
    double anc_eta; // sum of eta over strict ancestors
    double own_x;   // (theta + B_level * eta) / b_level - anc_eta, level >= 1
    double price;   // own-level price, filled per level
};

struct AuditState {
    std::vector<AuditItem> items;
    std::unordered_map<const LcmmNode*, std::size_t> index;
    int max_depth = 0;
};

void collect(const LcmmNode& z, int level, double anc_eta, const LiquiditySchedule& sched,
             AuditState& st) {
    AuditItem it;
    it.node = &z;
    it.level = level;
    it.anc_eta = anc_eta;
    it.own_x = level == 0
                   ? 0.0
                   : (z.theta + sched.cumulative(level) * z.eta) / sched.level(level) - anc_eta;
    it.price = level == 0 ? 1.0 : 0.0;
    st.index[&z] = st.items.size();
    st.items.push_back(it);
    st.max_depth = std::max(st.max_depth, level);
    if (!z.is_leaf()) {
        collect(*z.left, level + 1, anc_eta + z.eta, sched, st);
        collect(*z.right, level + 1, anc_eta + z.eta, sched, st);
    }
}

// Fills the own-level price of every materialized node at levels 1..max_depth
// by evaluating each level's LMSR normalizer from scratch. Unmaterialized
// subtrees below a materialized leaf contribute one merged uniform block.
void fill_prices(AuditState& st, const LiquiditySchedule& /*sched*/) {
    for (int k = 1; k <= st.max_depth; ++k) {
        std::vector<double> terms;
        terms.reserve(st.items.size());
        for (const AuditItem& it : st.items) {
            if (it.level == k) {
                terms.push_back(it.own_x);
            } else if (it.level < k && it.node->is_leaf()) {
                terms.push_back(-(it.anc_eta + it.node->eta) +
                                (k - it.level) * std::numbers::ln2);
            }
        }
        const double log_z = log_sum_exp(terms);
        for (AuditItem& it : st.items)
            if (it.level == k) it.price = std::exp(it.own_x - log_z);
    }
}

} // namespace

double LcmmTree::coherence_violation() const {
    AuditState st;
    collect(*root_, 0, 0.0, sched_, st);
    if (st.max_depth == 0) return 0.0;
    fill_prices(st, sched_);
    double worst = 0.0;
    for (const AuditItem& it : st.items) {
        if (it.node->is_leaf()) continue;
        const double mu_l = st.items[st.index.at(it.node->left.get())].price;
        const double mu_r = st.items[st.index.at(it.node->right.get())].price;
        worst = std::max(worst, std::abs(it.price - mu_l - mu_r));
    }
    return worst;
}

void LcmmTree::assert_coherent(double tol) const {
    const double v = coherence_violation();
    if (v > tol)
        throw IncoherentState("coherence violated by " + std::to_string(v) +
                              " (tol " + std::to_string(tol) + ")");
}

void LcmmTree::recohere(double tol, int max_rounds) {
    // Bottom-up sweep of closed-form removal steps. The step formula is
    // exact for one node at a time, so prices are refreshed after each
    // adjustment (the level normalizer moves with every eta).
    for (int round = 0; round < max_rounds; ++round) {
        if (coherence_violation() <= tol) return;
        int max_depth = 0;
        {
            AuditState st;
            collect(*root_, 0, 0.0, sched_, st);
            max_depth = st.max_depth;
        }
        for (int l = max_depth - 1; l >= 1; --l) {
            for (int step = 0; step < 64 * (1 << std::min(l, 16)); ++step) {
                AuditState st;
                collect(*root_, 0, 0.0, sched_, st);
                fill_prices(st, sched_);
                double worst = 0.0;
                const AuditItem* worst_item = nullptr;
                double worst_fine = 0.0;
                for (const AuditItem& it : st.items) {
                    if (it.level != l || it.node->is_leaf()) continue;
                    const double mu_l = st.items[st.index.at(it.node->left.get())].price;
                    const double mu_r = st.items[st.index.at(it.node->right.get())].price;
                    const double fine = mu_l + mu_r;
                    const double v = std::abs(it.price - fine);
                    if (v > worst && it.price > 1e-300 && it.price < 1.0 && fine > 1e-300 &&
                        fine < 1.0) {
                        worst = v;
                        worst_item = &it;
                        worst_fine = fine;
                    }
                }
                if (!worst_item || worst <= tol) break;
                const double t = lcmm_detail::arbitrage_step(
                    sched_.level(l), sched_.cumulative(l - 1), worst_item->price, worst_fine);
                const_cast<LcmmNode*>(worst_item->node)->eta += t;
            }
        }
    }
}

} // namespace ivmm
