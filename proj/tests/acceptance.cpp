// Acceptance suite: runs every criterion end to end and prints one PASS/FAIL
// line per criterion. Exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <vector>

#include "ivmm/dense_lmsr.hpp"
#include "ivmm/lcmm.hpp"
#include "ivmm/lmsr_tree.hpp"
#include "ivmm/loss_audit.hpp"
#include "ivmm/sim/dynamics.hpp"
#include "ivmm/sim/experiment.hpp"
#include "ivmm/snapshot.hpp"
#include "lcmm_reference.hpp"
#include "test_support.hpp"

using namespace ivmm;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail) {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Comparison used throughout: relative tolerance with a 1e-12 absolute
// floor. Two-sided prices are differences of O(1) one-sided prices, so any
// double implementation carries ~1e-16 absolute noise; for values below
// ~1e-3 a pure relative 1e-9 bound is unattainable in principle.
bool close(double a, double b, double rel) {
    const double diff = std::abs(a - b);
    return diff <= 1e-12 || diff <= rel * std::max(std::abs(a), std::abs(b));
}

// --- criterion 1: LMSR tree vs dense oracle --------------------------------

void criterion_1() {
    const auto t0 = Clock::now();
    const int K = 10;
    LmsrTree tree(1.0);
    DenseLmsr dense(1.0, K);
    test::Rng rng(1001);

    bool ok = true;
    std::string detail;
    for (int i = 0; i < 1000; ++i) {
        const Interval I = test::random_interval(rng, K);
        const double s = rng.uniform(-2.0, 2.0);
        const double ct = tree.buy(I, s);
        const double cd = dense.buy(I, s);
        if (!close(ct, cd, 1e-9)) {
            ok = false;
            detail = fmt("buy %d cost mismatch: tree %.17g dense %.17g", i, ct, cd);
            break;
        }
    }
    double worst_rel = 0.0;
    for (int i = 0; ok && i < 1000; ++i) {
        const Interval I = test::random_interval(rng, K);
        const double pt = tree.price(I);
        const double pd = dense.price(I);
        const double s = rng.uniform(0.05, 2.0) * (rng.below(2) ? 1.0 : -1.0);
        const double qt = tree.cost(I, s);
        const double qd = dense.cost(I, s);
        worst_rel = std::max(worst_rel, std::abs(pt - pd) / std::max(pd, 1e-12));
        if (!close(pt, pd, 1e-9)) {
            ok = false;
            detail = fmt("price %d mismatch: tree %.17g dense %.17g", i, pt, pd);
        } else if (!close(qt, qd, 1e-9)) {
            ok = false;
            detail = fmt("cost %d mismatch: tree %.17g dense %.17g", i, qt, qd);
        }
    }
    const double secs = elapsed(t0);
    if (ok && secs >= 5.0) {
        ok = false;
        detail = fmt("runtime %.2f s exceeds 5 s", secs);
    }
    if (ok)
        detail = fmt("1000 buys + 1000 price/cost queries at K=10 within 1e-9 rel "
                     "(worst price rel %.2e), %.2f s",
                     worst_rel, secs);
    report("criterion 1: LMSR tree matches dense oracle", ok, detail);
}

// --- criterion 2: LCMM vs numerical minimizer ------------------------------

void criterion_2() {
    const auto t0 = Clock::now();
    const int K = 4;
    const std::vector<double> levels{0.4, 0.3, 0.2, 0.1};
    LcmmTree tree(LiquiditySchedule::explicit_levels(levels));
    test::LcmmReference ref(K, levels);
    test::Rng rng(2002);

    double charged = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Interval I = test::random_interval(rng, K);
        const double s = rng.uniform(-2.0, 2.0);
        charged += tree.buy(I, s);
        ref.trade(I, s);
    }
    ref.minimize(1e-10);

    bool ok = true;
    std::string detail;
    const auto prices = ref.node_prices();
    double worst = 0.0;
    for (int l = 0; l <= K && ok; ++l) {
        for (std::uint64_t j = 0; j < (std::uint64_t{1} << l); ++j) {
            const double tree_p = tree.price(ref.node_interval(l, j));
            const double ref_p = prices[test::LcmmReference::node_id(l, j)];
            worst = std::max(worst, std::abs(tree_p - ref_p));
            if (std::abs(tree_p - ref_p) > 1e-6) {
                ok = false;
                detail = fmt("node (%d,%llu): tree %.12g minimizer %.12g", l,
                             static_cast<unsigned long long>(j), tree_p, ref_p);
                break;
            }
        }
    }
    const double ref_cost = ref.direct_sum_cost() - ref.initial_cost();
    if (ok && std::abs(charged - ref_cost) > 1e-6) {
        ok = false;
        detail = fmt("cumulative cost: charged %.12g minimizer %.12g", charged, ref_cost);
    }
    const double secs = elapsed(t0);
    if (ok && secs >= 60.0) {
        ok = false;
        detail = fmt("runtime %.2f s exceeds 60 s", secs);
    }
    if (ok)
        detail = fmt("200 buys at K=4: all 31 node prices within 1e-6 (worst %.2e), "
                     "cost gap %.2e, gradient norm %.1e, %.2f s",
                     worst, std::abs(charged - ref_cost), ref.gradient_norm(), secs);
    report("criterion 2: LCMM matches the minimized direct-sum market", ok, detail);
}

// --- criterion 3: coherence after every buy --------------------------------

void criterion_3() {
    const auto t0 = Clock::now();
    LcmmTree tree(LiquiditySchedule::explicit_levels(
        {0.35, 0.25, 0.15, 0.1, 0.06, 0.04, 0.03, 0.02}));
    test::Rng rng(3003);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        tree.buy(test::random_interval(rng, 8), rng.uniform(-2.0, 2.0));
        worst = std::max(worst, tree.coherence_violation());
        if (worst > 1e-9) break;
    }
    const bool ok = worst <= 1e-9;
    report("criterion 3: coherence holds after every LCMM buy", ok,
           fmt("10000 buys at K=8, max |mu_y - mu_l - mu_r| = %.2e, %.2f s", worst,
               elapsed(t0)));
}

// --- criterion 4: loss bounds -----------------------------------------------

void criterion_4() {
    const auto t0 = Clock::now();
    test::Rng rng(4004);
    bool ok = true;
    std::string detail;

    double tree_margin = 1e300;
    const double tree_bound = 10.0 * std::numbers::ln2; // b = 1, N = 2^10
    for (int seq = 0; seq < 10000 && ok; ++seq) {
        LmsrTree tree(1.0);
        LossAudit audit;
        const int trades = 2 + static_cast<int>(rng.below(14));
        for (int i = 0; i < trades; ++i) {
            const Interval I = test::random_interval(rng, 10);
            const double s = rng.uniform(-1.0, 1.0) * (rng.below(4) == 0 ? 50.0 : 3.0);
            audit.record(I, s, tree.buy(I, s));
        }
        tree_margin = std::min(tree_margin, tree_bound - audit.worst_loss());
        if (audit.worst_loss() > tree_bound + 1e-9) {
            ok = false;
            detail = fmt("LMSR tree seq %d: loss %.12g > bound %.12g", seq,
                         audit.worst_loss(), tree_bound);
        }
    }

    double lcmm_margin = 1e300;
    const auto sched = LiquiditySchedule::explicit_levels({0.4, 0.3, 0.2, 0.1});
    const double lcmm_bound = sched.loss_bound(); // (sum k b_k) log 2 = 2 log 2
    for (int seq = 0; seq < 10000 && ok; ++seq) {
        LcmmTree tree(sched);
        LossAudit audit;
        const int trades = 2 + static_cast<int>(rng.below(14));
        for (int i = 0; i < trades; ++i) {
            const Interval I = test::random_interval(rng, 4);
            const double s = rng.uniform(-1.0, 1.0) * (rng.below(4) == 0 ? 50.0 : 3.0);
            audit.record(I, s, tree.buy(I, s));
        }
        lcmm_margin = std::min(lcmm_margin, lcmm_bound - audit.worst_loss());
        if (audit.worst_loss() > lcmm_bound + 1e-9) {
            ok = false;
            detail = fmt("LCMM seq %d: loss %.12g > bound %.12g", seq, audit.worst_loss(),
                         lcmm_bound);
        }
    }
    if (ok)
        detail = fmt("10000 adversarial sequences per engine (|s| up to 50); smallest "
                     "margins: tree %.3g, lcmm %.3g; %.2f s",
                     tree_margin, lcmm_margin, elapsed(t0));
    report("criterion 4: audited losses stay within the worst-case bounds", ok, detail);
}

// --- criterion 5: visit-count complexity ------------------------------------

void criterion_5() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::string detail;

    // LMSR tree: every operation within 4 log2(n_vals + 2) + 8 up to 2^16
    // endpoint values; medians on a doubling grid must grow like the log.
    LmsrTree tree(1.0);
    test::Rng rng(5005);
    std::map<int, std::vector<double>> visits_at; // log2 bucket -> visit samples
    int next_pow = 10;
    while (tree.n_vals() < (1u << 16) && ok) {
        const Interval I = test::random_interval(rng, 16);
        tree.buy(I, rng.uniform(-1.0, 1.0));
        const double bound =
            4.0 * std::log2(static_cast<double>(tree.n_vals()) + 2.0) + 8.0;
        if (static_cast<double>(tree.last_visits()) > bound) {
            ok = false;
            detail = fmt("LMSR buy visits %llu > bound %.2f at n_vals %zu",
                         static_cast<unsigned long long>(tree.last_visits()), bound,
                         tree.n_vals());
        }
        tree.price(I);
        if (static_cast<double>(tree.last_visits()) > bound) {
            ok = false;
            detail = fmt("LMSR price visits %llu > bound %.2f at n_vals %zu",
                         static_cast<unsigned long long>(tree.last_visits()), bound,
                         tree.n_vals());
        }
        if (tree.n_vals() >= (1u << next_pow) && next_pow <= 16) {
            // sample one-sided price visits at this size
            std::vector<double>& samples = visits_at[next_pow];
            for (int i = 0; i < 201; ++i) {
                tree.price_from(test::random_dyadic(rng, 16));
                samples.push_back(static_cast<double>(tree.last_visits()));
            }
            ++next_pow;
        }
    }
    std::string medians = "lmsr medians";
    double prev_median = 0.0;
    for (auto& [pow, samples] : visits_at) {
        std::nth_element(samples.begin(), samples.begin() + samples.size() / 2,
                         samples.end());
        const double med = samples[samples.size() / 2];
        medians += fmt(" 2^%d:%.0f", pow, med);
        if (ok && med > 4.0 * (pow + 1) + 8.0) {
            ok = false;
            detail = fmt("median %.0f at n_vals 2^%d breaks the log bound", med, pow);
        }
        if (ok && med + 1e-9 < prev_median - 6.0) {
            ok = false;
            detail = fmt("median shrank anomalously at 2^%d", pow);
        }
        prev_median = med;
    }

    // LCMM with a geometric tail: within 4 prec(alpha) + 8, tested to 62 bits.
    LcmmTree lcmm(LiquiditySchedule::geometric(1.0, 0.5));
    std::string lcmm_medians = " | lcmm medians";
    for (const unsigned prec : {2u, 4u, 8u, 16u, 31u, 62u}) {
        std::vector<double> samples;
        for (int i = 0; i < 201 && ok; ++i) {
            const std::uint64_t num =
                (rng.below(std::uint64_t{1} << (prec - 1)) * 2 + 1); // odd => exact prec
            const Dyadic alpha = Dyadic::from_parts(num, prec);
            lcmm.buy(Interval(alpha, Dyadic::one()), rng.uniform(-0.5, 0.5));
            if (static_cast<double>(lcmm.last_visits()) > 4.0 * prec + 8.0) {
                ok = false;
                detail = fmt("LCMM buy visits %llu > bound %.0f at prec %u",
                             static_cast<unsigned long long>(lcmm.last_visits()),
                             4.0 * prec + 8.0, prec);
            }
            lcmm.price_from(alpha);
            samples.push_back(static_cast<double>(lcmm.last_visits()));
            if (static_cast<double>(lcmm.last_visits()) > 4.0 * prec + 8.0) {
                ok = false;
                detail = fmt("LCMM price visits %llu > bound %.0f at prec %u",
                             static_cast<unsigned long long>(lcmm.last_visits()),
                             4.0 * prec + 8.0, prec);
            }
        }
        if (!samples.empty()) {
            std::nth_element(samples.begin(), samples.begin() + samples.size() / 2,
                             samples.end());
            const double med = samples[samples.size() / 2];
            lcmm_medians += fmt(" p%u:%.0f", prec, med);
            if (ok && (med < prec || med > 4.0 * prec + 8.0)) {
                ok = false;
                detail = fmt("LCMM median %.0f at prec %u outside the linear band", med, prec);
            }
        }
    }
    if (ok) detail = medians + lcmm_medians + fmt("; %.2f s", elapsed(t0));
    report("criterion 5: visit counts meet the complexity bounds", ok, detail);
}

// --- criterion 6: closed-form arbitrage step --------------------------------

void criterion_6() {
    LcmmTree tree(LiquiditySchedule::explicit_levels({1.0, 1.0}));
    tree.buy(Interval(Dyadic::from_parts(1, 1), Dyadic::one()), 1.0);
    const double eta = tree.root().right->eta;
    const double price = tree.price(Interval(Dyadic::from_parts(1, 1), Dyadic::one()));
    const double expected = 1.0 / (1.0 + std::exp(-0.5));
    const double e = std::exp(1.0);
    const double t_direct = lcmm_detail::arbitrage_step(1.0, 2.0, e / (1.0 + e), 0.5);
    const bool ok = std::abs(eta + 0.5) <= 1e-12 && std::abs(price - expected) <= 1e-12 &&
                    std::abs(t_direct + 0.5) <= 1e-12;
    report("criterion 6: two-level closed-form arbitrage step", ok,
           fmt("t = %.17g (want -0.5), post price %.17g (want %.17g)", t_direct, price,
               expected));
}

// --- criterion 7: rotation preserves prices ---------------------------------

void criterion_7() {
    const auto t0 = Clock::now();
    test::Rng rng(7007);
    bool ok = true;
    std::string detail;
    double worst = 0.0;
    int rotations = 0;
    for (int round = 0; round < 10000 && ok; ++round) {
        LmsrTree tree(0.9);
        const int trades = 4 + static_cast<int>(rng.below(36));
        for (int i = 0; i < trades; ++i)
            tree.buy(test::random_interval(rng, 10), rng.uniform(-2.0, 2.0));

        std::vector<LmsrNode*> eligible;
        std::function<void(LmsrNode&)> walk = [&](LmsrNode& z) {
            if (z.is_leaf()) return;
            if (!z.right->is_leaf()) eligible.push_back(&z);
            walk(*z.left);
            walk(*z.right);
        };
        walk(tree.mutable_root());
        if (eligible.empty()) continue;
        LmsrNode& target = *eligible[rng.below(eligible.size())];

        std::vector<Interval> ivs;
        std::function<void(const LmsrNode&)> collect = [&](const LmsrNode& z) {
            ivs.push_back(z.iv);
            if (!z.is_leaf()) {
                collect(*z.left);
                collect(*z.right);
            }
        };
        collect(tree.root());
        std::vector<double> before;
        before.reserve(ivs.size());
        for (const Interval& iv : ivs) before.push_back(tree.price(iv));

        lmsr_detail::rotate_left(target, tree.b());
        ++rotations;
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            const double after = tree.price(ivs[i]);
            worst = std::max(worst, std::abs(after - before[i]));
            if (std::abs(after - before[i]) > 1e-12) {
                ok = false;
                detail = fmt("round %d: price of %s moved %.3e", round,
                             to_string(ivs[i]).c_str(), std::abs(after - before[i]));
                break;
            }
        }
    }
    if (ok)
        detail = fmt("%d rotations over random subtrees, worst price shift %.2e, %.2f s",
                     rotations, worst, elapsed(t0));
    report("criterion 7: rotations preserve implied prices", ok, detail);
}

// --- criterion 8: simulation ------------------------------------------------

// Mean KL curve over traces with carry-forward for quiesced traces.
std::vector<double> mean_curve(const std::vector<sim::ConvergenceRecord>& rows,
                               const std::string& market, int level, int n_traces,
                               int max_steps) {
    std::vector<std::vector<double>> per_trace(static_cast<std::size_t>(n_traces));
    for (auto& v : per_trace) v.assign(static_cast<std::size_t>(max_steps) + 1, -1.0);
    for (const auto& r : rows)
        if (r.market == market && r.level == level)
            per_trace[static_cast<std::size_t>(r.trace)][static_cast<std::size_t>(r.step)] =
                r.kl;
    std::vector<double> mean(static_cast<std::size_t>(max_steps) + 1, 0.0);
    for (auto& v : per_trace) {
        for (std::size_t t = 1; t < v.size(); ++t)
            if (v[t] < 0.0) v[t] = v[t - 1]; // quiesced: carry forward
        for (std::size_t t = 0; t < v.size(); ++t) mean[t] += v[t] / n_traces;
    }
    return mean;
}

void criterion_8() {
    const auto t0 = Clock::now();

    // (a) convergence-error orderings across the three market makers.
    sim::SimConfig cfg;
    cfg.n_traders = 10;
    cfg.true_signal = 0.4;
    cfg.K = 10;
    cfg.candidates_per_turn = 50;
    cfg.budget = 1.5;
    cfg.n_traces = 40;
    cfg.max_steps = 600;
    cfg.quiescence_tol = 1e-9;
    cfg.seed = 8008;
    cfg.levels = {4, 8};
    cfg.markets = {sim::MarketSpec{sim::MarketSpec::Kind::Lmsr, 4, {}},
                   sim::MarketSpec{sim::MarketSpec::Kind::Lmsr, 8, {}},
                   sim::MarketSpec{sim::MarketSpec::Kind::Lcmm, 0, {{4, 0.5}, {8, 0.5}}}};
    const auto rows = sim::run_experiment(cfg, 0);

    const auto final_of = [&](const std::string& market, int level) {
        return mean_curve(rows, market, level, cfg.n_traces, cfg.max_steps).back();
    };
    const auto early_of = [&](const std::string& market, int level) {
        const auto curve = mean_curve(rows, market, level, cfg.n_traces, cfg.max_steps);
        const int horizon = cfg.max_steps / 4;
        double sum = 0.0;
        for (int t = 1; t <= horizon; ++t) sum += curve[static_cast<std::size_t>(t)];
        return sum / horizon;
    };

    const double f8_lmsr8 = final_of("lmsr8", 8);
    const double f8_lcmm = final_of("lcmm_4_8", 8);
    const double f8_lmsr4 = final_of("lmsr4", 8);
    const bool fine_ok = f8_lmsr8 <= f8_lcmm && f8_lcmm <= f8_lmsr4;

    const double e4_lmsr4 = early_of("lmsr4", 4);
    const double e4_lcmm = early_of("lcmm_4_8", 4);
    const double e4_lmsr8 = early_of("lmsr8", 4);
    const bool coarse_ok = e4_lmsr4 <= e4_lcmm && e4_lcmm <= e4_lmsr8;

    report("criterion 8a: LCMM interpolates the LMSR convergence trade-off",
           fine_ok && coarse_ok,
           fmt("final KL@8: lmsr8 %.4f <= lcmm %.4f <= lmsr4 %.4f (%s); early KL@4: "
               "lmsr4 %.4f <= lcmm %.4f <= lmsr8 %.4f (%s); %.1f s",
               f8_lmsr8, f8_lcmm, f8_lmsr4, fine_ok ? "ok" : "VIOLATED", e4_lmsr4, e4_lcmm,
               e4_lmsr8, coarse_ok ? "ok" : "VIOLATED", elapsed(t0)));

    // (b) clearing-pool validity: with vanishing liquidity the trading
    // equilibrium must match the logarithmic opinion pool.
    const auto t1 = Clock::now();
    const int K = 4;
    const double b = 1e-3;
    const std::uint64_t oracle_seed = 11;
    sim::SplitMix64 trng(sim::derive_stream(oracle_seed, {0x7ADE, 0}));
    const auto traders = sim::sample_traders(5, 0.4, trng);
    const auto pool = sim::clearing_distribution(traders, K);
    sim::TradingSession session(sim::SimMarket::lmsr_at(K, b * K * std::numbers::ln2),
                                traders, K, 50, 1e-8, oracle_seed, 0);
    bool quiesced = false;
    int steps = 0;
    for (; steps < 250000; ++steps) {
        if (!session.next_trade()) {
            quiesced = true;
            break;
        }
    }
    const double kl = sim::kl_divergence(pool, session.market().level_distribution(K));
    report("criterion 8b: tiny-liquidity equilibrium matches the logarithmic pool",
           quiesced && kl <= 1e-2,
           fmt("b = 1e-3, quiesced=%s after %d trades, KL(pool || market) = %.4g, %.1f s",
               quiesced ? "yes" : "NO", steps, kl, elapsed(t1)));
}

// --- criterion 9: persistence ------------------------------------------------

void criterion_9() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ivmm_acceptance";
    fs::create_directories(dir);
    test::Rng rng(9009);
    bool ok = true;
    std::string detail;

    const auto exercise = [&](io::MarketState live, io::MarketState fresh,
                              const std::string& tag, unsigned prec) {
        const std::string snap = (dir / (tag + ".json")).string();
        const std::string log = (dir / (tag + ".log")).string();
        std::error_code ec;
        fs::remove(log, ec);
        for (std::uint64_t seq = 1; seq <= 150; ++seq) {
            const Interval I = test::random_interval(rng, prec);
            const double s = rng.uniform(-2.0, 2.0);
            const double c = live.buy(I, s);
            io::append_trade(log, {seq, "buy", I.lo, I.hi, s, c, live.kind()});
        }
        io::save_snapshot(live, snap, 150);
        const io::MarketState loaded = io::load_snapshot(snap).market;
        io::replay_into(fresh, io::read_trade_log(log));
        for (int i = 0; i < 400 && ok; ++i) {
            const Interval I = test::random_interval(rng, prec + 2);
            const double p_live = live.price(I);
            if (std::abs(loaded.price(I) - p_live) > 1e-12) {
                ok = false;
                detail = fmt("%s snapshot round-trip drift %.3e", tag.c_str(),
                             std::abs(loaded.price(I) - p_live));
            } else if (std::abs(fresh.price(I) - p_live) > 1e-9) {
                ok = false;
                detail = fmt("%s replay drift %.3e", tag.c_str(),
                             std::abs(fresh.price(I) - p_live));
            }
        }
    };

    exercise(io::MarketState::lmsr_tree(0.9), io::MarketState::lmsr_tree(0.9), "lmsr", 10);
    exercise(io::MarketState::lcmm(LiquiditySchedule::geometric(1.0, 0.6)),
             io::MarketState::lcmm(LiquiditySchedule::geometric(1.0, 0.6)), "lcmm", 8);
    if (ok)
        detail = "snapshot round-trips within 1e-12 and log replays within 1e-9, both "
                 "engines";
    report("criterion 9: persistence round-trips and replay", ok, detail);
    fs::remove_all(dir);
}

} // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
