// Throughput comparison of the three engines (log-time LMSR tree vs the
// dense reference, and the LCMM) plus serial-vs-parallel wall time of the
// simulation harness, which parallelizes over independent traces.

#include <chrono>
#include <cstdio>
#include <vector>

#include "ivmm/dense_lmsr.hpp"
#include "ivmm/lcmm.hpp"
#include "ivmm/lmsr_tree.hpp"
#include "ivmm/sim/experiment.hpp"
#include "ivmm/sim/rng.hpp"

using namespace ivmm;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Interval random_interval(sim::SplitMix64& rng, unsigned max_prec) {
    for (;;) {
        const unsigned prec = 1 + static_cast<unsigned>(rng.below(max_prec));
        const std::uint64_t na = rng.below((std::uint64_t{1} << prec) + 1);
        const std::uint64_t nb = rng.below((std::uint64_t{1} << prec) + 1);
        if (na == nb) continue;
        const Dyadic a = Dyadic::from_parts(std::min(na, nb), prec);
        const Dyadic b = Dyadic::from_parts(std::max(na, nb), prec);
        return Interval(a, b);
    }
}

template <typename Engine>
void bench_engine(const char* name, Engine& engine, unsigned prec, int n_ops) {
    sim::SplitMix64 rng(17);
    std::vector<Interval> ivs;
    for (int i = 0; i < n_ops; ++i) ivs.push_back(random_interval(rng, prec));

    auto t0 = Clock::now();
    for (const Interval& iv : ivs) engine.buy(iv, rng.uniform() - 0.5);
    const double buy_s = seconds_since(t0);

    double sink = 0.0;
    t0 = Clock::now();
    for (const Interval& iv : ivs) sink += engine.price(iv);
    const double price_s = seconds_since(t0);

    std::printf("%-12s prec<=%-2u  buy: %8.0f ops/s   price: %8.0f ops/s   (checksum %.3f)\n",
                name, prec, n_ops / buy_s, n_ops / price_s, sink);
}

} // namespace

int main() {
    constexpr int n_ops = 20000;

    std::printf("== engine throughput, %d ops each ==\n", n_ops);
    for (const unsigned prec : {10u, 14u}) {
        LmsrTree tree(1.0);
        bench_engine("lmsr-tree", tree, prec, n_ops);
        DenseLmsr dense(1.0, static_cast<int>(prec));
        bench_engine("dense", dense, prec, n_ops);
    }
    {
        LcmmTree lcmm(LiquiditySchedule::geometric(1.0, 0.7));
        bench_engine("lcmm", lcmm, 10, n_ops);
        LcmmTree deep(LiquiditySchedule::geometric(1.0, 0.9));
        bench_engine("lcmm-deep", deep, 40, n_ops);
    }

    std::printf("\n== simulation harness: serial vs parallel traces ==\n");
    sim::SimConfig cfg;
    cfg.n_traders = 6;
    cfg.K = 8;
    cfg.candidates_per_turn = 20;
    cfg.budget = 2.0;
    cfg.n_traces = 8;
    cfg.max_steps = 20;
    cfg.seed = 4242;
    cfg.levels = {4, 8};
    cfg.markets = {sim::MarketSpec{sim::MarketSpec::Kind::Lmsr, 4, {}},
                   sim::MarketSpec{sim::MarketSpec::Kind::Lcmm, 0, {{4, 0.5}, {8, 0.5}}}};

    auto t0 = Clock::now();
    const auto serial = sim::run_experiment(cfg, 1);
    const double serial_s = seconds_since(t0);

    t0 = Clock::now();
    const auto parallel = sim::run_experiment(cfg, 0);
    const double parallel_s = seconds_since(t0);

    std::printf("serial:   %6.2f s\nparallel: %6.2f s  (speedup %.2fx)\n", serial_s,
                parallel_s, serial_s / parallel_s);
    std::printf("outputs identical: %s\n",
                sim::records_to_csv(serial) == sim::records_to_csv(parallel) ? "yes" : "NO");
    return 0;
}
