#ifndef IVMM_SIM_EXPERIMENT_HPP
#define IVMM_SIM_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ivmm/sim/market.hpp"

namespace ivmm::sim {

struct MarketSpec {
    enum class Kind { Lmsr, Lcmm };
    Kind kind;
    int precision = 0;                          // Lmsr
    std::vector<std::pair<int, double>> split;  // Lcmm: level -> budget fraction

    SimMarket instantiate(double budget) const;
    std::string label() const;
};

struct SimConfig {
    int n_traders = 10;
    double true_signal = 0.4; // signal strength rule is n_i = 16 i
    int K = 10;
    int candidates_per_turn = 50;
    double budget = 1.0;
    int n_traces = 40;
    int max_steps = 200;
    double quiescence_tol = 1e-9;
    std::uint64_t seed = 1;
    std::vector<int> levels = {4, 8};
    std::vector<MarketSpec> markets;
};

// One row per (trace, market, step, level). Step 0 is the initial market
// (uniform prior); later steps are recorded after each executed trade.
struct ConvergenceRecord {
    int trace;
    int step;
    std::string market;
    int level;
    double kl; // KL(clearing || market) at this level, nats
    double cumulative_cost;
};

// Runs every configured market on n_traces controlled traces (shared arrival
// order and candidate draws) and records price-convergence error against the
// market-clearing distribution. Traces are independent; with OpenMP
// available they run in parallel (threads = 0 picks the runtime default,
// 1 forces the serial reference path). Output is deterministic for a fixed
// (seed, config) regardless of thread count.
std::vector<ConvergenceRecord> run_experiment(const SimConfig& cfg, int threads = 0);

// key = value text config; '#' starts a comment. Keys: n_traders, p, K,
// candidates, budget, traces, max_steps, quiescence_tol, seed, levels,
// markets (e.g. "markets = lmsr:4 lmsr:8 lcmm:4=0.5+8=0.5").
SimConfig parse_sim_config(std::istream& in);

std::string records_to_csv(const std::vector<ConvergenceRecord>& records);

} // namespace ivmm::sim

#endif // IVMM_SIM_EXPERIMENT_HPP
