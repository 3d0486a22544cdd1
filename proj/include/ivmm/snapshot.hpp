#ifndef IVMM_SNAPSHOT_HPP
#define IVMM_SNAPSHOT_HPP

#include <memory>
#include <string>
#include <vector>

#include "ivmm/dense_lmsr.hpp"
#include "ivmm/lcmm.hpp"
#include "ivmm/lmsr_tree.hpp"

namespace ivmm::io {

inline constexpr int kSnapshotFormatVersion = 1;

// Engine-agnostic handle used by the CLI and the persistence layer.
class MarketState {
public:
    static MarketState lmsr_tree(double b);
    static MarketState lcmm(LiquiditySchedule sched);
    static MarketState dense(double b, int K);

    const std::string& kind() const { return kind_; } // lmsr-tree | lcmm | dense

    double price(const Interval& iv) const;
    double cost(const Interval& iv, double s) const;
    double buy(const Interval& iv, double s);
    double loss_bound() const;

    const LmsrTree* as_lmsr() const { return lmsr_.get(); }
    const LcmmTree* as_lcmm() const { return lcmm_.get(); }
    const DenseLmsr* as_dense() const { return dense_.get(); }
    LmsrTree* as_lmsr() { return lmsr_.get(); }
    LcmmTree* as_lcmm() { return lcmm_.get(); }
    DenseLmsr* as_dense() { return dense_.get(); }

private:
    MarketState() = default;

    std::string kind_;
    std::unique_ptr<LmsrTree> lmsr_;
    std::unique_ptr<LcmmTree> lcmm_;
    std::unique_ptr<DenseLmsr> dense_;
};

// Snapshot files are JSON: an engine descriptor, the count of trades the
// snapshot reflects, and the pre-order node list (or the theta array for the
// dense oracle). Log-domain partials are always re-derived on load, never
// persisted. Writes go to a temp file that is renamed into place, so a
// snapshot on disk always equals the replay of some prefix of its log.
void save_snapshot(const MarketState& m, const std::string& path, std::uint64_t trades = 0);

struct LoadedSnapshot {
    MarketState market;
    std::uint64_t trades = 0;
};
LoadedSnapshot load_snapshot(const std::string& path);

struct TradeRecord {
    std::uint64_t seq = 0;
    std::string op = "buy";
    Dyadic lo;
    Dyadic hi;
    double shares = 0.0;
    double cost = 0.0;
    std::string engine;
};

// JSONL trade log: the log is the source of truth, snapshots are caches.
void append_trade(const std::string& log_path, const TradeRecord& rec);

// Throws LogCorrupt on parse failure or a sequence gap (names the seq).
std::vector<TradeRecord> read_trade_log(const std::string& log_path);

// Replays buys 1..m into a fresh engine; engine-kind mismatches are log
// corruption.
void replay_into(MarketState& m, const std::vector<TradeRecord>& records);

} // namespace ivmm::io

#endif // IVMM_SNAPSHOT_HPP
