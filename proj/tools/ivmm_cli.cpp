// Command-line surface for the interval market makers: create markets,
// quote and execute trades, audit losses, replay trade logs, and run the
// agent-based convergence experiments.

#include <sys/file.h>
#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ivmm/loss_audit.hpp"
#include "ivmm/sim/experiment.hpp"
#include "ivmm/snapshot.hpp"

namespace {

using namespace ivmm;

// Fixed-point rendering with 12 significant digits ("0.750000000000").
std::string format_significant(double v, int sig = 12) {
    if (v == 0.0) return "0." + std::string(static_cast<std::size_t>(sig), '0');
    const int magnitude = static_cast<int>(std::floor(std::log10(std::abs(v))));
    const int decimals = sig - 1 - magnitude;
    char buf[64];
    if (decimals < 0 || decimals > 40) {
        std::snprintf(buf, sizeof buf, "%.*e", sig - 1, v);
    } else {
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    }
    return buf;
}

std::string log_path_for(const std::string& state_path) { return state_path + ".log"; }

// Advisory exclusive lock guarding mutations of one state file.
class StateLock {
public:
    explicit StateLock(const std::string& state_path) {
        const std::string lock_path = state_path + ".lock";
        fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw IoError("cannot open lock file " + lock_path);
        if (::flock(fd_, LOCK_EX) != 0) {
            ::close(fd_);
            throw IoError("cannot lock " + lock_path);
        }
    }
    ~StateLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }

private:
    int fd_ = -1;
};

struct EngineArgs {
    std::string engine;
    double b = 1.0;
    int K = 10;
    std::vector<double> geometric; // b1 ratio
    std::string levels;            // comma-separated explicit schedule
};

void add_engine_options(CLI::App* cmd, EngineArgs& args) {
    cmd->add_option("--engine", args.engine, "engine type: lmsr-tree | lcmm | dense")
        ->required();
    cmd->add_option("--b", args.b, "liquidity parameter (lmsr-tree, dense)");
    cmd->add_option("--K", args.K, "outcome bits (dense oracle, <= 16)");
    cmd->add_option("--geometric", args.geometric,
                    "lcmm geometric schedule: b1 ratio (b_k = b1 r^{k-1})")
        ->expected(2);
    cmd->add_option("--levels", args.levels,
                    "lcmm explicit schedule: comma-separated b_1..b_K");
}

io::MarketState make_engine(const EngineArgs& args) {
    if (args.engine == "lmsr-tree") return io::MarketState::lmsr_tree(args.b);
    if (args.engine == "dense") return io::MarketState::dense(args.b, args.K);
    if (args.engine == "lcmm") {
        if (!args.geometric.empty())
            return io::MarketState::lcmm(
                LiquiditySchedule::geometric(args.geometric[0], args.geometric[1]));
        if (!args.levels.empty()) {
            std::vector<double> levels;
            std::stringstream parts(args.levels);
            std::string part;
            while (std::getline(parts, part, ',')) levels.push_back(std::stod(part));
            return io::MarketState::lcmm(LiquiditySchedule::explicit_levels(levels));
        }
        throw BadArgs("lcmm needs --geometric b1 r or --levels b1,...,bK");
    }
    throw BadArgs("unknown engine '" + args.engine + "'");
}

// Loads the snapshot and reconciles it with its trade log: if the log has
// records past the snapshot's trade count (interrupted run), the tail is
// replayed in memory so callers always see the state implied by the log.
std::pair<io::MarketState, std::uint64_t> load_current(const std::string& state_path) {
    auto [market, trades] = io::load_snapshot(state_path);
    const std::string log = log_path_for(state_path);
    if (std::filesystem::exists(log)) {
        const auto records = io::read_trade_log(log);
        if (records.size() < trades)
            throw LogCorrupt("log " + log + " is shorter than its snapshot (" +
                             std::to_string(records.size()) + " < " + std::to_string(trades) +
                             ")");
        if (records.size() > trades) {
            std::vector<io::TradeRecord> tail(records.begin() + static_cast<long>(trades),
                                              records.end());
            io::replay_into(market, tail);
            trades = records.size();
        }
    } else if (trades > 0) {
        throw LogCorrupt("snapshot " + state_path + " records " + std::to_string(trades) +
                         " trades but log " + log + " is missing");
    }
    return {std::move(market), trades};
}

int run(int argc, char** argv) {
    CLI::App app{"interval-security market makers (log-time LMSR tree and "
                 "multi-resolution LCMM)"};
    app.require_subcommand(1);

    std::string state_path = "market.json";
    app.add_option("--state", state_path, "market state file (default market.json)")
        ->envname("IVMM_STATE");

    // new
    EngineArgs new_args;
    CLI::App* cmd_new = app.add_subcommand("new", "create a fresh market snapshot");
    add_engine_options(cmd_new, new_args);

    // price / cost / buy
    std::string lo_text, hi_text, outcome_text;
    double shares = 0.0;
    CLI::App* cmd_price = app.add_subcommand("price", "price of the bundle [lo, hi)");
    cmd_price->add_option("lo", lo_text)->required();
    cmd_price->add_option("hi", hi_text)->required();

    CLI::App* cmd_cost = app.add_subcommand("cost", "cost of buying shares of [lo, hi)");
    cmd_cost->add_option("lo", lo_text)->required();
    cmd_cost->add_option("hi", hi_text)->required();
    cmd_cost->add_option("shares", shares)->required();

    CLI::App* cmd_buy = app.add_subcommand("buy", "execute a trade on [lo, hi)");
    cmd_buy->add_option("lo", lo_text)->required();
    cmd_buy->add_option("hi", hi_text)->required();
    cmd_buy->add_option("shares", shares)->required();

    // audit
    CLI::App* cmd_audit =
        app.add_subcommand("audit", "realized loss at an outcome, from the trade log");
    cmd_audit->add_option("outcome", outcome_text)->required();

    // replay
    EngineArgs replay_args;
    std::string replay_log, replay_out;
    CLI::App* cmd_replay =
        app.add_subcommand("replay", "rebuild a market from a trade log");
    cmd_replay->add_option("--log", replay_log, "JSONL trade log")->required();
    add_engine_options(cmd_replay, replay_args);
    cmd_replay->add_option("--out", replay_out, "write the rebuilt snapshot here");

    // simulate
    std::string sim_config_path, sim_out_csv;
    int sim_threads = 0;
    CLI::App* cmd_sim =
        app.add_subcommand("simulate", "run the agent-based convergence experiment");
    cmd_sim->add_option("--config", sim_config_path, "key = value config file")->required();
    cmd_sim->add_option("--out", sim_out_csv, "output CSV path")->required();
    cmd_sim->add_option("--threads", sim_threads, "worker threads (0 = default, 1 = serial)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (cmd_new->parsed()) {
        io::MarketState market = make_engine(new_args);
        StateLock lock(state_path);
        std::error_code ec;
        std::filesystem::remove(log_path_for(state_path), ec); // fresh market, fresh log
        io::save_snapshot(market, state_path, 0);
        std::cout << "engine: " << market.kind() << "\n"
                  << "worst-case loss bound: " << format_significant(market.loss_bound())
                  << "\n";
        return 0;
    }

    if (cmd_price->parsed() || cmd_cost->parsed()) {
        const Interval iv(parse_dyadic(lo_text), parse_dyadic(hi_text));
        auto [market, trades] = load_current(state_path);
        (void)trades;
        const double v =
            cmd_price->parsed() ? market.price(iv) : market.cost(iv, shares);
        std::cout << format_significant(v) << "\n";
        return 0;
    }

    if (cmd_buy->parsed()) {
        const Interval iv(parse_dyadic(lo_text), parse_dyadic(hi_text));
        StateLock lock(state_path);
        auto [market, trades] = load_current(state_path);
        const double cost = market.buy(iv, shares);
        const io::TradeRecord rec{trades + 1, "buy", iv.lo, iv.hi, shares, cost,
                                  market.kind()};
        io::append_trade(log_path_for(state_path), rec);
        io::save_snapshot(market, state_path, trades + 1);
        std::cout << format_significant(cost) << "\n";
        return 0;
    }

    if (cmd_audit->parsed()) {
        const Dyadic outcome = parse_dyadic(outcome_text);
        auto [market, trades] = load_current(state_path);
        (void)trades;
        LossAudit audit;
        const std::string log = log_path_for(state_path);
        if (std::filesystem::exists(log))
            for (const auto& rec : io::read_trade_log(log))
                audit.record(Interval(rec.lo, rec.hi), rec.shares, rec.cost);
        std::cout << "loss at " << to_string(outcome) << ": "
                  << format_significant(audit.loss(outcome)) << "\n"
                  << "worst loss over outcomes: " << format_significant(audit.worst_loss())
                  << "\n"
                  << "advertised bound: " << format_significant(market.loss_bound()) << "\n";
        return 0;
    }

    if (cmd_replay->parsed()) {
        io::MarketState market = make_engine(replay_args);
        const auto records = io::read_trade_log(replay_log);
        io::replay_into(market, records);
        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& rec : records)
            seen.insert({to_string(rec.lo), to_string(rec.hi)});
        std::cout << "replayed " << records.size() << " trades\n";
        for (const auto& [lo, hi] : seen) {
            const Interval iv(parse_dyadic(lo), parse_dyadic(hi));
            std::cout << "price [" << lo << ", " << hi
                      << ") = " << format_significant(market.price(iv)) << "\n";
        }
        if (!replay_out.empty()) {
            io::save_snapshot(market, replay_out, records.size());
            // keep the snapshot's own log alongside it so the pair stays a
            // complete, self-consistent state
            const std::string out_log = log_path_for(replay_out);
            std::error_code ec;
            std::filesystem::remove(out_log, ec);
            for (const auto& rec : records) io::append_trade(out_log, rec);
        }
        return 0;
    }

    if (cmd_sim->parsed()) {
        std::ifstream in(sim_config_path);
        if (!in) throw IoError("cannot read config " + sim_config_path);
        const sim::SimConfig cfg = sim::parse_sim_config(in);
        const auto records = sim::run_experiment(cfg, sim_threads);
        {
            std::ofstream out(sim_out_csv, std::ios::trunc);
            if (!out) throw IoError("cannot write " + sim_out_csv);
            out << sim::records_to_csv(records);
        }
        // Mean final KL per (market, level): the latest row of each trace.
        std::map<std::pair<std::string, int>, std::map<int, double>> final_kl;
        for (const auto& r : records) final_kl[{r.market, r.level}][r.trace] = r.kl;
        std::cout << "rows: " << records.size() << "\n";
        for (const auto& [key, by_trace] : final_kl) {
            double sum = 0.0;
            for (const auto& [trace, kl] : by_trace) sum += kl;
            std::cout << "mean final kl " << key.first << " @ level " << key.second << ": "
                      << format_significant(sum / static_cast<double>(by_trace.size()))
                      << "\n";
        }
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ivmm::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ivmm::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const ivmm::EngineError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
