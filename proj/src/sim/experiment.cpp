#include "ivmm/sim/experiment.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>

#include "ivmm/errors.hpp"
#include "ivmm/sim/dynamics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ivmm::sim {

namespace {

constexpr std::uint64_t kTraderTag = 0x7ADE;

std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

SimMarket MarketSpec::instantiate(double budget) const {
    if (kind == Kind::Lmsr) return SimMarket::lmsr_at(precision, budget);
    return SimMarket::lcmm_split(split, budget);
}

std::string MarketSpec::label() const {
    if (kind == Kind::Lmsr) return "lmsr" + std::to_string(precision);
    std::string s = "lcmm";
    for (const auto& [level, fraction] : split) {
        (void)fraction;
        s += "_" + std::to_string(level);
    }
    return s;
}

std::vector<ConvergenceRecord> run_experiment(const SimConfig& cfg, int threads) {
    if (cfg.markets.empty()) throw ConfigError("config has no markets");
    if (cfg.n_traces < 1) throw ConfigError("traces must be >= 1");
    for (int level : cfg.levels)
        if (level < 1 || level > cfg.K) throw ConfigError("recording level out of range");

    // Per-trace trader populations and clearing distributions, shared across
    // market makers.
    std::vector<std::vector<Trader>> traders(static_cast<std::size_t>(cfg.n_traces));
    std::vector<std::vector<std::vector<double>>> clearing_at_level(
        static_cast<std::size_t>(cfg.n_traces));
    for (int tr = 0; tr < cfg.n_traces; ++tr) {
        SplitMix64 rng(derive_stream(cfg.seed, {kTraderTag, static_cast<std::uint64_t>(tr)}));
        traders[tr] = sample_traders(cfg.n_traders, cfg.true_signal, rng);
        const std::vector<double> clearing = clearing_distribution(traders[tr], cfg.K);
        for (int level : cfg.levels)
            clearing_at_level[tr].push_back(coarsen(clearing, cfg.K, level));
    }

    const int n_pairs = cfg.n_traces * static_cast<int>(cfg.markets.size());
    std::vector<std::vector<ConvergenceRecord>> per_pair(static_cast<std::size_t>(n_pairs));

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#else
    (void)threads;
#endif
#pragma omp parallel for schedule(dynamic, 1)
    for (int pair = 0; pair < n_pairs; ++pair) {
        const int tr = pair / static_cast<int>(cfg.markets.size());
        const std::size_t mi = static_cast<std::size_t>(pair) % cfg.markets.size();
        const MarketSpec& spec = cfg.markets[mi];

        TradingSession session(spec.instantiate(cfg.budget), traders[tr], cfg.K,
                               cfg.candidates_per_turn, cfg.quiescence_tol, cfg.seed,
                               static_cast<std::uint64_t>(tr));
        auto& rows = per_pair[static_cast<std::size_t>(pair)];
        const std::string label = spec.label();

        const auto record_step = [&](int step) {
            for (std::size_t li = 0; li < cfg.levels.size(); ++li) {
                const int level = cfg.levels[li];
                const std::vector<double> market_dist =
                    session.market().level_distribution(level);
                rows.push_back({tr, step, label, level,
                                kl_divergence(clearing_at_level[tr][li], market_dist),
                                session.market().collected()});
            }
        };

        record_step(0);
        for (int step = 1; step <= cfg.max_steps; ++step) {
            if (!session.next_trade()) break; // quiescent
            record_step(step);
        }
    }

    std::vector<ConvergenceRecord> out;
    for (const auto& rows : per_pair) out.insert(out.end(), rows.begin(), rows.end());
    return out;
}

namespace {

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for '" + key + "': " + v);
    }
}

long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("bad integer value for '" + key + "': " + v);
    }
}

MarketSpec parse_market_token(const std::string& tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
        throw ConfigError("bad market spec '" + tok + "' (want lmsr:K or lcmm:L=F+L=F)");
    const std::string head = tok.substr(0, colon);
    const std::string rest = tok.substr(colon + 1);
    MarketSpec spec;
    if (head == "lmsr") {
        spec.kind = MarketSpec::Kind::Lmsr;
        spec.precision = static_cast<int>(parse_int("markets", rest));
        return spec;
    }
    if (head == "lcmm") {
        spec.kind = MarketSpec::Kind::Lcmm;
        std::stringstream parts(rest);
        std::string part;
        while (std::getline(parts, part, '+')) {
            const auto eq = part.find('=');
            if (eq == std::string::npos)
                throw ConfigError("bad lcmm level spec '" + part + "' (want level=fraction)");
            spec.split.emplace_back(static_cast<int>(parse_int("markets", part.substr(0, eq))),
                                    parse_double("markets", part.substr(eq + 1)));
        }
        if (spec.split.empty()) throw ConfigError("lcmm spec has no levels: '" + tok + "'");
        return spec;
    }
    throw ConfigError("unknown market kind '" + head + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

SimConfig parse_sim_config(std::istream& in) {
    SimConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) throw ConfigError("expected key = value: '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "n_traders") {
            cfg.n_traders = static_cast<int>(parse_int(key, value));
        } else if (key == "p" || key == "true_signal") {
            cfg.true_signal = parse_double(key, value);
        } else if (key == "K") {
            cfg.K = static_cast<int>(parse_int(key, value));
        } else if (key == "candidates") {
            cfg.candidates_per_turn = static_cast<int>(parse_int(key, value));
        } else if (key == "budget") {
            cfg.budget = parse_double(key, value);
        } else if (key == "traces") {
            cfg.n_traces = static_cast<int>(parse_int(key, value));
        } else if (key == "max_steps") {
            cfg.max_steps = static_cast<int>(parse_int(key, value));
        } else if (key == "quiescence_tol") {
            cfg.quiescence_tol = parse_double(key, value);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
        } else if (key == "levels") {
            cfg.levels.clear();
            std::stringstream parts(value);
            std::string part;
            while (std::getline(parts, part, ','))
                cfg.levels.push_back(static_cast<int>(parse_int(key, trim(part))));
        } else if (key == "markets") {
            cfg.markets.clear();
            std::stringstream parts(value);
            std::string tok;
            while (parts >> tok) cfg.markets.push_back(parse_market_token(tok));
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    if (cfg.n_traders < 1) throw ConfigError("n_traders must be >= 1");
    if (cfg.K < 1 || cfg.K > 16) throw ConfigError("K must be in [1, 16]");
    if (!(cfg.true_signal >= 0.0 && cfg.true_signal <= 1.0))
        throw ConfigError("p must be in [0, 1]");
    return cfg;
}

std::string records_to_csv(const std::vector<ConvergenceRecord>& records) {
    std::string out = "trace,step,market,level,kl,cumulative_cost\n";
    for (const ConvergenceRecord& r : records) {
        out += std::to_string(r.trace);
        out += ',';
        out += std::to_string(r.step);
        out += ',';
        out += r.market;
        out += ',';
        out += std::to_string(r.level);
        out += ',';
        out += format_double(r.kl);
        out += ',';
        out += format_double(r.cumulative_cost);
        out += '\n';
    }
    return out;
}

} // namespace ivmm::sim
