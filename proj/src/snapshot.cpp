#include "ivmm/snapshot.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace ivmm::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// MarketState
// ---------------------------------------------------------------------------

MarketState MarketState::lmsr_tree(double b) {
    MarketState m;
    m.kind_ = "lmsr-tree";
    m.lmsr_ = std::make_unique<LmsrTree>(b);
    return m;
}

MarketState MarketState::lcmm(LiquiditySchedule sched) {
    MarketState m;
    m.kind_ = "lcmm";
    m.lcmm_ = std::make_unique<LcmmTree>(std::move(sched));
    return m;
}

MarketState MarketState::dense(double b, int K) {
    MarketState m;
    m.kind_ = "dense";
    m.dense_ = std::make_unique<DenseLmsr>(b, K);
    return m;
}

double MarketState::price(const Interval& iv) const {
    if (lmsr_) return lmsr_->price(iv);
    if (lcmm_) return lcmm_->price(iv);
    return dense_->price(iv);
}

double MarketState::cost(const Interval& iv, double s) const {
    if (lmsr_) return lmsr_->cost(iv, s);
    if (lcmm_) return lcmm_->cost(iv, s);
    return dense_->cost(iv, s);
}

double MarketState::buy(const Interval& iv, double s) {
    if (lmsr_) return lmsr_->buy(iv, s);
    if (lcmm_) return lcmm_->buy(iv, s);
    return dense_->buy(iv, s);
}

double MarketState::loss_bound() const {
    if (lmsr_) return lmsr_->b() * 62 * std::log(2.0); // precision-unbounded: quote the cap
    if (lcmm_) return lcmm_->loss_bound();
    return dense_->b() * dense_->K() * std::log(2.0);
}

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

namespace {

void collect_lmsr(const LmsrNode& z, json& rows) {
    rows.push_back({z.iv.lo.num(), z.iv.lo.prec(), z.iv.hi.num(), z.iv.hi.prec(), z.shares,
                    z.height});
    if (!z.is_leaf()) {
        collect_lmsr(*z.left, rows);
        collect_lmsr(*z.right, rows);
    }
}

void collect_lcmm(const LcmmNode& z, json& rows) {
    rows.push_back(
        {z.iv.lo.num(), z.iv.lo.prec(), z.iv.hi.num(), z.iv.hi.prec(), z.theta, z.eta});
    if (!z.is_leaf()) {
        collect_lcmm(*z.left, rows);
        collect_lcmm(*z.right, rows);
    }
}

Interval row_interval(const json& row) {
    return Interval(
        Dyadic::from_parts(row.at(0).get<std::uint64_t>(), row.at(1).get<unsigned>()),
        Dyadic::from_parts(row.at(2).get<std::uint64_t>(), row.at(3).get<unsigned>()));
}

// Pre-order reconstruction; a node is inner iff its stored height is > 0.
std::unique_ptr<LmsrNode> build_lmsr(const json& rows, std::size_t& cursor) {
    if (cursor >= rows.size()) throw IoError("snapshot truncated: missing nodes");
    const json& row = rows.at(cursor++);
    auto z = std::make_unique<LmsrNode>(row_interval(row));
    z->shares = row.at(4).get<double>();
    const int height = row.at(5).get<int>();
    if (height > 0) {
        z->left = build_lmsr(rows, cursor);
        z->right = build_lmsr(rows, cursor);
        if (!(z->left->iv.lo == z->iv.lo) || !(z->left->iv.hi == z->right->iv.lo) ||
            !(z->right->iv.hi == z->iv.hi))
            throw IoError("snapshot corrupt: children do not tile " + to_string(z->iv));
        z->height = 1 + std::max(z->left->height, z->right->height);
        if (z->height != height)
            throw IoError("snapshot corrupt: stored height mismatch at " + to_string(z->iv));
        if (std::abs(z->left->height - z->right->height) > 1)
            throw IoError("snapshot corrupt: height balance violated at " + to_string(z->iv));
    }
    return z;
}

std::size_t count_leaves(const LmsrNode& z) {
    return z.is_leaf() ? 1 : count_leaves(*z.left) + count_leaves(*z.right);
}

// Pre-order reconstruction; a node is inner iff the next row is its left
// (midpoint) child.
std::unique_ptr<LcmmNode> build_lcmm(const json& rows, std::size_t& cursor) {
    if (cursor >= rows.size()) throw IoError("snapshot truncated: missing nodes");
    const json& row = rows.at(cursor++);
    auto z = std::make_unique<LcmmNode>(row_interval(row));
    z->theta = row.at(4).get<double>();
    z->eta = row.at(5).get<double>();
    if (cursor < rows.size()) {
        const Interval next = row_interval(rows.at(cursor));
        const Dyadic mid = dyadic_midpoint(z->iv.lo, z->iv.hi);
        if (next.lo == z->iv.lo && next.hi == mid) {
            z->left = build_lcmm(rows, cursor);
            z->right = build_lcmm(rows, cursor);
            if (!(z->right->iv.lo == mid) || !(z->right->iv.hi == z->iv.hi))
                throw IoError("snapshot corrupt: children do not tile " + to_string(z->iv));
        }
    }
    return z;
}

json schedule_to_json(const LiquiditySchedule& s) {
    if (s.kind() == LiquiditySchedule::Kind::GeometricTail)
        return {{"kind", "geometric"}, {"b1", s.b1()}, {"ratio", s.ratio()}};
    return {{"kind", "explicit"}, {"levels", s.explicit_b()}};
}

LiquiditySchedule schedule_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "geometric")
        return LiquiditySchedule::geometric(j.at("b1").get<double>(),
                                            j.at("ratio").get<double>());
    if (kind == "explicit")
        return LiquiditySchedule::explicit_levels(j.at("levels").get<std::vector<double>>());
    throw IoError("unknown schedule kind '" + kind + "'");
}

} // namespace

void save_snapshot(const MarketState& m, const std::string& path, std::uint64_t trades) {
    json doc;
    doc["format_version"] = kSnapshotFormatVersion;
    doc["trades"] = trades;
    if (const LmsrTree* t = m.as_lmsr()) {
        doc["engine"] = {{"type", "lmsr-tree"}, {"b", t->b()}, {"n_vals", t->n_vals()}};
        json rows = json::array();
        collect_lmsr(t->root(), rows);
        doc["nodes"] = std::move(rows);
    } else if (const LcmmTree* t = m.as_lcmm()) {
        doc["engine"] = {{"type", "lcmm"}, {"schedule", schedule_to_json(t->schedule())}};
        json rows = json::array();
        collect_lcmm(t->root(), rows);
        doc["nodes"] = std::move(rows);
    } else {
        const DenseLmsr* d = m.as_dense();
        doc["engine"] = {{"type", "dense"}, {"b", d->b()}, {"K", d->K()}};
        std::vector<double> theta(d->n_outcomes());
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = d->theta(i);
        doc["theta"] = std::move(theta);
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << doc.dump(1) << '\n';
        if (!out.good()) throw IoError("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp + " -> " + path + ": " + ec.message());
}

LoadedSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("snapshot parse failure in " + path + ": " + e.what());
    }
    try {
        if (doc.at("format_version").get<int>() != kSnapshotFormatVersion)
            throw IoError("unsupported snapshot format_version in " + path);
        const json& engine = doc.at("engine");
        const std::string type = engine.at("type").get<std::string>();
        const std::uint64_t trades = doc.value("trades", std::uint64_t{0});
        if (type == "lmsr-tree") {
            MarketState m = MarketState::lmsr_tree(engine.at("b").get<double>());
            std::size_t cursor = 0;
            auto root = build_lmsr(doc.at("nodes"), cursor);
            if (cursor != doc.at("nodes").size())
                throw IoError("snapshot corrupt: trailing nodes in " + path);
            if (!(root->iv == full_interval()))
                throw IoError("snapshot corrupt: root interval is not [0, 1)");
            const std::size_t leaves = count_leaves(*root);
            m.as_lmsr()->mutable_root() = std::move(*root);
            m.as_lmsr()->set_n_vals(leaves + 1);
            m.as_lmsr()->recompute_all(); // log partials are never persisted
            return {std::move(m), trades};
        }
        if (type == "lcmm") {
            MarketState m = MarketState::lcmm(schedule_from_json(engine.at("schedule")));
            std::size_t cursor = 0;
            auto root = build_lcmm(doc.at("nodes"), cursor);
            if (cursor != doc.at("nodes").size())
                throw IoError("snapshot corrupt: trailing nodes in " + path);
            if (!(root->iv == full_interval()))
                throw IoError("snapshot corrupt: root interval is not [0, 1)");
            m.as_lcmm()->mutable_root() = std::move(*root);
            return {std::move(m), trades};
        }
        if (type == "dense") {
            MarketState m = MarketState::dense(engine.at("b").get<double>(),
                                               engine.at("K").get<int>());
            const auto theta = doc.at("theta").get<std::vector<double>>();
            if (theta.size() != m.as_dense()->n_outcomes())
                throw IoError("snapshot corrupt: theta length mismatch");
            for (std::size_t i = 0; i < theta.size(); ++i) m.as_dense()->set_theta(i, theta[i]);
            return {std::move(m), trades};
        }
        throw IoError("unknown engine type '" + type + "' in " + path);
    } catch (const json::exception& e) {
        throw IoError("snapshot schema error in " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Trade log
// ---------------------------------------------------------------------------

void append_trade(const std::string& log_path, const TradeRecord& rec) {
    json j = {{"seq", rec.seq},        {"op", rec.op},     {"lo", to_string(rec.lo)},
              {"hi", to_string(rec.hi)}, {"shares", rec.shares}, {"cost", rec.cost},
              {"engine", rec.engine}};
    std::ofstream out(log_path, std::ios::app);
    if (!out) throw IoError("cannot open log " + log_path);
    out << j.dump() << '\n';
    if (!out.good()) throw IoError("short write to log " + log_path);
}

std::vector<TradeRecord> read_trade_log(const std::string& log_path) {
    std::ifstream in(log_path);
    if (!in) throw IoError("cannot read log " + log_path);
    std::vector<TradeRecord> out;
    std::string line;
    std::uint64_t expected = 1;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            TradeRecord rec;
            rec.seq = j.at("seq").get<std::uint64_t>();
            rec.op = j.at("op").get<std::string>();
            rec.lo = parse_dyadic(j.at("lo").get<std::string>());
            rec.hi = parse_dyadic(j.at("hi").get<std::string>());
            rec.shares = j.at("shares").get<double>();
            rec.cost = j.at("cost").get<double>();
            rec.engine = j.at("engine").get<std::string>();
            if (rec.seq != expected)
                throw LogCorrupt("trade log " + log_path + ": expected seq " +
                                 std::to_string(expected) + ", found " +
                                 std::to_string(rec.seq) + " at line " +
                                 std::to_string(line_no));
            if (rec.op != "buy")
                throw LogCorrupt("trade log " + log_path + ": unknown op '" + rec.op + "'");
            ++expected;
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw LogCorrupt("trade log " + log_path + " line " + std::to_string(line_no) +
                             ": " + e.what());
        } catch (const ParseError& e) {
            throw LogCorrupt("trade log " + log_path + " line " + std::to_string(line_no) +
                             ": " + e.what());
        }
    }
    return out;
}

void replay_into(MarketState& m, const std::vector<TradeRecord>& records) {
    for (const TradeRecord& rec : records) {
        if (rec.engine != m.kind())
            throw LogCorrupt("trade " + std::to_string(rec.seq) + " was executed on '" +
                             rec.engine + "', replay target is '" + m.kind() + "'");
        m.buy(Interval(rec.lo, rec.hi), rec.shares);
    }
}

} // namespace ivmm::io
