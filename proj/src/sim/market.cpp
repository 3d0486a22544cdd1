#include "ivmm/sim/market.hpp"

#include <cmath>
#include <numbers>

#include "ivmm/errors.hpp"

namespace ivmm::sim {

SimMarket SimMarket::lmsr_at(int precision, double budget) {
    if (precision < 1 || precision > 62) throw BadArgs("lmsr precision out of range");
    if (!(budget > 0.0)) throw BadArgs("budget must be positive");
    SimMarket m;
    m.name_ = "lmsr" + std::to_string(precision);
    m.precision_ = precision;
    m.lmsr_ = std::make_unique<LmsrTree>(budget / (precision * std::numbers::ln2));
    return m;
}

SimMarket SimMarket::lcmm_split(std::vector<std::pair<int, double>> split, double budget) {
    if (split.empty()) throw BadArgs("lcmm split needs at least one funded level");
    if (!(budget > 0.0)) throw BadArgs("budget must be positive");
    int deepest = 0;
    double total = 0.0;
    for (const auto& [level, fraction] : split) {
        if (level < 1 || level > 62) throw BadArgs("lcmm split level out of range");
        if (!(fraction > 0.0)) throw BadArgs("lcmm split fractions must be positive");
        deepest = std::max(deepest, level);
        total += fraction;
    }
    if (std::abs(total - 1.0) > 1e-9) throw BadArgs("lcmm split fractions must sum to 1");

    // Unfunded levels get an epsilon of liquidity; the update rules divide
    // by b_k, so exact zeros are not representable.
    std::vector<double> levels(static_cast<std::size_t>(deepest), 1e-9 * budget);
    std::string label = "lcmm";
    for (const auto& [level, fraction] : split) {
        levels[static_cast<std::size_t>(level - 1)] =
            fraction * budget / (level * std::numbers::ln2);
        label += "_" + std::to_string(level);
    }
    SimMarket m;
    m.name_ = label;
    m.precision_ = deepest;
    m.lcmm_ = std::make_unique<LcmmTree>(LiquiditySchedule::explicit_levels(std::move(levels)));
    return m;
}

double SimMarket::loss_bound() const {
    if (lmsr_) return lmsr_->b() * precision_ * std::numbers::ln2;
    return lcmm_->loss_bound();
}

double SimMarket::price(const Interval& iv) const {
    return lmsr_ ? lmsr_->price(iv) : lcmm_->price(iv);
}

double SimMarket::cost(const Interval& iv, double s) const {
    return lmsr_ ? lmsr_->cost(iv, s) : lcmm_->cost(iv, s);
}

double SimMarket::buy(const Interval& iv, double s) {
    const double c = lmsr_ ? lmsr_->buy(iv, s) : lcmm_->buy(iv, s);
    collected_ += c;
    return c;
}

std::vector<double> SimMarket::level_distribution(int level) const {
    const std::size_t n = std::size_t{1} << level;
    std::vector<double> one_sided(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const Dyadic a = Dyadic::from_parts(j, static_cast<unsigned>(level));
        one_sided[j] = lmsr_ ? lmsr_->price_from(a) : lcmm_->price_from(a);
    }
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j)
        out[j] = std::max(0.0, one_sided[j] - one_sided[j + 1]);
    return out;
}

} // namespace ivmm::sim
