#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dqnpm/error.hpp"
#include "dqnpm/text.hpp"

namespace dqnpm {

inline constexpr std::uint64_t default_action_cap = 10000;

/// Portfolio weights over cash (index 0) and the M risky assets.
class WeightVector {
public:
    WeightVector() = default;
    explicit WeightVector(std::vector<double> values) : values_(std::move(values)) {}

    static WeightVector all_cash(std::size_t assets) {
        std::vector<double> v(assets + 1, 0.0);
        v[0] = 1.0;
        return WeightVector(std::move(v));
    }

    std::size_t size() const { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }

    bool operator==(const WeightVector&) const = default;

private:
    std::vector<double> values_;
};

/// C(M + N, M): compositions of N units into M + 1 ordered parts.
inline std::uint64_t action_count(std::size_t assets, std::size_t divisions) {
    if (assets == 0 || divisions == 0)
        throw Error(ErrorKind::parameter, "asset count and divisions must be >= 1");
    // After step k, result = C(N + k, k), so the division is exact.
    std::uint64_t result = 1;
    for (std::uint64_t k = 1; k <= assets; ++k) {
        const std::uint64_t factor = divisions + k;
        if (result > std::numeric_limits<std::uint64_t>::max() / factor)
            throw Error(ErrorKind::size, "action count C(" + std::to_string(assets + divisions) + ", " +
                                             std::to_string(assets) + ") overflows");
        result = result * factor / k;
    }
    return result;
}

/// Immutable enumerated action set.
class ActionTable {
public:
    ActionTable() = default;

    std::size_t assets() const { return assets_; }
    std::size_t divisions() const { return divisions_; }
    std::size_t size() const { return units_.size(); }

    /// Integer allocation (units of 1/N) of action idx.
    const std::vector<int>& units(std::size_t idx) const {
        check(idx);
        return units_[idx];
    }

    WeightVector lookup(std::size_t idx) const {
        check(idx);
        return weights_[idx];
    }

    const WeightVector& weights(std::size_t idx) const {
        check(idx);
        return weights_[idx];
    }

    /// Index of the action with the given unit allocation, or size() if absent.
    std::size_t find(const std::vector<int>& units) const {
        auto it = std::find(units_.begin(), units_.end(), units);
        return static_cast<std::size_t>(it - units_.begin());
    }

    std::string to_csv() const {
        std::string out = "index";
        for (std::size_t j = 0; j <= assets_; ++j) out += ",w" + std::to_string(j);
        out += '\n';
        for (std::size_t i = 0; i < size(); ++i) {
            out += std::to_string(i);
            for (double w : weights_[i].values()) out += "," + text::fmt(w);
            out += '\n';
        }
        return out;
    }

    friend ActionTable enumerate_actions(std::size_t, std::size_t, std::uint64_t);

private:
    void check(std::size_t idx) const {
        if (idx >= units_.size())
            throw Error(ErrorKind::index, "action " + std::to_string(idx) + " out of range [0, " +
                                              std::to_string(units_.size()) + ")");
    }

    std::size_t assets_ = 0;
    std::size_t divisions_ = 0;
    std::vector<std::vector<int>> units_;
    std::vector<WeightVector> weights_;
};

/// Balls-in-baskets enumeration: M dividers chosen among M + N slots. The
/// combinations are walked in reverse lexicographic order, which starts at
/// all-cash and ends at everything in the last asset.
inline ActionTable enumerate_actions(std::size_t assets, std::size_t divisions,
                                     std::uint64_t cap = default_action_cap) {
    const std::uint64_t count = action_count(assets, divisions);
    if (count > cap)
        throw Error(ErrorKind::size, "action count " + std::to_string(count) + " exceeds cap " +
                                         std::to_string(cap));

    const int m = static_cast<int>(assets);
    const int items = m + static_cast<int>(divisions);

    ActionTable table;
    table.assets_ = assets;
    table.divisions_ = divisions;
    table.units_.reserve(count);

    // Lexicographically largest combination first, then step downwards.
    std::vector<int> c(assets);
    std::iota(c.begin(), c.end(), items - m);
    while (true) {
        std::vector<int> units(assets + 1);
        units[0] = c[0];
        for (int i = 0; i + 1 < m; ++i) units[i + 1] = c[i + 1] - c[i] - 1;
        units[assets] = items - c[m - 1] - 1;
        table.units_.push_back(std::move(units));

        // Previous combination in lexicographic order: find the rightmost
        // position that can decrease, then push everything after it as high
        // as possible.
        int i = m - 1;
        while (i >= 0 && c[i] == (i == 0 ? 0 : c[i - 1] + 1)) --i;
        if (i < 0) break;
        --c[i];
        for (int j = i + 1; j < m; ++j) c[j] = items - m + j;
    }

    table.weights_.reserve(count);
    const double n = static_cast<double>(divisions);
    for (const auto& u : table.units_) {
        std::vector<double> w(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) w[j] = u[j] / n;
        table.weights_.emplace_back(std::move(w));
    }
    return table;
}

} // namespace dqnpm
