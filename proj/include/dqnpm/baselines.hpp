#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"

namespace dqnpm {

/// Portfolio value before the first period and after each one.
struct EquityCurve {
    std::string name;
    std::vector<double> values;
};

/// Uniform buy-and-hold: y0/M bought at the first open of each risky
/// asset and never rebalanced. No cash leg.
inline EquityCurve bah(const PricePanel& panel, double y0) {
    if (panel.empty()) throw Error(ErrorKind::parameter, "empty test panel");
    const std::size_t m = panel.asset_count();
    EquityCurve curve{"BAH", {y0}};
    curve.values.reserve(panel.size() + 1);
    for (std::size_t t = 0; t < panel.size(); ++t) {
        double v = 0;
        for (std::size_t i = 0; i < m; ++i)
            v += (y0 / static_cast<double>(m)) * (panel.bar(i, t).close / panel.bar(i, 0).open);
        curve.values.push_back(v);
    }
    return curve;
}

/// Uniform constant rebalanced portfolio on the per-period close/open
/// relatives, zero commission. No cash leg.
inline EquityCurve ucrp(const PricePanel& panel, double y0) {
    if (panel.empty()) throw Error(ErrorKind::parameter, "empty test panel");
    const std::size_t m = panel.asset_count();
    EquityCurve curve{"UCRP", {y0}};
    curve.values.reserve(panel.size() + 1);
    double y = y0;
    for (std::size_t t = 0; t < panel.size(); ++t) {
        const auto mu = price_relatives(panel, t);
        double mean = 0;
        for (std::size_t i = 1; i <= m; ++i) mean += mu[i];
        y *= mean / static_cast<double>(m);
        curve.values.push_back(y);
    }
    return curve;
}

} // namespace dqnpm
