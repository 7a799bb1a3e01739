#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqnpm/error.hpp"
#include "dqnpm/text.hpp"

namespace dqnpm {

/// Accumulative rate of return from log rewards: exp(sum r) - 1.
inline double arr(std::span<const double> log_returns) {
    double sum = 0;
    for (double r : log_returns) sum += r;
    return std::exp(sum) - 1.0;
}

/// Per-period Sharpe ratio with a zero risk-free rate and population
/// standard deviation. Not annualized.
inline double sharpe(std::span<const double> returns) {
    if (returns.size() < 2)
        throw Error(ErrorKind::sample, "sharpe needs at least 2 returns, got " + std::to_string(returns.size()));
    const auto [lo, hi] = std::minmax_element(returns.begin(), returns.end());
    if (*lo == *hi) throw Error(ErrorKind::degenerate, "returns have zero variance");
    const double n = static_cast<double>(returns.size());
    double mean = 0;
    for (double r : returns) mean += r;
    mean /= n;
    double var = 0;
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= n;
    if (!(var > 0)) throw Error(ErrorKind::degenerate, "returns have zero variance");
    return mean / std::sqrt(var);
}

/// Largest peak-to-trough fractional loss, via a running peak.
inline double mdd(std::span<const double> values) {
    if (values.empty()) throw Error(ErrorKind::sample, "empty equity curve");
    double peak = values.front();
    double worst = 0;
    for (double v : values) {
        if (!(v > 0)) throw Error(ErrorKind::parameter, "equity values must be positive");
        peak = std::max(peak, v);
        worst = std::max(worst, (peak - v) / peak);
    }
    return worst;
}

inline std::vector<double> log_returns(std::span<const double> curve) {
    std::vector<double> out;
    for (std::size_t t = 1; t < curve.size(); ++t) out.push_back(std::log(curve[t] / curve[t - 1]));
    return out;
}

inline std::vector<double> simple_returns(std::span<const double> curve) {
    std::vector<double> out;
    for (std::size_t t = 1; t < curve.size(); ++t) out.push_back(curve[t] / curve[t - 1] - 1.0);
    return out;
}

struct MetricsReport {
    std::string strategy;
    double arr = 0;
    std::optional<double> sharpe;  // empty when undefined (flat or too short)
    double mdd = 0;
    std::size_t periods = 0;
};

/// Metrics of an equity curve. The rewards are the curve's log returns.
inline MetricsReport evaluate(const std::string& strategy, std::span<const double> curve) {
    MetricsReport rep;
    rep.strategy = strategy;
    const auto lr = log_returns(curve);
    rep.arr = arr(lr);
    rep.mdd = mdd(curve);
    rep.periods = lr.size();
    try {
        rep.sharpe = sharpe(simple_returns(curve));
    } catch (const Error&) {
        rep.sharpe.reset();
    }
    return rep;
}

inline std::string metrics_csv(const std::vector<MetricsReport>& rows) {
    std::string out = "strategy,arr,arr_pct,sharpe,sharpe_pct,mdd,mdd_pct,periods\n";
    for (const auto& r : rows) {
        const std::string sr = r.sharpe ? text::fmt(*r.sharpe) : "nan";
        const std::string sr_pct = r.sharpe ? text::fmt(*r.sharpe * 100) : "nan";
        out += r.strategy + "," + text::fmt(r.arr) + "," + text::fmt(r.arr * 100) + "," + sr + "," + sr_pct +
               "," + text::fmt(r.mdd) + "," + text::fmt(r.mdd * 100) + "," + std::to_string(r.periods) + "\n";
    }
    return out;
}

/// Aligned table: ARR%, raw SR, SR x 100 (labelled SR%), MDD%.
inline std::string metrics_table(const std::vector<MetricsReport>& rows) {
    auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.insert(0, w - s.size(), ' ');
        return s;
    };
    std::string out = pad("strategy", 10) + pad("ARR%", 11) + pad("SR", 11) + pad("SR%", 11) +
                      pad("MDD%", 11) + pad("periods", 9) + "\n";
    for (const auto& r : rows) {
        out += pad(r.strategy, 10) + pad(text::fixed(r.arr * 100, 2), 11) +
               pad(r.sharpe ? text::fixed(*r.sharpe, 4) : "n/a", 11) +
               pad(r.sharpe ? text::fixed(*r.sharpe * 100, 2) : "n/a", 11) +
               pad(text::fixed(r.mdd * 100, 2), 11) + pad(std::to_string(r.periods), 9) + "\n";
    }
    return out;
}

} // namespace dqnpm
