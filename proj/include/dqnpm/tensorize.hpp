#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"

namespace dqnpm {

/// Storage order of the four price channels.
enum Channel : std::size_t { open_channel = 0, close_channel = 1, high_channel = 2, low_channel = 3 };
inline constexpr std::size_t channel_count = 4;

/// Dense (asset, window position, channel) tensor, channel fastest.
struct RawTensor {
    std::size_t assets = 0;
    std::size_t window = 0;
    std::size_t t_index = 0;
    std::vector<double> values;

    std::size_t offset(std::size_t asset, std::size_t k, std::size_t channel) const {
        return (asset * window + k) * channel_count + channel;
    }
    double at(std::size_t asset, std::size_t k, std::size_t channel) const {
        return values[offset(asset, k, channel)];
    }

    bool operator==(const RawTensor&) const = default;
};

/// Network input: alpha * (raw - 1).
struct PriceTensor : RawTensor {
    double alpha = 1;

    bool operator==(const PriceTensor&) const = default;
};

/// Prices over periods [t - n + 1, t], each divided by the same asset's
/// close at t.
inline RawTensor normalize_window(const PricePanel& panel, std::size_t t, std::size_t n) {
    if (n == 0) throw Error(ErrorKind::window, "window length must be >= 1");
    if (t + 1 < n || t >= panel.size())
        throw Error(ErrorKind::window, "period " + std::to_string(t) + " cannot hold a window of " +
                                           std::to_string(n) + " in a panel of " +
                                           std::to_string(panel.size()));
    RawTensor raw{panel.asset_count(), n, t, {}};
    raw.values.resize(raw.assets * n * channel_count);
    for (std::size_t i = 0; i < raw.assets; ++i) {
        const double ref = panel.bar(i, t).close;
        for (std::size_t k = 0; k < n; ++k) {
            const auto& b = panel.bar(i, t + 1 - n + k);
            raw.values[raw.offset(i, k, open_channel)] = b.open / ref;
            raw.values[raw.offset(i, k, close_channel)] = b.close / ref;
            raw.values[raw.offset(i, k, high_channel)] = b.high / ref;
            raw.values[raw.offset(i, k, low_channel)] = b.low / ref;
        }
    }
    return raw;
}

inline PriceTensor expand(const RawTensor& raw, double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha))
        throw Error(ErrorKind::parameter, "alpha must be positive, got " + std::to_string(alpha));
    PriceTensor out;
    static_cast<RawTensor&>(out) = raw;
    out.alpha = alpha;
    for (auto& v : out.values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::parameter, "non-finite raw tensor entry");
        v = alpha * (v - 1.0);
    }
    return out;
}

inline PriceTensor build_tensor(const PricePanel& panel, std::size_t t, std::size_t n, double alpha) {
    return expand(normalize_window(panel, t, n), alpha);
}

/// One row per (asset, channel), one column per window position.
inline std::string tensor_csv(const PriceTensor& tensor, const std::vector<std::string>& assets) {
    static const char* names[channel_count] = {"open", "close", "high", "low"};
    std::string out = "asset,channel";
    for (std::size_t k = 0; k < tensor.window; ++k) out += ",k" + std::to_string(k);
    out += '\n';
    for (std::size_t i = 0; i < tensor.assets; ++i)
        for (std::size_t c = 0; c < channel_count; ++c) {
            out += (i < assets.size() ? assets[i] : std::to_string(i)) + "," + names[c];
            for (std::size_t k = 0; k < tensor.window; ++k) out += "," + text::fmt(tensor.at(i, k, c));
            out += '\n';
        }
    return out;
}

} // namespace dqnpm
