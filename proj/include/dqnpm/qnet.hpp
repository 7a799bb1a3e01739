#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "dqnpm/action_space.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/random.hpp"
#include "dqnpm/tensorize.hpp"

namespace dqnpm {

inline constexpr double selu_lambda = 1.0507009873554805;
inline constexpr double selu_alpha = 1.6732632423543772;

inline double selu(double x) {
    return x > 0 ? selu_lambda * x : selu_lambda * selu_alpha * (std::exp(x) - 1.0);
}

/// Derivative in terms of the pre-activation.
inline double selu_grad(double x) {
    return x > 0 ? selu_lambda : selu_lambda * selu_alpha * std::exp(x);
}

/// out_i = q_s + q_a_i - mean(q_a)
inline std::vector<double> dueling_combine(double q_s, std::span<const double> q_a) {
    if (q_a.empty()) throw Error(ErrorKind::shape, "empty advantage vector");
    const double mean = std::accumulate(q_a.begin(), q_a.end(), 0.0) / static_cast<double>(q_a.size());
    std::vector<double> out(q_a.size());
    for (std::size_t i = 0; i < q_a.size(); ++i) out[i] = q_s + q_a[i] - mean;
    return out;
}

/// Lowest index among the maxima.
inline std::size_t argmax(std::span<const double> v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

inline constexpr std::size_t conv1_channels = 32;
inline constexpr std::size_t conv2_channels = 64;
inline constexpr std::size_t conv3_channels = 128;
inline constexpr std::size_t conv1_width = 3;
inline constexpr std::size_t default_hidden = 128;

struct NetworkShape {
    std::size_t assets = 1;
    std::size_t window = 7;
    std::size_t hidden = default_hidden;
    std::size_t actions = 2;

    /// Valid stride-1 convolutions: 1x3 then 1x(n-2) collapse the window to 1.
    std::size_t conv1_out() const { return window - conv1_width + 1; }
    std::size_t conv2_width() const { return conv1_out(); }
    std::size_t flat_size() const { return conv3_channels * assets + 1; }

    void validate() const {
        if (assets == 0) throw Error(ErrorKind::config, "network needs at least one asset");
        if (window < conv1_width) throw Error(ErrorKind::config, "window must be >= 3");
        if (hidden == 0) throw Error(ErrorKind::config, "hidden width must be >= 1");
        if (actions == 0) throw Error(ErrorKind::config, "action count must be >= 1");
    }

    bool operator==(const NetworkShape&) const = default;
};

/// All weights of the conv + dueling network. Also used as a gradient
/// accumulator of identical layout.
struct NetworkParams {
    NetworkShape shape;
    std::vector<double> conv1_w, conv1_b;  // [32][4][3]
    std::vector<double> conv2_w, conv2_b;  // [64][32][n-2]
    std::vector<double> conv3_w, conv3_b;  // [128][65]
    std::vector<double> cash_bias;         // [1]
    std::vector<double> fc1_w, fc1_b;      // [H][128M+1]
    std::vector<double> state_w, state_b;  // [1][H]
    std::vector<double> action_w, action_b;  // [|A|][H]

    static NetworkParams zeros(const NetworkShape& s) {
        s.validate();
        NetworkParams p;
        p.shape = s;
        p.for_each_array([&](auto arr) {
            std::size_t n = 1;
            for (auto d : arr.dims) n *= d;
            arr.storage->assign(n, 0.0);
        });
        return p;
    }

    /// Uniform in +-sqrt(6 / (fan_in + fan_out)) for weights, zero biases.
    static NetworkParams initialized(const NetworkShape& s, Rng& rng) {
        NetworkParams p = zeros(s);
        auto fill = [&](std::vector<double>& w, double fan_in, double fan_out) {
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            for (auto& x : w) x = rng.uniform(-limit, limit);
        };
        const double k2 = static_cast<double>(s.conv2_width());
        fill(p.conv1_w, channel_count * conv1_width, conv1_channels * conv1_width);
        fill(p.conv2_w, conv1_channels * k2, conv2_channels * k2);
        fill(p.conv3_w, conv2_channels + 1, conv3_channels);
        fill(p.fc1_w, static_cast<double>(s.flat_size()), static_cast<double>(s.hidden));
        fill(p.state_w, static_cast<double>(s.hidden), 1);
        fill(p.action_w, static_cast<double>(s.hidden), static_cast<double>(s.actions));
        return p;
    }

    /// Visits (name, dims, storage) for every array in a fixed order.
    template <typename F>
    void for_each_array(F&& f) {
        visit(*this, f);
    }

    template <typename F>
    void for_each_array(F&& f) const {
        visit(*this, f);
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for_each_array([&](const auto& arr) { n += arr.storage->size(); });
        return n;
    }

    void fill(double x) {
        for_each_array([&](auto arr) { std::fill(arr.storage->begin(), arr.storage->end(), x); });
    }

    /// this += scale * other
    void add_scaled(const NetworkParams& other, double scale) {
        require_same_shape(other);
        std::vector<const std::vector<double>*> src;
        other.for_each_array([&](const auto& arr) { src.push_back(arr.storage); });
        std::size_t i = 0;
        for_each_array([&](auto arr) {
            auto& dst = *arr.storage;
            const auto& s = *src[i++];
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += scale * s[k];
        });
    }

    void require_same_shape(const NetworkParams& other) const {
        if (!(shape == other.shape)) throw Error(ErrorKind::config, "network shapes differ");
    }

    bool operator==(const NetworkParams&) const = default;

private:
    template <typename Vec>
    struct Slot {
        const char* name;
        std::vector<std::size_t> dims;
        Vec* storage;
    };

    template <typename Self, typename F>
    static void visit(Self& self, F& f) {
        using Vec = std::conditional_t<std::is_const_v<Self>, const std::vector<double>, std::vector<double>>;
        const auto& s = self.shape;
        const std::size_t m = s.assets, h = s.hidden, a = s.actions;
        f(Slot<Vec>{"conv1_w", {conv1_channels, channel_count, conv1_width}, &self.conv1_w});
        f(Slot<Vec>{"conv1_b", {conv1_channels}, &self.conv1_b});
        f(Slot<Vec>{"conv2_w", {conv2_channels, conv1_channels, s.conv2_width()}, &self.conv2_w});
        f(Slot<Vec>{"conv2_b", {conv2_channels}, &self.conv2_b});
        f(Slot<Vec>{"conv3_w", {conv3_channels, conv2_channels + 1}, &self.conv3_w});
        f(Slot<Vec>{"conv3_b", {conv3_channels}, &self.conv3_b});
        f(Slot<Vec>{"cash_bias", {1}, &self.cash_bias});
        f(Slot<Vec>{"fc1_w", {h, conv3_channels * m + 1}, &self.fc1_w});
        f(Slot<Vec>{"fc1_b", {h}, &self.fc1_b});
        f(Slot<Vec>{"state_w", {1, h}, &self.state_w});
        f(Slot<Vec>{"state_b", {1}, &self.state_b});
        f(Slot<Vec>{"action_w", {a, h}, &self.action_w});
        f(Slot<Vec>{"action_b", {a}, &self.action_b});
    }
};

/// Activations of one forward pass, enough to run backward exactly.
struct ForwardTrace {
    std::vector<double> input;    // [M][n][4]
    std::vector<double> pre1;     // [32][M][n-2]
    std::vector<double> act1;
    std::vector<double> pre2;     // [64][M]
    std::vector<double> features; // [65][M]: selu(pre2) then risky weights
    std::vector<double> pre3;     // [128][M]
    std::vector<double> flat;     // [128M + 1]
    std::vector<double> pre4;     // [H]
    std::vector<double> hidden;   // [H]
    double q_s = 0;
    std::vector<double> q_a;      // [|A|]
    std::vector<double> q;        // [|A|]
};

inline ForwardTrace forward(const PriceTensor& tensor, const WeightVector& prev_weights,
                            const NetworkParams& p) {
    const auto& s = p.shape;
    const std::size_t m = s.assets, n = s.window, l1 = s.conv1_out(), k2 = s.conv2_width();
    const std::size_t h = s.hidden, na = s.actions;
    if (tensor.assets != m || tensor.window != n || tensor.values.size() != m * n * channel_count)
        throw Error(ErrorKind::config, "tensor shape (" + std::to_string(tensor.assets) + ", " +
                                           std::to_string(tensor.window) + ") does not match network (" +
                                           std::to_string(m) + ", " + std::to_string(n) + ")");
    if (prev_weights.size() != m + 1)
        throw Error(ErrorKind::config, "previous weights have length " +
                                           std::to_string(prev_weights.size()) + ", expected " +
                                           std::to_string(m + 1));

    ForwardTrace tr;
    tr.input = tensor.values;
    const auto& x = tr.input;

    tr.pre1.assign(conv1_channels * m * l1, 0.0);
    for (std::size_t o = 0; o < conv1_channels; ++o)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < l1; ++k) {
                double acc = p.conv1_b[o];
                for (std::size_t c = 0; c < channel_count; ++c)
                    for (std::size_t j = 0; j < conv1_width; ++j)
                        acc += p.conv1_w[(o * channel_count + c) * conv1_width + j] *
                               x[(i * n + k + j) * channel_count + c];
                tr.pre1[(o * m + i) * l1 + k] = acc;
            }
    tr.act1.resize(tr.pre1.size());
    std::transform(tr.pre1.begin(), tr.pre1.end(), tr.act1.begin(), selu);

    tr.pre2.assign(conv2_channels * m, 0.0);
    for (std::size_t o = 0; o < conv2_channels; ++o)
        for (std::size_t i = 0; i < m; ++i) {
            double acc = p.conv2_b[o];
            for (std::size_t c = 0; c < conv1_channels; ++c) {
                const double* w = &p.conv2_w[(o * conv1_channels + c) * k2];
                const double* a = &tr.act1[(c * m + i) * l1];
                for (std::size_t j = 0; j < k2; ++j) acc += w[j] * a[j];
            }
            tr.pre2[o * m + i] = acc;
        }

    tr.features.assign((conv2_channels + 1) * m, 0.0);
    for (std::size_t c = 0; c < conv2_channels * m; ++c) tr.features[c] = selu(tr.pre2[c]);
    for (std::size_t i = 0; i < m; ++i) tr.features[conv2_channels * m + i] = prev_weights[i + 1];

    tr.pre3.assign(conv3_channels * m, 0.0);
    for (std::size_t o = 0; o < conv3_channels; ++o)
        for (std::size_t i = 0; i < m; ++i) {
            double acc = p.conv3_b[o];
            for (std::size_t c = 0; c <= conv2_channels; ++c)
                acc += p.conv3_w[o * (conv2_channels + 1) + c] * tr.features[c * m + i];
            tr.pre3[o * m + i] = acc;
        }

    tr.flat.resize(s.flat_size());
    for (std::size_t k = 0; k < conv3_channels * m; ++k) tr.flat[k] = selu(tr.pre3[k]);
    tr.flat.back() = p.cash_bias[0];

    const std::size_t f = tr.flat.size();
    tr.pre4.assign(h, 0.0);
    tr.hidden.assign(h, 0.0);
    for (std::size_t u = 0; u < h; ++u) {
        const double* w = &p.fc1_w[u * f];
        double acc = p.fc1_b[u];
        for (std::size_t k = 0; k < f; ++k) acc += w[k] * tr.flat[k];
        tr.pre4[u] = acc;
        tr.hidden[u] = selu(acc);
    }

    tr.q_s = p.state_b[0];
    for (std::size_t u = 0; u < h; ++u) tr.q_s += p.state_w[u] * tr.hidden[u];
    tr.q_a.assign(na, 0.0);
    for (std::size_t a = 0; a < na; ++a) {
        double acc = p.action_b[a];
        for (std::size_t u = 0; u < h; ++u) acc += p.action_w[a * h + u] * tr.hidden[u];
        tr.q_a[a] = acc;
    }
    tr.q = dueling_combine(tr.q_s, tr.q_a);
    return tr;
}

inline std::vector<double> q_values(const PriceTensor& tensor, const WeightVector& prev_weights,
                                    const NetworkParams& p) {
    return forward(tensor, prev_weights, p).q;
}

/// Accumulates d(sum_a upstream[a] * Q[a]) / d(params) into grads.
inline void backward(const ForwardTrace& tr, const NetworkParams& p, std::span<const double> upstream,
                     NetworkParams& grads) {
    const auto& s = p.shape;
    const std::size_t m = s.assets, n = s.window, l1 = s.conv1_out(), k2 = s.conv2_width();
    const std::size_t h = s.hidden, na = s.actions, f = s.flat_size();
    if (upstream.size() != na) throw Error(ErrorKind::shape, "upstream gradient has wrong length");
    p.require_same_shape(grads);

    // Dueling head.
    double g_qs = 0;
    for (double g : upstream) g_qs += g;
    const double g_mean = g_qs / static_cast<double>(na);
    std::vector<double> g_qa(na);
    for (std::size_t a = 0; a < na; ++a) g_qa[a] = upstream[a] - g_mean;

    std::vector<double> g_hidden(h, 0.0);
    grads.state_b[0] += g_qs;
    for (std::size_t u = 0; u < h; ++u) {
        grads.state_w[u] += g_qs * tr.hidden[u];
        g_hidden[u] += g_qs * p.state_w[u];
    }
    for (std::size_t a = 0; a < na; ++a) {
        if (g_qa[a] == 0) continue;
        grads.action_b[a] += g_qa[a];
        for (std::size_t u = 0; u < h; ++u) {
            grads.action_w[a * h + u] += g_qa[a] * tr.hidden[u];
            g_hidden[u] += g_qa[a] * p.action_w[a * h + u];
        }
    }

    // fc1
    std::vector<double> g_flat(f, 0.0);
    for (std::size_t u = 0; u < h; ++u) {
        const double g = g_hidden[u] * selu_grad(tr.pre4[u]);
        if (g == 0) continue;
        grads.fc1_b[u] += g;
        const double* w = &p.fc1_w[u * f];
        double* gw = &grads.fc1_w[u * f];
        for (std::size_t k = 0; k < f; ++k) {
            gw[k] += g * tr.flat[k];
            g_flat[k] += g * w[k];
        }
    }
    grads.cash_bias[0] += g_flat.back();

    // conv3 (1x1 over 65 feature maps)
    std::vector<double> g_features(conv2_channels * m, 0.0);
    for (std::size_t o = 0; o < conv3_channels; ++o)
        for (std::size_t i = 0; i < m; ++i) {
            const double g = g_flat[o * m + i] * selu_grad(tr.pre3[o * m + i]);
            if (g == 0) continue;
            grads.conv3_b[o] += g;
            for (std::size_t c = 0; c <= conv2_channels; ++c) {
                grads.conv3_w[o * (conv2_channels + 1) + c] += g * tr.features[c * m + i];
                if (c < conv2_channels) g_features[c * m + i] += g * p.conv3_w[o * (conv2_channels + 1) + c];
            }
        }

    // conv2 (1 x (n-2))
    std::vector<double> g_act1(conv1_channels * m * l1, 0.0);
    for (std::size_t o = 0; o < conv2_channels; ++o)
        for (std::size_t i = 0; i < m; ++i) {
            const double g = g_features[o * m + i] * selu_grad(tr.pre2[o * m + i]);
            if (g == 0) continue;
            grads.conv2_b[o] += g;
            for (std::size_t c = 0; c < conv1_channels; ++c) {
                const std::size_t wbase = (o * conv1_channels + c) * k2;
                const std::size_t abase = (c * m + i) * l1;
                for (std::size_t j = 0; j < k2; ++j) {
                    grads.conv2_w[wbase + j] += g * tr.act1[abase + j];
                    g_act1[abase + j] += g * p.conv2_w[wbase + j];
                }
            }
        }

    // conv1 (1x3 over 4 price channels)
    for (std::size_t o = 0; o < conv1_channels; ++o)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = 0; k < l1; ++k) {
                const std::size_t idx = (o * m + i) * l1 + k;
                const double g = g_act1[idx] * selu_grad(tr.pre1[idx]);
                if (g == 0) continue;
                grads.conv1_b[o] += g;
                for (std::size_t c = 0; c < channel_count; ++c)
                    for (std::size_t j = 0; j < conv1_width; ++j)
                        grads.conv1_w[(o * channel_count + c) * conv1_width + j] +=
                            g * tr.input[(i * n + k + j) * channel_count + c];
            }
}

/// Eval/target pair. The target only changes through sync().
class QNetworkPair {
public:
    explicit QNetworkPair(NetworkParams eval) : eval_(std::move(eval)), target_(eval_) {}

    const NetworkParams& eval() const { return eval_; }
    NetworkParams& eval() { return eval_; }
    const NetworkParams& target() const { return target_; }

    void sync() { sync(target_, eval_); }

    static void sync(NetworkParams& target, const NetworkParams& eval) {
        target.require_same_shape(eval);
        target = eval;
    }

private:
    NetworkParams eval_;
    NetworkParams target_;
};

} // namespace dqnpm
