#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dqnpm/action_space.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"
#include "dqnpm/tensorize.hpp"

namespace dqnpm {

inline constexpr std::size_t default_window = 7;
inline constexpr double default_alpha = 100.0;
inline constexpr double default_initial_value = 10000.0;

/// Observation at the close of period t_index: price tensor ending at t and
/// the weights held going into it.
struct EnvState {
    PriceTensor tensor;
    WeightVector prev_weights;
    std::size_t t_index = 0;

    bool operator==(const EnvState&) const = default;
};

struct PortfolioAccount {
    double value = default_initial_value;
    WeightVector weights;
};

/// (1, close_1/open_1, ..., close_M/open_M) for period t.
inline std::vector<double> price_relatives(const PricePanel& panel, std::size_t t) {
    if (t >= panel.size())
        throw Error(ErrorKind::index, "period " + std::to_string(t) + " outside panel");
    std::vector<double> mu(panel.asset_count() + 1, 1.0);
    for (std::size_t i = 0; i < panel.asset_count(); ++i)
        mu[i + 1] = panel.bar(i, t).close / panel.bar(i, t).open;
    return mu;
}

inline double growth_factor(std::span<const double> w, std::span<const double> mu) {
    return std::inner_product(w.begin(), w.end(), mu.begin(), 0.0);
}

inline double rate_of_return(const WeightVector& w, std::span<const double> mu) {
    return growth_factor(w.values(), mu) - 1.0;
}

/// y0 * exp(sum of log rewards).
inline double episode_value(std::span<const double> rewards, double y0) {
    double sum = 0;
    for (double r : rewards) sum += r;
    return y0 * std::exp(sum);
}

struct StepResult {
    EnvState next;
    double reward = 0;
    double growth = 1;  // w . mu
    bool done = false;
    PortfolioAccount account;
};

/// Zero-commission market over one panel. A state observed at the close
/// of period t picks the weights held through period t + 1, so the action
/// never sees the relative it is paid by. States run from t = n - 1 to the
/// last period, giving size() - n steps per episode.
class MarketEnv {
public:
    MarketEnv(PricePanel panel, ActionTable actions, std::size_t window = default_window,
              double alpha = default_alpha)
        : panel_(std::move(panel)), actions_(std::move(actions)), window_(window), alpha_(alpha) {
        if (window_ == 0) throw Error(ErrorKind::window, "window must be >= 1");
        if (!(alpha_ > 0)) throw Error(ErrorKind::parameter, "alpha must be positive");
        if (actions_.assets() != panel_.asset_count())
            throw Error(ErrorKind::config, "action table built for " + std::to_string(actions_.assets()) +
                                               " assets, panel has " +
                                               std::to_string(panel_.asset_count()));
    }

    const PricePanel& panel() const { return panel_; }
    const ActionTable& actions() const { return actions_; }
    std::size_t window() const { return window_; }
    double alpha() const { return alpha_; }

    std::size_t first_period() const { return window_ - 1; }
    std::size_t last_period() const { return panel_.size() - 1; }
    std::size_t steps_per_episode() const { return panel_.size() - window_; }

    EnvState reset() const {
        if (panel_.size() < window_ + 1)
            throw Error(ErrorKind::window, "panel of " + std::to_string(panel_.size()) +
                                               " periods is too short for window " +
                                               std::to_string(window_) + " plus one step");
        return state_at(first_period(), WeightVector::all_cash(panel_.asset_count()));
    }

    PortfolioAccount open_account(double y0 = default_initial_value) const {
        if (!(y0 > 0)) throw Error(ErrorKind::parameter, "initial value must be positive");
        return {y0, WeightVector::all_cash(panel_.asset_count())};
    }

    bool terminal(const EnvState& state) const { return state.t_index >= last_period(); }

    StepResult step(const EnvState& state, std::size_t action_idx, const PortfolioAccount& account) const {
        if (terminal(state))
            throw Error(ErrorKind::episode, "step from terminal period " + std::to_string(state.t_index));
        const WeightVector& w = actions_.weights(action_idx);
        const std::size_t t_next = state.t_index + 1;
        const auto mu = price_relatives(panel_, t_next);

        StepResult out;
        out.growth = growth_factor(w.values(), mu);
        out.reward = std::log(out.growth);
        out.account = {account.value * out.growth, w};
        out.next = state_at(t_next, w);
        out.done = t_next == last_period();
        return out;
    }

    EnvState state_at(std::size_t t, WeightVector prev) const {
        return {build_tensor(panel_, t, window_, alpha_), std::move(prev), t};
    }

private:
    PricePanel panel_;
    ActionTable actions_;
    std::size_t window_;
    double alpha_;
};

} // namespace dqnpm
