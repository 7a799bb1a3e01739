#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dqnpm/action_space.hpp"
#include "dqnpm/baselines.hpp"
#include "dqnpm/checkpoint.hpp"
#include "dqnpm/config.hpp"
#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"
#include "dqnpm/metrics.hpp"
#include "dqnpm/tensorize.hpp"
#include "dqnpm/text.hpp"
#include "dqnpm/trainer.hpp"

namespace dqnpm::cli {

namespace fs = std::filesystem;

inline fs::path default_checkpoint(const RunConfig& cfg) { return cfg.output_dir / "checkpoint.ckpt"; }

/// Loaded, aligned and resampled panel for the configured assets.
inline PricePanel load_panel(const RunConfig& cfg) {
    std::vector<BarSeries> series;
    series.reserve(cfg.asset_files.size());
    for (const auto& f : cfg.asset_files) series.push_back(load_csv(f));
    return resample(align(cfg.asset_names, series), cfg.period_days);
}

inline PanelSplit load_split(const RunConfig& cfg) {
    if (!cfg.train_end) throw Error(ErrorKind::config, "train_end: required");
    return split(load_panel(cfg), *cfg.train_end);
}

inline ActionTable build_actions(const RunConfig& cfg) {
    return enumerate_actions(cfg.asset_files.size(), cfg.divisions, cfg.action_cap);
}

inline int cmd_actions(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto table = build_actions(cfg);
    text::write_file_atomic(cfg.output_dir / "actions.csv", table.to_csv());
    out << "actions: " << table.size() << " (M=" << table.assets() << ", N=" << table.divisions() << ")\n";
    return 0;
}

inline int cmd_train(const RunConfig& cfg, std::ostream& out) {
    cfg.validate();
    const auto actions = build_actions(cfg);
    const auto parts = load_split(cfg);
    const MarketEnv env(parts.train, actions, cfg.window, cfg.alpha);
    env.reset();

    const auto result = run_training(env, cfg.train, [&](std::size_t ep, const NetworkParams& p) {
        if (cfg.checkpoint_every > 0 && ep % cfg.checkpoint_every == 0)
            save_checkpoint(cfg.output_dir / ("checkpoint_ep" + std::to_string(ep) + ".ckpt"), p);
    });
    save_checkpoint(default_checkpoint(cfg), result.params);
    text::write_file_atomic(cfg.output_dir / "train_log.csv", training_log_csv(result.log));
    out << "trained " << result.log.size() << " episodes on " << parts.train.size() << " periods ("
        << env.steps_per_episode() << " steps each), |A| = " << actions.size() << "\n";
    if (!result.log.empty())
        out << "last episode total reward " << text::fixed(result.log.back().total_reward, 6) << "\n";
    return 0;
}

/// Writes metrics.csv for the given curves and prints the aligned table.
inline std::vector<MetricsReport> write_report(const RunConfig& cfg, const std::vector<EquityCurve>& curves,
                                              std::ostream& out) {
    std::vector<MetricsReport> rows;
    for (const auto& c : curves) rows.push_back(evaluate(c.name, c.values));
    text::write_file_atomic(cfg.output_dir / "metrics.csv", metrics_csv(rows));
    out << metrics_table(rows);
    return rows;
}

struct BacktestResult {
    std::size_t steps = 0;
    std::vector<EquityCurve> curves;  // DQN, BAH, UCRP
};

/// Greedy rollout over the test periods. The environment is seeded with
/// the last `window` training periods so every test period is traded once
/// and the DQN curve lines up with the baselines.
inline BacktestResult backtest(const RunConfig& cfg, const NetworkParams& params,
                               std::optional<std::size_t> forced_action = std::nullopt) {
    const auto actions = build_actions(cfg);
    const auto parts = load_split(cfg);
    const NetworkShape expected{actions.assets(), cfg.window, cfg.train.hidden, actions.size()};
    if (!(params.shape == expected))
        throw Error(ErrorKind::config,
                    "checkpoint shape (assets " + std::to_string(params.shape.assets) + ", window " +
                        std::to_string(params.shape.window) + ", hidden " + std::to_string(params.shape.hidden) +
                        ", actions " + std::to_string(params.shape.actions) + ") does not match config");
    if (forced_action && *forced_action >= actions.size())
        throw Error(ErrorKind::config, "force_action: index out of range");
    if (parts.train.size() < cfg.window)
        throw Error(ErrorKind::window, "training split shorter than the window");

    const std::size_t history = cfg.window;
    PricePanel panel = parts.train.slice(parts.train.size() - history, history);
    for (std::size_t i = 0; i < panel.asset_count(); ++i)
        panel.bars[i].insert(panel.bars[i].end(), parts.test.bars[i].begin(), parts.test.bars[i].end());

    const MarketEnv env(panel, actions, cfg.window, cfg.alpha);
    EnvState state = env.reset();
    PortfolioAccount account = env.open_account(cfg.initial_value);

    BacktestResult res;
    EquityCurve dqn{"DQN", {account.value}};
    std::string trace = "date,action,growth,reward,value\n";
    bool done = false;
    while (!done) {
        const std::size_t a =
            forced_action ? *forced_action : argmax(q_values(state.tensor, state.prev_weights, params));
        StepResult sr = env.step(state, a, account);
        trace += to_string(panel.date(sr.next.t_index)) + "," + std::to_string(a) + "," + text::fmt(sr.growth) +
                 "," + text::fmt(sr.reward) + "," + text::fmt(sr.account.value) + "\n";
        dqn.values.push_back(sr.account.value);
        state = std::move(sr.next);
        account = std::move(sr.account);
        done = sr.done;
        ++res.steps;
    }
    text::write_file_atomic(cfg.output_dir / "trace.csv", trace);

    res.curves = {dqn, bah(parts.test, cfg.initial_value), ucrp(parts.test, cfg.initial_value)};
    std::string equity = "date";
    for (const auto& c : res.curves) equity += "," + c.name;
    equity += "\n";
    for (std::size_t k = 0; k < dqn.values.size(); ++k) {
        equity += to_string(panel.date(history - 1 + k));
        for (const auto& c : res.curves) equity += "," + text::fmt(c.values[k]);
        equity += "\n";
    }
    text::write_file_atomic(cfg.output_dir / "equity.csv", equity);
    return res;
}

inline int cmd_backtest(const RunConfig& cfg, const std::optional<fs::path>& checkpoint, std::ostream& out,
                        std::optional<std::size_t> forced_action = std::nullopt) {
    cfg.validate();
    const auto params = load_checkpoint(checkpoint.value_or(default_checkpoint(cfg)));
    const auto res = backtest(cfg, params, forced_action);
    out << "backtest: " << res.steps << " test periods\n";
    write_report(cfg, res.curves, out);
    return 0;
}

/// Rebuilds metrics.csv from an existing equity.csv.
inline int cmd_report(const RunConfig& cfg, std::ostream& out) {
    const auto path = cfg.output_dir / "equity.csv";
    if (!fs::exists(path)) throw Error(ErrorKind::io, "no such file: " + path.string());
    const auto contents = text::read_file(path);
    std::vector<EquityCurve> curves;
    std::size_t row = 0;
    std::size_t start = 0;
    while (start < contents.size()) {
        auto pos = contents.find('\n', start);
        if (pos == std::string::npos) pos = contents.size();
        const auto fields = text::split(std::string_view(contents).substr(start, pos - start), ',');
        start = pos + 1;
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (row++ == 0) {
            for (std::size_t k = 1; k < fields.size(); ++k) curves.push_back({fields[k], {}});
            continue;
        }
        if (fields.size() != curves.size() + 1)
            throw Error(ErrorKind::format, path.string() + " row " + std::to_string(row - 1) + ": wrong field count");
        for (std::size_t k = 1; k < fields.size(); ++k) {
            double v = 0;
            if (!text::parse_double(fields[k], v) || !(v > 0))
                throw Error(ErrorKind::data, path.string() + " row " + std::to_string(row - 1) + ": bad value");
            curves[k - 1].values.push_back(v);
        }
    }
    if (curves.empty()) throw Error(ErrorKind::format, path.string() + ": no curves");
    write_report(cfg, curves, out);
    return 0;
}

/// Debug dump of the price tensor at period t of the resampled panel.
inline int cmd_tensor(const RunConfig& cfg, std::size_t t, std::ostream& out) {
    cfg.validate();
    const auto panel = load_panel(cfg);
    out << tensor_csv(build_tensor(panel, t, cfg.window, cfg.alpha), panel.assets);
    return 0;
}

/// Runs fn and maps library errors to exit codes (1 data/IO, 2 config/size).
inline int guarded(const std::function<int()>& fn, std::ostream& err) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "dqnpm: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const fs::filesystem_error& e) {
        err << "dqnpm: io error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace dqnpm::cli
