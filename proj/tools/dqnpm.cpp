#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dqnpm/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Discrete-action DQN portfolio manager"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> checkpoint;
    std::optional<std::size_t> force_action;
    std::size_t period = 0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--seed", seed, "override the configured seed");
        sub->add_option("--out", out_dir, "override the output directory");
    };
    auto* actions = app.add_subcommand("actions", "write the enumerated action table");
    common(actions);
    auto* train = app.add_subcommand("train", "train on the training split");
    common(train);
    auto* backtest = app.add_subcommand("backtest", "greedy rollout on the test split with baselines");
    common(backtest);
    backtest->add_option("--checkpoint", checkpoint, "checkpoint to evaluate (default <out>/checkpoint.ckpt)");
    backtest->add_option("--force-action", force_action, "debug: hold this action index every period");
    auto* report = app.add_subcommand("report", "recompute metrics from <out>/equity.csv");
    common(report);
    auto* tensor = app.add_subcommand("tensor", "debug: dump the price tensor at a period");
    common(tensor);
    tensor->add_option("--period", period, "resampled period index")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    return dqnpm::cli::guarded(
        [&]() -> int {
            auto cfg = dqnpm::load_config(config_path);
            dqnpm::apply_env_overrides(cfg);
            if (seed) cfg.train.seed = *seed;
            if (out_dir) cfg.output_dir = *out_dir;

            if (actions->parsed()) return dqnpm::cli::cmd_actions(cfg, std::cout);
            if (train->parsed()) return dqnpm::cli::cmd_train(cfg, std::cout);
            if (backtest->parsed()) {
                std::optional<std::filesystem::path> ckpt;
                if (checkpoint) ckpt = *checkpoint;
                return dqnpm::cli::cmd_backtest(cfg, ckpt, std::cout, force_action);
            }
            if (report->parsed()) return dqnpm::cli::cmd_report(cfg, std::cout);
            return dqnpm::cli::cmd_tensor(cfg, period, std::cout);
        },
        std::cerr);
}
