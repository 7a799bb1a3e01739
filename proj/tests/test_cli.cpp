#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dqnpm/cli.hpp"
#include "oracles.hpp"

using namespace dqnpm;
namespace fs = std::filesystem;

namespace {

/// Fresh scratch directory with a 2-asset trending market and a config.
struct Workspace {
    fs::path root;

    explicit Workspace(const std::string& name, std::size_t periods = 60) {
        root = fs::temp_directory_path() / ("dqnpm_cli_" + name);
        fs::remove_all(root);
        oracle::write_panel_csvs(oracle::trending_market(periods), root / "data");
        // Dates from oracle::day: period 40 closes on 2001-01-13.
        std::ofstream(root / "run.conf") << "assets = data/A0.csv, data/A1.csv\n"
                                            "period_days = 1\n"
                                            "divisions = 2\n"
                                            "train_end = " << to_string(oracle::day(39)) << "\n"
                                            "output_dir = out\n"
                                            "episodes = 1\nbatch_size = 8\nreplay_capacity = 64\n"
                                            "warmup = 16\nhidden = 8\nseed = 5\n";
    }
    ~Workspace() { fs::remove_all(root); }

    RunConfig config() const { return load_config(root / "run.conf"); }
    fs::path out() const { return root / "out"; }
};

std::string slurp(const fs::path& p) { return text::read_file(p); }

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, ParsesAndResolvesPaths) {
    const auto cfg = parse_config("# comment\nassets = X=a.csv, /abs/b.csv\nperiod_days = 3\nalpha = 12.5\n"
                                  "optimizer = adam\ntrain_end = 2016-12-30\nseed = 9\n",
                                  "/base");
    EXPECT_EQ(cfg.asset_names, (std::vector<std::string>{"X", "b"}));
    EXPECT_EQ(cfg.asset_files[0], fs::path("/base/a.csv"));
    EXPECT_EQ(cfg.asset_files[1], fs::path("/abs/b.csv"));
    EXPECT_EQ(cfg.period_days, 3u);
    EXPECT_EQ(cfg.alpha, 12.5);
    EXPECT_EQ(cfg.train.optimizer, OptimizerKind::adam);
    EXPECT_EQ(cfg.train.seed, 9u);
    EXPECT_EQ(*cfg.train_end, (Date{2016, 12, 30}));
}

TEST(Config, ErrorsNameTheField) {
    auto msg = [](const std::string& text) {
        try {
            parse_config(text).validate();
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::config);
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(msg("bogus = 1\n").find("bogus"), std::string::npos);
    EXPECT_NE(msg("assets = a.csv\ngamma = 2\n").find("gamma"), std::string::npos);
    EXPECT_NE(msg("assets = a.csv\nwindow = x\n").find("window"), std::string::npos);
    EXPECT_NE(msg("seed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
    EXPECT_NE(msg("period_days = 2\n").find("assets"), std::string::npos);
}

TEST(Config, EnvironmentOverrides) {
    auto cfg = parse_config("assets = a.csv\nseed = 1\noutput_dir = o\n", "/b");
    apply_env_overrides(cfg, [](const char* name) -> const char* {
        if (std::string(name) == "DQNPM_OUT") return "/elsewhere";
        if (std::string(name) == "DQNPM_SEED") return "42";
        return nullptr;
    });
    EXPECT_EQ(cfg.output_dir, fs::path("/elsewhere"));
    EXPECT_EQ(cfg.train.seed, 42u);
}

TEST(CmdActions, WritesTableAndIsRepeatable) {
    Workspace ws("actions");
    auto cfg = ws.config();
    cfg.asset_files.resize(1);
    cfg.asset_names.resize(1);
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_actions(cfg, out), 0);
    const auto first = slurp(ws.out() / "actions.csv");
    EXPECT_EQ(lines(first), 4u);
    EXPECT_NE(out.str().find("3"), std::string::npos);
    EXPECT_EQ(cli::cmd_actions(cfg, out), 0);
    EXPECT_EQ(slurp(ws.out() / "actions.csv"), first);
}

TEST(CmdActions, CapExceededExitsTwoWithoutFile) {
    Workspace ws("cap");
    auto cfg = ws.config();
    cfg.divisions = 200;
    cfg.action_cap = 100;
    std::ostringstream out, err;
    EXPECT_EQ(cli::guarded([&] { return cli::cmd_actions(cfg, out); }, err), 2);
    EXPECT_FALSE(fs::exists(ws.out() / "actions.csv"));
    EXPECT_FALSE(fs::exists(ws.out() / "actions.csv.tmp"));
    EXPECT_NE(err.str().find("size error"), std::string::npos);
}

TEST(CmdTrain, MissingAssetFileExitsOne) {
    Workspace ws("missing");
    auto cfg = ws.config();
    cfg.asset_files[1] = ws.root / "data" / "nope.csv";
    std::ostringstream out, err;
    EXPECT_EQ(cli::guarded([&] { return cli::cmd_train(cfg, out); }, err), 1);
    EXPECT_NE(err.str().find("nope.csv"), std::string::npos);
}

TEST(CmdTrain, ZeroEpisodesWritesInitialParams) {
    Workspace ws("zero");
    auto cfg = ws.config();
    cfg.train.episodes = 0;
    std::ostringstream out;
    EXPECT_EQ(cli::cmd_train(cfg, out), 0);
    Rng rng(cfg.train.seed);
    EXPECT_EQ(load_checkpoint(ws.out() / "checkpoint.ckpt"), NetworkParams::initialized({2, 7, 8, 6}, rng));
    EXPECT_EQ(lines(slurp(ws.out() / "train_log.csv")), 1u);
}

TEST(CmdBacktest, ForcedCashIsFlat) {
    Workspace ws("cash");
    auto cfg = ws.config();
    std::ostringstream out;
    ASSERT_EQ(cli::cmd_train(cfg, out), 0);
    ASSERT_EQ(cli::cmd_backtest(cfg, std::nullopt, out, 0), 0);

    const auto trace = slurp(ws.out() / "trace.csv");
    EXPECT_EQ(lines(trace), 1u + 20u);  // one row per test period
    const auto metrics = slurp(ws.out() / "metrics.csv");
    EXPECT_EQ(lines(metrics), 1u + 3u);
    EXPECT_NE(metrics.find("DQN,0,0,nan,nan,0,0,20"), std::string::npos) << metrics;
    const auto equity = slurp(ws.out() / "equity.csv");
    EXPECT_EQ(lines(equity), 1u + 21u);
    EXPECT_EQ(equity.substr(0, 19), "date,DQN,BAH,UCRP\n2");
}

TEST(CmdBacktest, ShapeMismatchIsConfigError) {
    Workspace ws("shape");
    auto cfg = ws.config();
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_train(cfg, out), 0);
    cfg.divisions = 3;
    EXPECT_EQ(cli::guarded([&] { return cli::cmd_backtest(cfg, std::nullopt, out); }, err), 2);
}

TEST(CmdReport, RecomputesFromEquity) {
    Workspace ws("report");
    auto cfg = ws.config();
    std::ostringstream out;
    ASSERT_EQ(cli::cmd_train(cfg, out), 0);
    ASSERT_EQ(cli::cmd_backtest(cfg, std::nullopt, out), 0);
    const auto before = slurp(ws.out() / "metrics.csv");
    fs::remove(ws.out() / "metrics.csv");
    std::ostringstream rep;
    ASSERT_EQ(cli::cmd_report(cfg, rep), 0);
    EXPECT_EQ(slurp(ws.out() / "metrics.csv"), before);
    EXPECT_NE(rep.str().find("UCRP"), std::string::npos);
}

TEST(CmdTensor, DumpsRows) {
    Workspace ws("tensor");
    std::ostringstream out;
    ASSERT_EQ(cli::cmd_tensor(ws.config(), 10, out), 0);
    EXPECT_EQ(lines(out.str()), 9u);
}
