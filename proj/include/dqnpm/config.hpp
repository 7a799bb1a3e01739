#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dqnpm/action_space.hpp"
#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/market_data.hpp"
#include "dqnpm/text.hpp"
#include "dqnpm/trainer.hpp"

namespace dqnpm {

/// Everything one run needs. Parsed from a `key = value` file; relative
/// paths resolve against the file's directory.
struct RunConfig {
    std::vector<std::string> asset_names;
    std::vector<std::filesystem::path> asset_files;
    std::size_t period_days = 2;
    std::size_t window = default_window;
    std::size_t divisions = 4;
    double alpha = default_alpha;
    std::optional<Date> train_end;
    double initial_value = default_initial_value;
    std::filesystem::path output_dir = "out";
    std::uint64_t action_cap = default_action_cap;
    std::size_t checkpoint_every = 0;
    TrainConfig train;

    /// Range checks on every field; data files are checked when loaded.
    void validate() const {
        auto bad = [](const std::string& field, const std::string& why) {
            return Error(ErrorKind::config, field + ": " + why);
        };
        if (asset_files.empty()) throw bad("assets", "at least one asset file is required");
        if (period_days == 0) throw bad("period_days", "must be >= 1");
        if (window < 3) throw bad("window", "must be >= 3 for the convolution stack");
        if (divisions == 0) throw bad("divisions", "must be >= 1");
        if (!(alpha > 0)) throw bad("alpha", "must be positive");
        if (!(initial_value > 0)) throw bad("initial_value", "must be positive");
        if (action_cap == 0) throw bad("action_cap", "must be >= 1");
        train.validate();
    }
};

namespace detail {

template <typename T>
void set_number(const std::string& key, const std::string& value, T& out) {
    bool ok;
    if constexpr (std::is_floating_point_v<T>)
        ok = text::parse_double(value, out);
    else
        ok = text::parse_int(value, out);
    if (!ok) throw Error(ErrorKind::config, key + ": cannot parse '" + value + "'");
}

} // namespace detail

inline void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value,
                             const std::filesystem::path& base_dir) {
    using detail::set_number;
    auto& t = cfg.train;
    if (key == "assets") {
        cfg.asset_files.clear();
        cfg.asset_names.clear();
        for (const auto& item : text::split(value, ',')) {
            if (item.empty()) throw Error(ErrorKind::config, "assets: empty entry");
            // NAME=path or just path (name = file stem)
            std::string name, path = item;
            if (auto eq = item.find('='); eq != std::string::npos) {
                name = std::string(text::trim(std::string_view(item).substr(0, eq)));
                path = std::string(text::trim(std::string_view(item).substr(eq + 1)));
            }
            std::filesystem::path p(path);
            if (p.is_relative()) p = base_dir / p;
            cfg.asset_names.push_back(name.empty() ? p.stem().string() : name);
            cfg.asset_files.push_back(p);
        }
    } else if (key == "period_days") {
        set_number(key, value, cfg.period_days);
    } else if (key == "window") {
        set_number(key, value, cfg.window);
    } else if (key == "divisions") {
        set_number(key, value, cfg.divisions);
    } else if (key == "alpha") {
        set_number(key, value, cfg.alpha);
    } else if (key == "train_end") {
        Date d;
        if (!parse_date(value, d)) throw Error(ErrorKind::config, "train_end: bad date '" + value + "'");
        cfg.train_end = d;
    } else if (key == "initial_value") {
        set_number(key, value, cfg.initial_value);
    } else if (key == "output_dir") {
        std::filesystem::path p(value);
        cfg.output_dir = p.is_relative() ? base_dir / p : p;
    } else if (key == "action_cap") {
        set_number(key, value, cfg.action_cap);
    } else if (key == "checkpoint_every") {
        set_number(key, value, cfg.checkpoint_every);
    } else if (key == "seed") {
        set_number(key, value, t.seed);
    } else if (key == "gamma") {
        set_number(key, value, t.gamma);
    } else if (key == "batch_size") {
        set_number(key, value, t.batch_size);
    } else if (key == "replay_capacity") {
        set_number(key, value, t.replay_capacity);
    } else if (key == "target_sync_every") {
        set_number(key, value, t.target_sync_every);
    } else if (key == "learning_rate") {
        set_number(key, value, t.learning_rate);
    } else if (key == "optimizer") {
        if (value == "sgd")
            t.optimizer = OptimizerKind::sgd;
        else if (value == "adam")
            t.optimizer = OptimizerKind::adam;
        else
            throw Error(ErrorKind::config, "optimizer: expected sgd or adam, got '" + value + "'");
    } else if (key == "adam_beta1") {
        set_number(key, value, t.adam_beta1);
    } else if (key == "adam_beta2") {
        set_number(key, value, t.adam_beta2);
    } else if (key == "adam_epsilon") {
        set_number(key, value, t.adam_epsilon);
    } else if (key == "epsilon_start") {
        set_number(key, value, t.epsilon_start);
    } else if (key == "epsilon_end") {
        set_number(key, value, t.epsilon_end);
    } else if (key == "epsilon_decay_steps") {
        set_number(key, value, t.epsilon_decay_steps);
    } else if (key == "beta") {
        set_number(key, value, t.beta);
    } else if (key == "episodes") {
        set_number(key, value, t.episodes);
    } else if (key == "warmup") {
        set_number(key, value, t.warmup);
    } else if (key == "hidden") {
        set_number(key, value, t.hidden);
    } else {
        throw Error(ErrorKind::config, "unknown key '" + key + "'");
    }
}

inline RunConfig parse_config(std::string_view contents, const std::filesystem::path& base_dir = ".") {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t start = 0;
    std::map<std::string, std::size_t> seen;
    while (start <= contents.size()) {
        auto pos = contents.find('\n', start);
        if (pos == std::string_view::npos) pos = contents.size();
        ++line_no;
        auto line = contents.substr(start, pos - start);
        start = pos + 1;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(text::trim(line.substr(0, eq)));
        const std::string value(text::trim(line.substr(eq + 1)));
        if (!seen.emplace(key, line_no).second)
            throw Error(ErrorKind::config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        set_config_value(cfg, key, value, base_dir);
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error(ErrorKind::io, "no such config file: " + path.string());
    return parse_config(text::read_file(path), path.parent_path().empty() ? "." : path.parent_path());
}

/// DQNPM_OUT and DQNPM_SEED are the only environment overrides.
inline void apply_env_overrides(RunConfig& cfg,
                                const std::function<const char*(const char*)>& getenv = std::getenv) {
    if (const char* out = getenv("DQNPM_OUT"); out && *out) cfg.output_dir = out;
    if (const char* seed = getenv("DQNPM_SEED"); seed && *seed)
        detail::set_number("DQNPM_SEED", seed, cfg.train.seed);
}

} // namespace dqnpm
