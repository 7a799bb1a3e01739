#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/qnet.hpp"
#include "dqnpm/random.hpp"
#include "dqnpm/replay.hpp"

namespace dqnpm {

enum class OptimizerKind { sgd, adam };

struct TrainConfig {
    double gamma = 0.99;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 4096;
    std::size_t target_sync_every = 200;
    double learning_rate = 1e-4;
    OptimizerKind optimizer = OptimizerKind::sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double epsilon_start = 1.0;
    double epsilon_end = 0.1;
    std::size_t epsilon_decay_steps = 0;  // 0: half of all environment steps
    double beta = default_beta;
    std::size_t episodes = 50;
    std::size_t warmup = 200;
    std::size_t hidden = default_hidden;
    std::uint64_t seed = 0;

    void validate() const {
        auto bad = [](const std::string& field, const std::string& why) {
            return Error(ErrorKind::config, field + ": " + why);
        };
        if (!(gamma > 0 && gamma <= 1)) throw bad("gamma", "must lie in (0, 1]");
        if (batch_size == 0) throw bad("batch_size", "must be >= 1");
        if (replay_capacity == 0) throw bad("replay_capacity", "must be >= 1");
        if (batch_size > replay_capacity) throw bad("batch_size", "exceeds replay_capacity");
        if (target_sync_every == 0) throw bad("target_sync_every", "must be >= 1");
        if (!(learning_rate >= 0) || !std::isfinite(learning_rate)) throw bad("learning_rate", "must be >= 0");
        if (!(epsilon_start >= 0 && epsilon_start <= 1)) throw bad("epsilon_start", "must lie in [0, 1]");
        if (!(epsilon_end >= 0 && epsilon_end <= 1)) throw bad("epsilon_end", "must lie in [0, 1]");
        if (!(beta > 0 && beta <= 1)) throw bad("beta", "must lie in (0, 1]");
        if (hidden == 0) throw bad("hidden", "must be >= 1");
        if (!(adam_beta1 >= 0 && adam_beta1 < 1)) throw bad("adam_beta1", "must lie in [0, 1)");
        if (!(adam_beta2 >= 0 && adam_beta2 < 1)) throw bad("adam_beta2", "must lie in [0, 1)");
        if (!(adam_epsilon > 0)) throw bad("adam_epsilon", "must be positive");
    }

    std::size_t effective_warmup() const { return std::max(batch_size, warmup); }
};

/// Linear from start to end over decay_steps, constant afterwards.
inline double epsilon_at(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
    const std::size_t decay = cfg.epsilon_decay_steps > 0 ? cfg.epsilon_decay_steps : total_steps / 2;
    if (decay == 0 || step >= decay) return cfg.epsilon_end;
    const double frac = static_cast<double>(step) / static_cast<double>(decay);
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * frac;
}

/// Epsilon-greedy. One uniform draw is always consumed so the random
/// stream does not depend on epsilon.
inline std::size_t select_action(const EnvState& state, const NetworkParams& eval, double epsilon, Rng& rng) {
    if (!(epsilon >= 0 && epsilon <= 1)) throw Error(ErrorKind::parameter, "epsilon must lie in [0, 1]");
    const double u = rng.uniform01();
    if (u < epsilon) return static_cast<std::size_t>(rng.index(eval.shape.actions));
    return argmax(q_values(state.tensor, state.prev_weights, eval));
}

/// Double-DQN targets: the eval net picks the next action, the target net
/// values it. Terminal transitions do not bootstrap.
inline std::vector<double> compute_targets(const SampleBatch& batch, const NetworkParams& eval,
                                           const NetworkParams& target, double gamma) {
    if (batch.size() == 0) throw Error(ErrorKind::parameter, "empty batch");
    std::vector<double> q_real(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& tr = batch.transitions[i];
        if (tr.done) {
            q_real[i] = tr.reward;
            continue;
        }
        const auto& s1 = tr.next_state;
        const std::size_t best = argmax(q_values(s1.tensor, s1.prev_weights, eval));
        const double q_next = q_values(s1.tensor, s1.prev_weights, target)[best];
        q_real[i] = tr.reward + gamma * q_next;
    }
    return q_real;
}

struct LossResult {
    double loss = 0;
    std::vector<double> td_errors;
};

/// Importance-weighted squared error K . (q_eval - q_real)^2.
inline LossResult compute_loss(std::span<const double> q_eval, std::span<const double> q_real,
                               std::span<const double> weights) {
    if (q_eval.size() != q_real.size() || q_eval.size() != weights.size())
        throw Error(ErrorKind::shape, "loss inputs differ in length");
    LossResult out;
    out.td_errors.resize(q_eval.size());
    for (std::size_t i = 0; i < q_eval.size(); ++i) {
        const double d = q_eval[i] - q_real[i];
        out.loss += weights[i] * d * d;
        out.td_errors[i] = std::abs(d);
    }
    return out;
}

/// Plain SGD, or Adam when configured.
class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, const NetworkShape& shape)
        : kind_(cfg.optimizer), lr_(cfg.learning_rate), b1_(cfg.adam_beta1), b2_(cfg.adam_beta2),
          eps_(cfg.adam_epsilon) {
        if (kind_ == OptimizerKind::adam) {
            m_ = NetworkParams::zeros(shape);
            v_ = NetworkParams::zeros(shape);
        }
    }

    void apply(NetworkParams& params, const NetworkParams& grads) {
        params.require_same_shape(grads);
        if (kind_ == OptimizerKind::sgd) {
            params.add_scaled(grads, -lr_);
            return;
        }
        ++t_;
        const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
        std::vector<const std::vector<double>*> g;
        grads.for_each_array([&](const auto& arr) { g.push_back(arr.storage); });
        std::vector<std::vector<double>*> m, v;
        m_.for_each_array([&](auto arr) { m.push_back(arr.storage); });
        v_.for_each_array([&](auto arr) { v.push_back(arr.storage); });
        std::size_t a = 0;
        params.for_each_array([&](auto arr) {
            auto& w = *arr.storage;
            const auto& ga = *g[a];
            auto& ma = *m[a];
            auto& va = *v[a];
            for (std::size_t k = 0; k < w.size(); ++k) {
                ma[k] = b1_ * ma[k] + (1 - b1_) * ga[k];
                va[k] = b2_ * va[k] + (1 - b2_) * ga[k] * ga[k];
                w[k] -= lr_ * (ma[k] / c1) / (std::sqrt(va[k] / c2) + eps_);
            }
            ++a;
        });
    }

private:
    OptimizerKind kind_;
    double lr_, b1_, b2_, eps_;
    std::size_t t_ = 0;
    NetworkParams m_, v_;
};

/// Everything mutated by training besides the replay buffer.
struct Learner {
    QNetworkPair nets;
    Optimizer optimizer;
    std::size_t steps = 0;

    Learner(NetworkParams initial, const TrainConfig& cfg)
        : nets(std::move(initial)), optimizer(cfg, nets.eval().shape) {}
};

struct StepReport {
    double loss = 0;
    double mean_td_error = 0;
    bool synced = false;
};

inline StepReport train_step(PrioritizedReplay& buffer, Learner& learner, const TrainConfig& cfg, Rng& rng) {
    const SampleBatch batch = buffer.sample(cfg.batch_size, cfg.beta, rng);
    NetworkParams& eval = learner.nets.eval();
    const auto q_real = compute_targets(batch, eval, learner.nets.target(), cfg.gamma);

    std::vector<ForwardTrace> traces;
    traces.reserve(batch.size());
    std::vector<double> q_sel(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& s = batch.transitions[i].state;
        traces.push_back(forward(s.tensor, s.prev_weights, eval));
        q_sel[i] = traces.back().q[batch.transitions[i].action];
    }
    LossResult lr = compute_loss(q_sel, q_real, batch.weights);

    NetworkParams grads = NetworkParams::zeros(eval.shape);
    std::vector<double> upstream(eval.shape.actions, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::size_t a = batch.transitions[i].action;
        upstream[a] = 2.0 * batch.weights[i] * (q_sel[i] - q_real[i]);
        backward(traces[i], eval, upstream, grads);
        upstream[a] = 0.0;
    }
    learner.optimizer.apply(eval, grads);
    buffer.update_priorities(batch.indices, lr.td_errors);

    StepReport report;
    report.loss = lr.loss;
    for (double td : lr.td_errors) report.mean_td_error += td;
    report.mean_td_error /= static_cast<double>(batch.size());
    ++learner.steps;
    if (learner.steps % cfg.target_sync_every == 0) {
        learner.nets.sync();
        report.synced = true;
    }
    return report;
}

struct EpisodeLog {
    std::size_t episode = 0;
    double total_reward = 0;
    double mean_loss = 0;
    double epsilon = 0;
    std::size_t train_steps = 0;
};

struct TrainingResult {
    NetworkParams params;
    std::vector<EpisodeLog> log;
};

inline std::string training_log_csv(const std::vector<EpisodeLog>& log) {
    std::string out = "episode,total_reward,mean_loss,epsilon\n";
    for (const auto& e : log)
        out += std::to_string(e.episode) + "," + text::fmt(e.total_reward) + "," + text::fmt(e.mean_loss) +
               "," + text::fmt(e.epsilon) + "\n";
    return out;
}

/// Called after every episode with the 1-based episode number and the
/// current eval parameters.
using EpisodeCallback = std::function<void(std::size_t, const NetworkParams&)>;

/// Single-threaded epsilon-greedy training over the whole panel per
/// episode. All randomness (initialization, exploration, sampling) comes
/// from one generator seeded with cfg.seed.
inline TrainingResult run_training(const MarketEnv& env, const TrainConfig& cfg,
                                   const EpisodeCallback& on_episode = {}) {
    cfg.validate();
    Rng rng(cfg.seed);
    const NetworkShape shape{env.panel().asset_count(), env.window(), cfg.hidden, env.actions().size()};
    Learner learner(NetworkParams::initialized(shape, rng), cfg);
    TrainingResult result;
    if (cfg.episodes == 0) {
        result.params = learner.nets.eval();
        return result;
    }

    PrioritizedReplay buffer(cfg.replay_capacity);
    const std::size_t total_steps = cfg.episodes * env.steps_per_episode();
    std::size_t global_step = 0;
    for (std::size_t ep = 1; ep <= cfg.episodes; ++ep) {
        EpisodeLog entry;
        entry.episode = ep;
        EnvState state = env.reset();
        PortfolioAccount account = env.open_account();
        double loss_sum = 0;
        bool done = false;
        while (!done) {
            entry.epsilon = epsilon_at(cfg, global_step, total_steps);
            const std::size_t action = select_action(state, learner.nets.eval(), entry.epsilon, rng);
            StepResult sr = env.step(state, action, account);
            entry.total_reward += sr.reward;
            buffer.push(Transition{state, action, sr.reward, sr.next, sr.done});
            if (buffer.size() >= cfg.effective_warmup()) {
                loss_sum += train_step(buffer, learner, cfg, rng).loss;
                ++entry.train_steps;
            }
            state = std::move(sr.next);
            account = std::move(sr.account);
            done = sr.done;
            ++global_step;
        }
        entry.mean_loss = entry.train_steps ? loss_sum / static_cast<double>(entry.train_steps) : 0.0;
        result.log.push_back(entry);
        if (on_episode) on_episode(ep, learner.nets.eval());
    }
    result.params = learner.nets.eval();
    return result;
}

} // namespace dqnpm
