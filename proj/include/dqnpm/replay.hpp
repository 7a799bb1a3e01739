#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dqnpm/environment.hpp"
#include "dqnpm/error.hpp"
#include "dqnpm/random.hpp"

namespace dqnpm {

inline constexpr double priority_floor = 1e-5;
inline constexpr double default_beta = 0.4;

/// Complete binary tree over a power-of-two number of leaves. Node k has
/// children 2k+1 and 2k+2; leaf j lives at node j + capacity - 1.
class SumTree {
public:
    explicit SumTree(std::size_t capacity = 1)
        : capacity_(std::bit_ceil(std::max<std::size_t>(capacity, 1))), nodes_(2 * capacity_ - 1, 0.0) {}

    std::size_t capacity() const { return capacity_; }
    double total() const { return nodes_[0]; }
    double leaf(std::size_t j) const { return nodes_[j + capacity_ - 1]; }
    std::span<const double> nodes() const { return nodes_; }

    void set(std::size_t j, double priority) {
        if (j >= capacity_) throw Error(ErrorKind::index, "leaf " + std::to_string(j) + " out of range");
        if (!(priority >= 0) || !std::isfinite(priority))
            throw Error(ErrorKind::parameter, "priority must be finite and >= 0");
        std::size_t k = j + capacity_ - 1;
        nodes_[k] = priority;
        // Re-sum rather than add a delta so rounding never accumulates.
        while (k > 0) {
            k = (k - 1) / 2;
            nodes_[k] = nodes_[2 * k + 1] + nodes_[2 * k + 2];
        }
    }

    /// Descend from the root: left while v < left sum, else subtract it and
    /// go right. A right subtree with zero mass is never entered, so v equal
    /// to the total lands on the last positive leaf.
    std::size_t search(double v) const {
        if (!(v >= 0) || v > total())
            throw Error(ErrorKind::range, "search value " + text::fmt(v) + " outside [0, " +
                                              text::fmt(total()) + "]");
        std::size_t k = 0;
        while (k < capacity_ - 1) {
            const std::size_t left = 2 * k + 1;
            const std::size_t right = left + 1;
            if (v < nodes_[left] || nodes_[right] <= 0) {
                k = left;
            } else {
                v -= nodes_[left];
                k = right;
            }
        }
        return k - (capacity_ - 1);
    }

    /// (leaf, priority) pairs for inspection.
    std::vector<std::pair<std::size_t, double>> dump() const {
        std::vector<std::pair<std::size_t, double>> out;
        out.reserve(capacity_);
        for (std::size_t j = 0; j < capacity_; ++j) out.emplace_back(j, leaf(j));
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<double> nodes_;
};

struct Transition {
    EnvState state;
    std::size_t action = 0;
    double reward = 0;
    EnvState next_state;
    bool done = false;
};

struct SampleBatch {
    std::vector<std::size_t> indices;
    std::vector<Transition> transitions;
    std::vector<double> priorities;
    std::vector<double> weights;

    std::size_t size() const { return indices.size(); }
};

/// Ring-buffer memory pool indexed by SumTree leaves. Not synchronized.
class PrioritizedReplay {
public:
    explicit PrioritizedReplay(std::size_t capacity) : tree_(capacity), memory_(tree_.capacity()) {}

    std::size_t capacity() const { return tree_.capacity(); }
    std::size_t size() const { return size_; }
    const SumTree& tree() const { return tree_; }
    const Transition& at(std::size_t leaf) const { return *memory_.at(leaf); }

    /// Largest stored priority, or 1 when empty.
    double max_priority() const {
        double m = 0;
        for (std::size_t j = 0; j < size_; ++j) m = std::max(m, tree_.leaf(j));
        return m > 0 ? m : 1.0;
    }

    /// Smallest positive stored priority. Zero-priority entries are never
    /// drawn, so they do not set the weight scale.
    double min_priority() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < size_; ++j)
            if (tree_.leaf(j) > 0) m = std::min(m, tree_.leaf(j));
        return m;
    }

    std::size_t push(Transition t, double priority) {
        if (!(priority >= 0)) throw Error(ErrorKind::parameter, "negative priority");
        const std::size_t leaf = cursor_;
        tree_.set(leaf, priority);
        memory_[leaf] = std::move(t);
        cursor_ = (cursor_ + 1) % capacity();
        size_ = std::min(size_ + 1, capacity());
        return leaf;
    }

    std::size_t push(Transition t) { return push(std::move(t), max_priority()); }

    /// One draw per equal-mass segment of the total priority, then
    /// importance weights (p_i / p_min)^-beta.
    SampleBatch sample(std::size_t n, double beta, Rng& rng) const {
        if (n == 0) throw Error(ErrorKind::parameter, "batch size must be >= 1");
        if (size_ < n)
            throw Error(ErrorKind::underfull, "buffer holds " + std::to_string(size_) + " < " +
                                                  std::to_string(n) + " transitions");
        const double total = tree_.total();
        if (!(total > 0)) throw Error(ErrorKind::degenerate, "total priority is zero");

        const double p_min = min_priority();
        const double seg = total / static_cast<double>(n);
        SampleBatch batch;
        batch.indices.reserve(n);
        batch.transitions.reserve(n);
        batch.priorities.reserve(n);
        batch.weights.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = std::min(rng.uniform(seg * i, seg * (i + 1)), total);
            const std::size_t leaf = tree_.search(v);
            const double p = tree_.leaf(leaf);
            batch.indices.push_back(leaf);
            batch.transitions.push_back(*memory_[leaf]);
            batch.priorities.push_back(p);
            batch.weights.push_back(std::pow(p / p_min, -beta));
        }
        return batch;
    }

    void update_priorities(std::span<const std::size_t> indices, std::span<const double> td_errors) {
        if (indices.size() != td_errors.size())
            throw Error(ErrorKind::shape, "indices and td_errors differ in length");
        for (std::size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] >= size_)
                throw Error(ErrorKind::index, "leaf " + std::to_string(indices[i]) + " holds no transition");
            tree_.set(indices[i], std::abs(td_errors[i]) + priority_floor);
        }
    }

private:
    SumTree tree_;
    std::vector<std::optional<Transition>> memory_;
    std::size_t cursor_ = 0;
    std::size_t size_ = 0;
};

} // namespace dqnpm
