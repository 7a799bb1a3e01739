#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dqnpm/replay.hpp"

using namespace dqnpm;

namespace {

Transition tagged(std::size_t action) {
    Transition t;
    t.action = action;
    return t;
}

PrioritizedReplay filled(const std::vector<double>& priorities) {
    PrioritizedReplay buf(priorities.size());
    for (std::size_t i = 0; i < priorities.size(); ++i) buf.push(tagged(i), priorities[i]);
    return buf;
}

void expect_sums_consistent(const SumTree& tree) {
    const auto nodes = tree.nodes();
    for (std::size_t k = 0; k + 1 < tree.capacity(); ++k)
        EXPECT_NEAR(nodes[k], nodes[2 * k + 1] + nodes[2 * k + 2], 1e-9);
}

} // namespace

TEST(SumTree, CapacityRoundsToPowerOfTwo) {
    EXPECT_EQ(SumTree(5).capacity(), 8u);
    EXPECT_EQ(SumTree(8).capacity(), 8u);
    EXPECT_EQ(SumTree(1).capacity(), 1u);
    EXPECT_EQ(SumTree(5).nodes().size(), 15u);
}

TEST(Push, RootTracksLeaves) {
    PrioritizedReplay one(4);
    one.push(tagged(0), 3);
    EXPECT_EQ(one.tree().total(), 3);

    auto buf = filled({1, 2, 3, 4});
    EXPECT_EQ(buf.tree().total(), 10);
    EXPECT_EQ(buf.push(tagged(9), 5), 0u);
    EXPECT_EQ(buf.tree().total(), 14);
    EXPECT_EQ(buf.at(0).action, 9u);
    EXPECT_EQ(buf.size(), 4u);
}

TEST(Push, NegativePriorityRejected) {
    PrioritizedReplay buf(4);
    try {
        buf.push(tagged(0), -1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::parameter);
    }
}

TEST(Push, DefaultsToMaxPriority) {
    PrioritizedReplay buf(4);
    buf.push(tagged(0));
    EXPECT_EQ(buf.tree().leaf(0), 1.0);
    buf.push(tagged(1), 7.5);
    buf.push(tagged(2));
    EXPECT_EQ(buf.tree().leaf(2), 7.5);
}

TEST(TreeSearch, HandTraces) {
    const auto buf = filled({1, 2, 3, 4});
    EXPECT_EQ(buf.tree().search(0.5), 0u);
    EXPECT_EQ(buf.tree().search(2.5), 1u);
    EXPECT_EQ(buf.tree().search(9.99), 3u);
    EXPECT_EQ(buf.tree().search(10.0), 3u);
    EXPECT_THROW(buf.tree().search(10.01), Error);
    EXPECT_THROW(buf.tree().search(-0.1), Error);
}

TEST(TreeSearch, PreimageIsCumulativeIntervals) {
    const std::vector<double> p{0.25, 1.5, 0.75, 2.0, 0.5, 3.25, 1.0, 0.75};  // dyadic, exact sums
    const auto buf = filled(p);
    double lo = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double hi = lo + p[i];
        EXPECT_EQ(buf.tree().search(lo), i);
        EXPECT_EQ(buf.tree().search(std::nextafter(hi, 0.0)), i);
        if (i + 1 < p.size()) {
            EXPECT_EQ(buf.tree().search(hi), i + 1);
        }
        lo = hi;
    }
}

TEST(TreeSearch, EndOfMassSkipsEmptyLeaves) {
    PrioritizedReplay buf(8);
    buf.push(tagged(0), 1);
    buf.push(tagged(1), 2);
    buf.push(tagged(2), 3);
    EXPECT_EQ(buf.tree().search(6.0), 2u);
}

TEST(Sample, EqualPrioritiesGiveUnitWeights) {
    auto buf = filled({2, 2, 2, 2, 2, 2, 2, 2});
    Rng rng(1);
    const auto batch = buf.sample(4, 0.4, rng);
    ASSERT_EQ(batch.size(), 4u);
    for (double w : batch.weights) EXPECT_EQ(w, 1.0);
    // One draw per quarter of the mass: two leaves per segment.
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(batch.indices[i] / 2, i);
}

TEST(Sample, ImportanceWeights) {
    auto buf = filled({1, 4});
    Rng rng(2);
    bool saw_heavy = false;
    for (int rep = 0; rep < 20; ++rep) {
        const auto batch = buf.sample(2, 0.4, rng);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            if (batch.priorities[i] == 4.0) {
                saw_heavy = true;
                EXPECT_NEAR(batch.weights[i], 0.574349, 1e-6);
                EXPECT_NEAR(batch.weights[i], std::pow(4.0, -0.4), 1e-15);
            } else {
                EXPECT_EQ(batch.weights[i], 1.0);
            }
        }
    }
    EXPECT_TRUE(saw_heavy);

    auto two = filled({1, 2});
    for (int rep = 0; rep < 10; ++rep) {
        const auto b = two.sample(2, 1.0, rng);
        for (std::size_t i = 0; i < b.size(); ++i)
            EXPECT_EQ(b.weights[i], b.priorities[i] == 2.0 ? 0.5 : 1.0);
    }
}

TEST(Sample, Errors) {
    Rng rng(0);
    PrioritizedReplay buf(8);
    buf.push(tagged(0), 1);
    try {
        buf.sample(2, 0.4, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::underfull);
    }
    PrioritizedReplay zero(2);
    zero.push(tagged(0), 0);
    zero.push(tagged(1), 0);
    try {
        zero.sample(1, 0.4, rng);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    }
}

TEST(Sample, WeightsBoundedByOne) {
    Rng rng(7);
    PrioritizedReplay buf(64);
    for (int i = 0; i < 64; ++i) buf.push(tagged(i), 0.01 + rng.uniform01() * 5);
    for (int rep = 0; rep < 50; ++rep) {
        const auto b = buf.sample(16, 0.6, rng);
        for (std::size_t i = 0; i < b.size(); ++i) {
            EXPECT_GT(b.weights[i], 0.0);
            EXPECT_LE(b.weights[i], 1.0);
            if (b.priorities[i] == buf.min_priority()) EXPECT_EQ(b.weights[i], 1.0);
            else EXPECT_LT(b.weights[i], 1.0);
        }
    }
}

TEST(UpdatePriorities, Values) {
    auto buf = filled({1, 2, 3, 4});
    const std::vector<std::size_t> idx{0};
    buf.update_priorities(idx, std::vector<double>{5.0 - priority_floor});
    EXPECT_NEAR(buf.tree().total(), 14, 1e-12);
    buf.update_priorities(idx, std::vector<double>{0.0});
    EXPECT_EQ(buf.tree().leaf(0), priority_floor);
    buf.update_priorities(idx, std::vector<double>{-2.0});
    EXPECT_EQ(buf.tree().leaf(0), 2.0 + priority_floor);
    EXPECT_THROW(buf.update_priorities(std::vector<std::size_t>{4}, std::vector<double>{1.0}), Error);
}

TEST(UpdatePriorities, RootInvariantUnderRandomInterleaving) {
    Rng rng(123);
    PrioritizedReplay buf(100);
    for (int op = 0; op < 5000; ++op) {
        if (buf.size() < 2 || rng.uniform01() < 0.5) {
            buf.push(tagged(op), rng.uniform(0, 10));
        } else {
            const std::vector<std::size_t> idx{rng.index(buf.size())};
            buf.update_priorities(idx, std::vector<double>{rng.uniform(-3, 3)});
        }
    }
    double leaves = 0;
    for (std::size_t j = 0; j < buf.capacity(); ++j) leaves += buf.tree().leaf(j);
    EXPECT_NEAR(buf.tree().total(), leaves, 1e-9);
    expect_sums_consistent(buf.tree());
}

TEST(SumTree, DumpListsLeaves) {
    const auto d = filled({1, 2, 3}).tree().dump();
    ASSERT_EQ(d.size(), 4u);
    EXPECT_EQ(d[2], (std::pair<std::size_t, double>{2, 3.0}));
    EXPECT_EQ(d[3].second, 0.0);
}
