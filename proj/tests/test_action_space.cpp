#include <gtest/gtest.h>

#include <set>

#include "dqnpm/action_space.hpp"
#include "oracles.hpp"

using namespace dqnpm;

TEST(EnumerateActions, OneAssetTwoDivisions) {
    const auto t = enumerate_actions(1, 2);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.lookup(0), WeightVector({1.0, 0.0}));
    EXPECT_EQ(t.lookup(1), WeightVector({0.5, 0.5}));
    EXPECT_EQ(t.lookup(2), WeightVector({0.0, 1.0}));
}

TEST(EnumerateActions, Counts) {
    EXPECT_EQ(enumerate_actions(2, 2).size(), 6u);
    EXPECT_EQ(enumerate_actions(5, 10).size(), 3003u);
    EXPECT_EQ(enumerate_actions(5, 4).size(), 126u);
}

TEST(EnumerateActions, LeadingRowsFollowTableOrder) {
    // (N/N, 0, ...), ((N-1)/N, 1/N, 0, ...), ((N-1)/N, 0, 1/N, ...), ...
    const auto t = enumerate_actions(4, 5);
    EXPECT_EQ(t.units(0), (std::vector<int>{5, 0, 0, 0, 0}));
    for (std::size_t j = 1; j <= 4; ++j) {
        std::vector<int> expect{4, 0, 0, 0, 0};
        expect[j] = 1;
        EXPECT_EQ(t.units(j), expect);
    }
    EXPECT_EQ(t.units(t.size() - 1), (std::vector<int>{0, 0, 0, 0, 5}));
}

TEST(EnumerateActions, MatchesBruteForceAsSet) {
    for (int m = 1; m <= 5; ++m)
        for (int n = 1; n <= 8; ++n) {
            if (oracle::binomial(m + n, m) > 5000) continue;
            const auto t = enumerate_actions(m, n);
            std::set<std::vector<int>> got;
            for (std::size_t i = 0; i < t.size(); ++i) got.insert(t.units(i));
            EXPECT_EQ(got.size(), t.size()) << "duplicates at M=" << m << " N=" << n;
            EXPECT_EQ(got, oracle::compositions(n, m + 1)) << "M=" << m << " N=" << n;
        }
}

TEST(EnumerateActions, WeightsAreExactMultiples) {
    const auto t = enumerate_actions(3, 7);
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& u = t.units(i);
        EXPECT_EQ(std::accumulate(u.begin(), u.end(), 0), 7);
        double sum = 0;
        for (std::size_t j = 0; j < u.size(); ++j) {
            EXPECT_EQ(t.weights(i)[j], u[j] / 7.0);
            EXPECT_GE(t.weights(i)[j], 0.0);
            sum += t.weights(i)[j];
        }
        EXPECT_NEAR(sum, 1.0, 1e-12);
    }
}

TEST(EnumerateActions, Deterministic) {
    const auto a = enumerate_actions(3, 4);
    const auto b = enumerate_actions(3, 4);
    EXPECT_EQ(a.to_csv(), b.to_csv());
}

TEST(EnumerateActions, CapExceeded) {
    try {
        enumerate_actions(5, 20);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::size);
        EXPECT_NE(std::string(e.what()).find("53130"), std::string::npos) << e.what();
    }
}

TEST(ActionCount, Values) {
    EXPECT_EQ(action_count(1, 1), 2u);
    EXPECT_EQ(action_count(1, 2), 3u);
    EXPECT_EQ(action_count(5, 4), 126u);
    for (int m = 1; m <= 10; ++m)
        for (int n = 1; n <= 10; ++n) EXPECT_EQ(action_count(m, n), oracle::binomial(m + n, m));
}

TEST(ActionCount, Overflow) {
    EXPECT_THROW(action_count(60, 1000), Error);
}

TEST(Lookup, Bounds) {
    const auto t = enumerate_actions(2, 3);
    EXPECT_EQ(t.lookup(0), WeightVector::all_cash(2));
    EXPECT_EQ(t.lookup(t.size() - 1), WeightVector({0.0, 0.0, 1.0}));
    try {
        t.lookup(t.size());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::index);
    }
}

TEST(ActionTable, CsvLayout) {
    EXPECT_EQ(enumerate_actions(1, 2).to_csv(), "index,w0,w1\n0,1,0\n1,0.5,0.5\n2,0,1\n");
}
