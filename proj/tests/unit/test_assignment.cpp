#include "mt3/assignment/hungarian.hpp"
#include "mt3/assignment/murty.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace mt3::assignment;

namespace {

CostMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c) {
    std::uniform_real_distribution<double> u(0.0, 10.0);
    CostMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = u(rng);
    return m;
}

double brute_force_min(const CostMatrix& c) {
    double best = std::numeric_limits<double>::infinity();
    mt3::test::for_each_injection(c.rows(), c.cols(), [&](const std::vector<int>& a) {
        bool ok = true;
        double s = 0.0;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (c.forbidden(r, a[r])) ok = false;
            s += c(r, a[r]);
        }
        if (ok) best = std::min(best, s);
    });
    return best;
}

std::vector<double> sorted_costs(const CostMatrix& c) {
    std::vector<double> all;
    mt3::test::for_each_injection(c.rows(), c.cols(), [&](const std::vector<int>& a) {
        double s = 0.0;
        bool ok = true;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (c.forbidden(r, a[r])) ok = false;
            s += c(r, a[r]);
        }
        if (ok) all.push_back(s);
    });
    std::sort(all.begin(), all.end());
    return all;
}

}  // namespace

TEST(Hungarian, TwoByTwo) {
    const CostMatrix c{{1, 2}, {2, 1}};
    const auto a = hungarian(c);
    EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1}));
    EXPECT_DOUBLE_EQ(a.cost, 2.0);
}

TEST(Hungarian, ZeroDiagonal) {
    CostMatrix c(4, 4, 1.0);
    for (std::size_t i = 0; i < 4; ++i) c(i, i) = 0.0;
    const auto a = hungarian(c);
    EXPECT_EQ(a.row_to_col, (std::vector<int>{0, 1, 2, 3}));
    EXPECT_EQ(a.cost, 0.0);
}

TEST(Hungarian, MatchesBruteForceOnRandomSquareAndRectangular) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t r = 1 + rng() % 6;
        const std::size_t c = r + rng() % 3;
        const auto m = random_matrix(rng, r, c);
        EXPECT_EQ(hungarian(m).cost, brute_force_min(m));
    }
}

TEST(Hungarian, TallMatrixMatchesEveryColumn) {
    std::mt19937_64 rng(11);
    const auto m = random_matrix(rng, 5, 3);
    const auto a = hungarian(m);
    EXPECT_EQ(std::count(a.row_to_col.begin(), a.row_to_col.end(), -1), 2);
    EXPECT_EQ(a.cost, brute_force_min(m.transposed()));
}

TEST(Hungarian, RespectsForbiddenEntries) {
    CostMatrix c{{0, 5}, {0, 5}};
    c.forbid(0, 0);
    const auto a = hungarian(c);
    EXPECT_EQ(a.row_to_col, (std::vector<int>{1, 0}));
    EXPECT_EQ(a.cost, 5.0);
}

TEST(Hungarian, InfeasibleRowThrows) {
    CostMatrix c{{1, 2}, {3, 4}};
    c.forbid(1, 0);
    c.forbid(1, 1);
    EXPECT_THROW(hungarian(c), InfeasibleError);
}

TEST(Hungarian, InvariantToRowAndColumnShifts) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        auto m = random_matrix(rng, n, n);
        const auto base = hungarian(m);
        const std::size_t row = rng() % n;
        const double shift = 3.25;
        for (std::size_t j = 0; j < n; ++j) m(row, j) += shift;
        const auto shifted = hungarian(m);
        EXPECT_EQ(shifted.row_to_col, base.row_to_col);
        EXPECT_NEAR(shifted.cost, base.cost + shift, 1e-9);
    }
}

TEST(Murty, KOneEqualsHungarian) {
    std::mt19937_64 rng(5);
    const auto m = random_matrix(rng, 4, 4);
    const auto k = murty_kbest(m, 1);
    ASSERT_EQ(k.size(), 1u);
    EXPECT_EQ(k[0], hungarian(m));
}

TEST(Murty, TwoByTwoGivesBothPermutations) {
    const CostMatrix c{{1, 2}, {2, 1}};
    const auto k = murty_kbest(c, 2);
    ASSERT_EQ(k.size(), 2u);
    EXPECT_EQ(k[0].cost, 2.0);
    EXPECT_EQ(k[1].cost, 4.0);
}

TEST(Murty, MatchesSortedEnumeration) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t r = 1 + rng() % 5;
        const std::size_t c = r + rng() % 2;
        const std::size_t k = 1 + rng() % 10;
        const auto m = random_matrix(rng, r, c);
        const auto expected = sorted_costs(m);
        const auto got = murty_kbest(m, k);
        ASSERT_EQ(got.size(), std::min(k, expected.size()));
        for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i].cost, expected[i]);
    }
}

TEST(Murty, ReturnsDistinctValidAssignmentsInOrder) {
    std::mt19937_64 rng(17);
    auto m = random_matrix(rng, 4, 7);
    m.forbid(0, 0);
    m.forbid(2, 3);
    const auto got = murty_kbest(m, 50);
    ASSERT_EQ(got.size(), 50u);
    for (std::size_t i = 0; i < got.size(); ++i) {
        std::vector<int> cols = got[i].row_to_col;
        std::sort(cols.begin(), cols.end());
        EXPECT_EQ(std::adjacent_find(cols.begin(), cols.end()), cols.end());
        for (std::size_t r = 0; r < 4; ++r) EXPECT_FALSE(m.forbidden(r, got[i].row_to_col[r]));
        if (i > 0) {
            EXPECT_LE(got[i - 1].cost, got[i].cost);
        }
        for (std::size_t j = 0; j < i; ++j) EXPECT_NE(got[i].row_to_col, got[j].row_to_col);
    }
}

TEST(Murty, ExhaustsSmallProblems) {
    const CostMatrix c{{1, 2}, {2, 1}};
    EXPECT_EQ(murty_kbest(c, 10).size(), 2u);
}
