#include "fdrsel/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using fdrsel::RngStream;

TEST(RngStream, SameSeedAndStreamGiveSameDraws)
{
    RngStream a(42, 7), b(42, 7);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, StreamsAndSubstreamsDiffer)
{
    RngStream a(42, 0), b(42, 1), c(42, 0, 1), d(43, 0);
    const auto x = a();
    EXPECT_NE(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(RngStream, DrawOrderAcrossStreamsIsIrrelevant)
{
    std::vector<double> forward, backward(8);
    for (int s = 0; s < 8; ++s) forward.push_back(RngStream(9, static_cast<std::uint64_t>(s)).normal());
    for (int s = 7; s >= 0; --s) backward[static_cast<std::size_t>(s)] = RngStream(9, static_cast<std::uint64_t>(s)).normal();
    EXPECT_EQ(forward, backward);
}

TEST(RngStream, UniformIsInOpenUnitInterval)
{
    RngStream r(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12.0 / n));
}

TEST(RngStream, NormalMoments)
{
    RngStream r(2);
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s4 / n, 3.0, 0.1);
}

TEST(RngStream, BelowCoversRange)
{
    RngStream r(3);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = r.below(7);
        ASSERT_LT(v, 7u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 7u);
}
