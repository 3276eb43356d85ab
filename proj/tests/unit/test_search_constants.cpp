#include "mrekit/search_constants.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mrekit;
namespace oracle = mrekit::test_support::oracle;

namespace {

TEST(BernoulliKl, Examples) {
    EXPECT_EQ(bernoulli_kl(0.3, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(bernoulli_kl(1.0, 0.5), std::log(2.0));
    EXPECT_NEAR(bernoulli_kl(0.9, 0.5), 0.9 * std::log(1.8) + 0.1 * std::log(0.2), 1e-15);
    EXPECT_DOUBLE_EQ(bernoulli_kl(0.0, 0.25), std::log(1.0 / 0.75));
}

TEST(BernoulliKl, DomainErrors) {
    EXPECT_THROW((void)bernoulli_kl(0.5, 0.0), DomainError);
    EXPECT_THROW((void)bernoulli_kl(0.5, 1.0), DomainError);
    EXPECT_THROW((void)bernoulli_kl(-0.1, 0.5), DomainError);
    EXPECT_THROW((void)bernoulli_kl(1.1, 0.5), DomainError);
}

TEST(BernoulliKl, IncreasingAwayFromP) {
    for (double p : {0.2, 0.5, 0.75, 0.95}) {
        double prev = bernoulli_kl(p, p);
        for (int s = 1; s < 2000; ++s) {
            const double a = p + (1.0 - p) * s / 2000.0;
            const double k = bernoulli_kl(a, p);
            EXPECT_GT(k, prev) << "p=" << p << " alpha=" << a;
            prev = k;
        }
    }
}

TEST(GFunction, Examples) {
    EXPECT_EQ(g_function(0.4, 0.4), 1.0);
    EXPECT_NEAR(g_function(1.0 - 1e-12, 0.7), 0.7, 1e-10);
    EXPECT_THROW((void)g_function(0.0, 0.5), DomainError);
    EXPECT_THROW((void)g_function(1.0, 0.5), DomainError);
}

TEST(GFunction, LogIsNegativeDivergence) {
    for (int i = 1; i < 50; ++i) {
        for (int j = 1; j < 50; ++j) {
            const double a = i / 50.0;
            const double p = j / 50.0;
            EXPECT_NEAR(std::log(g_function(a, p)), -bernoulli_kl(a, p), 1e-12);
            EXPECT_NEAR(g_function(a, p), oracle::g_powers(a, p), 1e-12);
        }
    }
}

TEST(AlphaStar, MatchesIndependentBisection) {
    // Frozen from oracle::alpha_star_bisect(0.75) at 1e-12 bracket width.
    const auto sc = alpha_star(0.75);
    EXPECT_NEAR(sc.alpha_star, 0.18928962491520451, 1e-11);
    EXPECT_GT(sc.alpha_star, 0.0);
    EXPECT_LT(sc.alpha_star, 0.75);
    EXPECT_NEAR(sc.divergence_at_root, std::numbers::ln2, 1e-10);
    EXPECT_NEAR(g_function(sc.alpha_star, 0.75), 0.5, 1e-10);
}

TEST(AlphaStar, TendsToZeroNearOneHalf) {
    EXPECT_LT(alpha_star(0.5 + 1e-6).alpha_star, 1e-3);
    EXPECT_NEAR(alpha_star(0.51).alpha_star, oracle::alpha_star_bisect(0.51), 1e-11);
}

TEST(AlphaStar, RootCertification) {
    for (int i = 0; i < 100; ++i) {
        const double p = 0.501 + (0.998 - 0.501) * i / 99.0;
        const auto sc = alpha_star(p);
        EXPECT_NEAR(g_function(sc.alpha_star, p), 0.5, 1e-10) << p;
        EXPECT_NEAR(sc.divergence_at_root, std::numbers::ln2, 1e-10) << p;
        EXPECT_EQ(alpha_star(p).alpha_star, sc.alpha_star);
    }
}

TEST(AlphaStar, DomainErrors) {
    EXPECT_THROW((void)alpha_star(0.5), DomainError);
    EXPECT_THROW((void)alpha_star(0.4), DomainError);
    EXPECT_THROW((void)alpha_star(1.0), DomainError);
}

} // namespace
