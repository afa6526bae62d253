#include "isoedf/ecm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace isoedf {
namespace {

TEST(BuildEcm, UnitDiagonalAndToeplitz)
{
    for (double zeta : {0.25, 0.5, 1.3}) {
        auto const m = build_ecm({3, zeta});
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_EQ(m(i, i), 1.0);
        }
    }
    auto const m = build_ecm({3, 0.5});
    EXPECT_NEAR(m(0, 1), test::j0_series_oracle(std::numbers::pi), 1e-12);
    EXPECT_NEAR(m(0, 1), -0.3042421776440939, 1e-12);

    auto const big = build_ecm({17, 0.37});
    for (std::size_t p = 0; p < 17; ++p) {
        for (std::size_t q = 0; q < 17; ++q) {
            EXPECT_EQ(big(p, q), big(0, p > q ? p - q : q - p));
        }
    }
}

TEST(BuildEcm, RejectsBadConfig)
{
    EXPECT_THROW(build_ecm({1, 0.5}), ContractError);
    EXPECT_THROW(build_ecm({4, 0.0}), ContractError);
    EXPECT_THROW(build_ecm({4, -0.5}), ContractError);
}

TEST(EnsembleSpectrum, ReferenceArrayValues)
{
    auto const t0 = std::chrono::steady_clock::now();
    auto const s = ensemble_spectrum({51, 0.5});
    double const ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    ASSERT_EQ(s.values.size(), 51u);
    EXPECT_NEAR(s.smallest(), 2.0 / std::numbers::pi, 1e-3);
    EXPECT_NEAR(s.values[0], 6.11, 0.01);
    EXPECT_NEAR(s.values[1], 2.74, 0.01);
    EXPECT_NEAR(s.values[2], 2.12, 0.01);
    EXPECT_LT(ms, 1000.0);
}

TEST(EnsembleSpectrum, TraceAndOrdering)
{
    for (std::size_t n : {2u, 10u, 51u, 100u}) {
        for (double zeta : {0.25, 0.5, 1.0}) {
            auto const s = ensemble_spectrum({n, zeta});
            EXPECT_TRUE(std::is_sorted(s.values.begin(), s.values.end(), std::greater<>()));
            double sum = 0.0;
            for (double v : s.values) {
                sum += v;
                EXPECT_GE(v, 0.0);
            }
            EXPECT_NEAR(sum, static_cast<double>(n), 1e-8 * n);
        }
    }
}

TEST(EnsembleSpectrum, PositiveSemidefiniteUpTo256)
{
    for (std::size_t n : {64u, 256u}) {
        for (double zeta : {0.25, 0.5, 1.0}) {
            auto const raw = sym_eigenvalues(build_ecm({n, zeta}));
            EXPECT_GE(raw.back(), -1e-10 * raw.front()) << "n = " << n << " zeta = " << zeta;
        }
    }
}

TEST(EnsembleSpectrum, BulkClustersNearSymbolMinimum)
{
    auto const s = ensemble_spectrum({51, 0.5});
    auto const inside = std::count_if(s.values.begin(), s.values.end(),
                                      [](double v) { return v >= 0.6 && v <= 1.6; });
    EXPECT_GE(static_cast<double>(inside), 0.8 * 51);
}

// CDF of F(w) = 2 / sqrt(pi^2 - w^2) for w uniform on (-pi, pi), the limiting
// eigenvalue distribution when alpha = pi.
double szego_limit_cdf(double y)
{
    double const lo = 2.0 / std::numbers::pi;
    if (y <= lo) {
        return 0.0;
    }
    return std::sqrt(std::numbers::pi * std::numbers::pi - 4.0 / (y * y)) / std::numbers::pi;
}

double kolmogorov_to_szego(std::size_t n)
{
    auto s = ensemble_spectrum({n, 0.5}).values;
    std::sort(s.begin(), s.end());
    double ks = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double const g = szego_limit_cdf(s[i]);
        ks = std::max({ks, std::abs(g - static_cast<double>(i) / n),
                       std::abs(g - static_cast<double>(i + 1) / n)});
    }
    return ks;
}

TEST(EnsembleSpectrum, ApproachesSzegoLimit)
{
    double const d64 = kolmogorov_to_szego(64);
    double const d256 = kolmogorov_to_szego(256);
    EXPECT_LT(d256, d64);
    EXPECT_LT(d256, 0.1);
}

TEST(SzegoDensity, ValuesAndDomain)
{
    ArrayNoiseConfig const half{51, 0.5};
    EXPECT_NEAR(szego_density(0.0, half), 2.0 / std::numbers::pi, 1e-15);
    EXPECT_NEAR(szego_density(0.0, half), 0.6366, 1e-4);
    ArrayNoiseConfig const other{8, 0.3};
    EXPECT_NEAR(szego_density(0.0, other), 2.0 / other.alpha(), 1e-15);

    double prev = 0.0;
    for (double frac : {0.0, 0.5, 0.9, 0.99, 0.9999}) {
        double const v = szego_density(frac * half.alpha(), half);
        EXPECT_GT(v, prev);
        prev = v;
    }
    EXPECT_THROW(szego_density(half.alpha(), half), DomainError);
    EXPECT_THROW(szego_density(-4.0, half), DomainError);
}

} // namespace
} // namespace isoedf
