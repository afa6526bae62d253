#include "isoedf/rmt.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace isoedf {
namespace {

FmcProblem unit_mp(double c) { return {{{{1.0, 1.0}}, MeasureKind::full}, c}; }

FmcProblem random_problem(std::mt19937_64& rng, double max_location = 10.0)
{
    std::uniform_int_distribution<int> atoms(1, 8);
    std::uniform_real_distribution<double> loc(0.01 * max_location, max_location);
    std::uniform_real_distribution<double> wt(0.05, 1.0);
    std::uniform_real_distribution<double> cd(0.1, 2.0);
    AtomicMeasure m;
    int const k = atoms(rng);
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        m.atoms.push_back({loc(rng), wt(rng)});
        total += m.atoms.back().weight;
    }
    for (auto& a : m.atoms) {
        a.weight /= total;
    }
    m.canonicalize();
    return {m, cd(rng)};
}

TEST(BuildPolynomial, SingleAtomIsMarcenkoPasturQuadratic)
{
    double const c = 0.3;
    cdouble const z(1.7, 0.4);
    auto const coeffs = build_polynomial(unit_mp(c)).coefficients(z);
    ASSERT_EQ(coeffs.size(), 3u);
    EXPECT_NEAR(std::abs(coeffs[0] - 1.0), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(coeffs[1] + (1.0 - c - z)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(coeffs[2] - c * z), 0.0, 1e-15);
}

TEST(BuildPolynomial, TwoAtomExpansion)
{
    // Frozen from a symbolic expansion of the cleared equation at z = 2 + i.
    FmcProblem const p{{{{1.0, 0.5}, {4.0, 0.5}}, MeasureKind::full}, 0.5};
    auto const coeffs = build_polynomial(p).coefficients(cdouble(2.0, 1.0));
    std::vector<cdouble> const expected{{-0.75, -1.0}, {-1.5, -2.75}, {-3.5, -8.0}, {-3.0, -4.0}};
    ASSERT_EQ(coeffs.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_NEAR(std::abs(coeffs[i] - expected[i]), 0.0, 1e-13) << "coefficient " << i;
    }
}

TEST(BuildPolynomial, DegreeIsAtomCountPlusOne)
{
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        auto const p = random_problem(rng);
        auto const poly = build_polynomial(p);
        EXPECT_EQ(poly.degree(), p.measure.size() + 1);
        EXPECT_EQ(poly.coefficients(cdouble(1.0, 1.0)).size(), p.measure.size() + 2);
    }
    auto const five = reduce(classify(ensemble_spectrum({51, 0.5}), 0.5), 51);
    EXPECT_EQ(build_polynomial({five, 0.5}).degree(), 6u);
}

TEST(StieltjesAt, FarField)
{
    auto const p = unit_mp(0.25);
    cdouble const z(3e5, 1e6);
    cdouble const m = stieltjes_at(p, z);
    EXPECT_LE(std::abs(m + 1.0 / z), 1e-5 * std::abs(1.0 / z));
}

TEST(StieltjesAt, MatchesMarcenkoPasturQuadratic)
{
    auto const p = unit_mp(0.25);
    cdouble const z(1.0, 1e-6);
    cdouble const m = stieltjes_at(p, z);
    cdouble const oracle = test::mp_stieltjes_quadratic(z, 0.25);
    EXPECT_NEAR(std::abs(m - oracle), 0.0, 1e-9);
    EXPECT_NEAR(m.imag() / std::numbers::pi, 0.6164044440615, 1e-5);
}

TEST(StieltjesAt, DefiningEquationResidual)
{
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 30; ++trial) {
        auto const p = random_problem(rng);
        cdouble const z(std::uniform_real_distribution<double>(0.05, 20.0)(rng), 0.01);
        cdouble const m = stieltjes_at(p, z);
        EXPECT_LE(detail::residual(p, z, m), 1e-10);
    }
}

TEST(StieltjesAt, WarmStartDoesNotChangeTheBranch)
{
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        auto const p = random_problem(rng);
        cdouble const z(std::uniform_real_distribution<double>(0.05, 20.0)(rng), 1e-4);
        cdouble const cold = stieltjes_at(p, z);
        cdouble const warm = stieltjes_at(p, z, cold + cdouble(1e-3, -1e-3));
        EXPECT_LE(std::abs(cold - warm), 1e-9 * std::max(1.0, std::abs(cold)));
    }
}

TEST(StieltjesAt, SolutionIsARootOfThePolynomial)
{
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto const p = random_problem(rng);
        cdouble const z(std::uniform_real_distribution<double>(0.1, 10.0)(rng), 0.05);
        cdouble const m = stieltjes_at(p, z);
        Polynomial const poly(build_polynomial(p).coefficients(z));
        double scale = 0.0;
        double mag = 1.0;
        for (cdouble c : poly.coeffs()) {
            scale += std::abs(c) * mag;
            mag *= std::abs(m);
        }
        EXPECT_LE(std::abs(poly(m)), 1e-10 * scale);
    }
}

TEST(StieltjesAt, HerglotzPositivity)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> re(-5.0, 30.0);
    std::uniform_real_distribution<double> lg(-6.0, 2.0);
    for (int trial = 0; trial < 40; ++trial) {
        auto const p = random_problem(rng);
        for (int k = 0; k < 10; ++k) {
            cdouble const z(re(rng), std::pow(10.0, lg(rng)));
            EXPECT_GT(stieltjes_at(p, z).imag(), 0.0);
        }
    }
}

// z m + 1 = -mu1 / z + O(z^-2), so the 1e-4 bound at |z| = 1e4 needs a
// population mean below 1; atoms are drawn from (0, 1].
TEST(StieltjesAt, FarFieldAsymptote)
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ang(0.05, std::numbers::pi - 0.05);
    for (int trial = 0; trial < 40; ++trial) {
        auto const p = random_problem(rng, 1.0);
        for (double radius : {1e4, 1e5, 1e7}) {
            cdouble const z = std::polar(radius, ang(rng));
            EXPECT_LE(std::abs(z * stieltjes_at(p, z) + 1.0), 1e-4);
        }
    }
}

// Second order: z (z m + 1) -> -mu1 with remainder mu2 / z, where
// mu2 = E t^2 + c (E t)^2 for the limiting SCM law.
TEST(StieltjesAt, FarFieldFirstMoment)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(0.05, std::numbers::pi - 0.05);
    for (int trial = 0; trial < 40; ++trial) {
        auto const p = random_problem(rng);
        double const mu1 = p.measure.mean();
        double t2 = 0.0;
        for (auto const& a : p.measure.atoms) {
            t2 += a.weight * a.location * a.location;
        }
        double const mu2 = t2 + p.c * mu1 * mu1;
        for (double radius : {1e4, 1e5}) {
            cdouble const z = std::polar(radius, ang(rng));
            cdouble const m = stieltjes_at(p, z);
            EXPECT_LE(std::abs(z * (z * m + 1.0) + mu1), 2.0 * mu2 / radius) << "trial " << trial;
        }
    }
}

TEST(StieltjesAt, RejectsLowerHalfPlane)
{
    EXPECT_THROW(stieltjes_at(unit_mp(0.5), cdouble(1.0, 0.0)), DomainError);
    EXPECT_THROW(stieltjes_at(unit_mp(0.5), cdouble(1.0, -1.0)), DomainError);
}

TEST(DensityCurve, ReproducesMarcenkoPastur)
{
    for (double c : {0.1, 0.25, 0.5, 1.5}) {
        auto const p = unit_mp(c);
        auto const grid = default_grid(p, 4000);
        auto const d = density_curve(p, grid, 1e-6);
        MpParams const mp{c, 1.0};
        for (std::size_t j = 0; j < grid.size(); ++j) {
            double const x = grid[j];
            if (std::abs(x - mp.lower_edge()) < 0.05 || std::abs(x - mp.upper_edge()) < 0.05) {
                continue;
            }
            ASSERT_NEAR(d.values[j], test::mp_closed_form(x, c), 2e-3) << "c = " << c << " x = " << x;
        }
        EXPECT_NEAR(d.zero_mass, zero_atom_mass(c), 1e-15);
        EXPECT_NEAR(d.total_mass(), 1.0, 5e-3);
    }
}

TEST(DensityCurve, MassAndFirstMomentOnRandomProblems)
{
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        auto const p = random_problem(rng);
        auto const d = density_curve(p, default_grid(p, 4000), 1e-6);
        EXPECT_NEAR(d.total_mass(), 1.0, 5e-3) << "trial " << trial << " c = " << p.c;
        EXPECT_NEAR(d.first_moment(), p.measure.mean(), 0.01 * p.measure.mean())
            << "trial " << trial << " c = " << p.c;
        for (double v : d.values) {
            EXPECT_GE(v, 0.0);
        }
    }
}

TEST(DensityCurve, ReferenceConfigurationsConserveMass)
{
    auto const s = ensemble_spectrum({51, 0.5});
    for (double c : {0.25, 0.5, 1.0, 1.5}) {
        for (auto mode : {MeasureKind::reduced, MeasureKind::full}) {
            FmcProblem const p{population_measure(s, c, mode), c};
            auto const d = density_curve(p, default_grid(p, 4000), 1e-6);
            EXPECT_NEAR(d.total_mass(), 1.0, 5e-3) << "c = " << c;
            EXPECT_NEAR(d.first_moment(), p.measure.mean(), 0.01 * p.measure.mean()) << "c = " << c;
        }
    }
}

TEST(DensityCurve, GridRefinementStability)
{
    auto const s = ensemble_spectrum({51, 0.5});
    for (double c : {0.25, 1.0, 1.5}) {
        FmcProblem const p{population_measure(s, c, MeasureKind::reduced), c};
        auto const coarse = density_curve(p, default_grid(p, 2000), 1e-6);
        auto const fine = density_curve(p, default_grid(p, 4000), 5e-7);
        EXPECT_LT(std::abs(coarse.total_mass() - fine.total_mass()), 2e-3) << "c = " << c;
    }
}

TEST(DensityCurve, IndependentOfWorkerCount)
{
    auto const s = ensemble_spectrum({51, 0.5});
    FmcProblem const p{full_measure(s), 0.5};
    auto const grid = default_grid(p, 3000);
    auto const one = density_curve(p, grid, 1e-6, 1);
    auto const many = density_curve(p, grid, 1e-6, 4);
    ASSERT_EQ(one.values.size(), many.values.size());
    for (std::size_t j = 0; j < one.values.size(); ++j) {
        EXPECT_NEAR(one.values[j], many.values[j], 1e-12);
    }
}

TEST(DensityCurve, ReferenceCaseHasDetachedTopSpike)
{
    auto const pred = predict_edf({51, 0.5}, 0.25, MeasureKind::reduced);
    auto const& d = pred.density;
    auto mass_between = [&](double a, double b) {
        double s = 0.0;
        for (std::size_t j = 1; j < d.grid.size(); ++j) {
            if (d.grid[j - 1] >= a && d.grid[j] <= b) {
                s += 0.5 * (d.values[j] + d.values[j - 1]) * (d.grid[j] - d.grid[j - 1]);
            }
        }
        return s;
    };
    // Gap between the 2.74 spike band and the 6.11 spike band, then a bump
    // carrying the single atom's mass 1/51.
    EXPECT_LT(mass_between(4.3, 4.6), 1e-6);
    EXPECT_NEAR(mass_between(4.6, 13.7), 1.0 / 51.0, 1e-3);
    auto const peak = std::max_element(d.values.begin(), d.values.end());
    double const x_peak = d.grid[static_cast<std::size_t>(peak - d.values.begin())];
    // Bulk sits inside the MP support scaled by gamma_N.
    EXPECT_GT(x_peak, 0.64 * 0.25);
    EXPECT_LT(x_peak, 0.64 * 2.25);
    double top_peak_x = 0.0;
    double top_peak = 0.0;
    for (std::size_t j = 0; j < d.grid.size(); ++j) {
        if (d.grid[j] > 4.6 && d.values[j] > top_peak) {
            top_peak = d.values[j];
            top_peak_x = d.grid[j];
        }
    }
    EXPECT_NEAR(top_peak_x, 6.1 * (1.0 + 0.25 * 0.6367 / (6.11 - 0.6367)), 0.6);
}

TEST(DensityCurve, Errors)
{
    auto const p = unit_mp(1.5);
    std::vector<double> const bad_order{1.0, 0.5};
    std::vector<double> const has_zero{0.0, 0.5};
    std::vector<double> const ok{0.5, 1.0};
    EXPECT_THROW(density_curve(p, bad_order, 1e-6), ContractError);
    EXPECT_THROW(density_curve(p, has_zero, 1e-6), ContractError);
    EXPECT_THROW(density_curve(p, ok, 0.0), ContractError);
    FmcProblem bad{{{{1.0, 0.6}}, MeasureKind::full}, 0.5};
    EXPECT_THROW(density_curve(bad, ok, 1e-6), ContractError);
}

TEST(DefaultGrid, Coverage)
{
    auto const g = default_grid(unit_mp(0.25), 64);
    ASSERT_EQ(g.size(), 64u);
    EXPECT_LE(g.front(), 0.125 + 1e-15);
    EXPECT_GE(g.back(), 2.8125 - 1e-12);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));

    auto const g15 = default_grid(unit_mp(1.5), 4000);
    EXPECT_EQ(g15.front(), 1e-4);
    EXPECT_EQ(g15.size(), 4000u);
    EXPECT_TRUE(std::adjacent_find(g15.begin(), g15.end(), std::greater_equal<>()) == g15.end());

    auto const s = ensemble_spectrum({51, 0.5});
    FmcProblem const reference{population_measure(s, 0.25, MeasureKind::reduced), 0.25};
    EXPECT_GE(default_grid(reference, 4000).back(), 6.11 * 2.25);

    EXPECT_THROW(default_grid(unit_mp(0.5), 15), ContractError);
}

TEST(PredictEdf, AtomCountsAndZeroMass)
{
    ArrayNoiseConfig const cfg{51, 0.5};
    EXPECT_EQ(predict_edf(cfg, 0.5, MeasureKind::reduced).atom_count(), 5u);
    EXPECT_EQ(predict_edf(cfg, 0.25, MeasureKind::reduced).atom_count(), 7u);
    EXPECT_EQ(predict_edf(cfg, 0.25, MeasureKind::full).atom_count(), 51u);
    for (auto mode : {MeasureKind::reduced, MeasureKind::full}) {
        auto const pred = predict_edf(cfg, 1.5, mode);
        EXPECT_NEAR(pred.density.zero_mass, 1.0 / 3.0, 1e-15);
        EXPECT_GE(pred.wall_ms, pred.curve_ms);
    }
}

} // namespace
} // namespace isoedf
