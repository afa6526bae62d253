#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "isoedf/ecm.hpp"
#include "isoedf/error.hpp"
#include "isoedf/linalg.hpp"
#include "isoedf/parallel.hpp"
#include "isoedf/specfun.hpp"
#include "isoedf/spike.hpp"

namespace isoedf {

/// Population spectrum H and aspect ratio c = N/L. The limiting spectrum of
/// Sigma^{1/2} W(c) Sigma^{1/2} is the free multiplicative convolution of H
/// with the Marcenko-Pastur law of ratio c.
struct FmcProblem {
    AtomicMeasure measure;
    double c = 1.0;

    void validate() const
    {
        measure.validate();
        if (!std::isfinite(c) || c <= 0.0) {
            throw ContractError("FmcProblem: aspect ratio must be positive and finite");
        }
    }
};

/// The self-consistency equation
///     m = sum_i w_i / (t_i (1 - c - c z m) - z)
/// cleared of denominators, as a polynomial in m whose coefficients depend on z:
///     P(m; z) = sum_i w_i prod_{j != i} d_j(m) - m prod_i d_i(m),
///     d_i(m) = t_i (1 - c) - z - t_i c z m.
/// For the unit single-atom measure this is c z m^2 - (1 - c - z) m + 1.
class StieltjesPolynomial {
  public:
    explicit StieltjesPolynomial(FmcProblem problem) : p_(std::move(problem)) { p_.validate(); }

    [[nodiscard]] std::size_t degree() const noexcept { return p_.measure.size() + 1; }

    /// Coefficients in ascending powers of m; degree() + 1 entries.
    [[nodiscard]] std::vector<cdouble> coefficients(cdouble z) const
    {
        auto const& atoms = p_.measure.atoms;
        std::size_t const k = atoms.size();
        double const c = p_.c;

        auto mul_linear = [](std::vector<cdouble>& poly, cdouble a0, cdouble a1) {
            poly.push_back(0.0);
            for (std::size_t d = poly.size() - 1; d >= 1; --d) {
                poly[d] = poly[d] * a0 + poly[d - 1] * a1;
            }
            poly[0] *= a0;
        };
        auto d0 = [&](std::size_t i) { return cdouble(atoms[i].location * (1.0 - c)) - z; };
        auto d1 = [&](std::size_t i) { return -atoms[i].location * c * z; };

        std::vector<cdouble> out(k + 2, 0.0);
        // -m prod_i d_i
        std::vector<cdouble> full{1.0};
        for (std::size_t i = 0; i < k; ++i) {
            mul_linear(full, d0(i), d1(i));
        }
        for (std::size_t d = 0; d < full.size(); ++d) {
            out[d + 1] -= full[d];
        }
        // sum_i w_i prod_{j != i} d_j
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<cdouble> part{1.0};
            for (std::size_t j = 0; j < k; ++j) {
                if (j != i) {
                    mul_linear(part, d0(j), d1(j));
                }
            }
            for (std::size_t d = 0; d < part.size(); ++d) {
                out[d] += atoms[i].weight * part[d];
            }
        }
        return out;
    }

    [[nodiscard]] FmcProblem const& problem() const noexcept { return p_; }

  private:
    FmcProblem p_;
};

inline StieltjesPolynomial build_polynomial(FmcProblem const& p) { return StieltjesPolynomial(p); }

/// Continuous density samples plus the point mass at zero (c > 1).
struct SpectralDensity {
    std::vector<double> grid;
    std::vector<double> values;
    double zero_mass = 0.0;
    double eta = 0.0;

    /// Trapezoid integral of the continuous part over the grid.
    [[nodiscard]] double continuous_mass() const noexcept
    {
        double s = 0.0;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            s += 0.5 * (values[j] + values[j - 1]) * (grid[j] - grid[j - 1]);
        }
        return s;
    }
    [[nodiscard]] double total_mass() const noexcept { return zero_mass + continuous_mass(); }

    [[nodiscard]] double first_moment() const noexcept
    {
        double s = 0.0;
        for (std::size_t j = 1; j < grid.size(); ++j) {
            s += 0.5 * (grid[j] * values[j] + grid[j - 1] * values[j - 1])
                 * (grid[j] - grid[j - 1]);
        }
        return s;
    }
};

namespace detail {

inline constexpr double fp_damping = 0.5;
inline constexpr int fp_max_iter = 2000;
inline constexpr double fp_tol = 1e-12;
inline constexpr int newton_max_iter = 100;
inline constexpr double residual_tol = 1e-10;

// The solver works with the companion transform u = c m - (1 - c)/z (the
// Stieltjes transform of the L x L Gram spectrum). It satisfies
//     R(u) = u (z - c S(u)) + 1 = 0,   S(u) = sum_i w_i t_i / (1 + t_i u),
// which stays well conditioned next to the zero atom, where the m form
// cancels catastrophically.

inline cdouble to_companion(double c, cdouble z, cdouble m) { return c * m - (1.0 - c) / z; }
inline cdouble from_companion(double c, cdouble z, cdouble u) { return (u + (1.0 - c) / z) / c; }

struct CompanionEval {
    cdouble r;     // R(u)
    cdouble dr;    // R'(u)
    double scale;  // magnitude of the terms in R, for relative tests
};

inline CompanionEval evaluate(FmcProblem const& p, cdouble z, cdouble u)
{
    cdouble s{};
    cdouble ds{};
    for (auto const& a : p.measure.atoms) {
        cdouble const inv = 1.0 / (1.0 + a.location * u);
        s += a.weight * a.location * inv;
        ds -= a.weight * a.location * a.location * inv * inv;
    }
    cdouble const inner = z - p.c * s;
    return {u * inner + 1.0, inner - p.c * u * ds,
            1.0 + std::abs(u * z) + p.c * std::abs(u * s)};
}

/// |m - sum_i w_i / (t_i (1 - c - c z m) - z)|, the defining equation in m.
inline double residual(FmcProblem const& p, cdouble z, cdouble m)
{
    double const c = p.c;
    cdouble const base = 1.0 - c - c * z * m;
    cdouble sum{};
    for (auto const& a : p.measure.atoms) {
        sum += a.weight / (a.location * base - z);
    }
    return std::abs(m - sum);
}

/// The Stieltjes transform is the unique solution with both m and its
/// companion u in the upper half plane.
inline bool is_physical(FmcProblem const& p, cdouble z, cdouble u)
{
    if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) {
        return false;
    }
    return u.imag() > 0.0 && from_companion(p.c, z, u).imag() > 0.0;
}

inline bool accept(FmcProblem const& p, cdouble z, cdouble u)
{
    if (!is_physical(p, z, u)) {
        return false;
    }
    auto const e = evaluate(p, z, u);
    return std::abs(e.r) <= residual_tol * e.scale;
}

inline std::optional<cdouble> newton(FmcProblem const& p, cdouble z, cdouble u,
                                     int max_iter = newton_max_iter)
{
    for (int it = 0; it < max_iter; ++it) {
        auto const e = evaluate(p, z, u);
        if (std::abs(e.r) <= 4.0 * std::numeric_limits<double>::epsilon() * e.scale) {
            return u;
        }
        if (e.dr == cdouble{}) {
            return std::nullopt;
        }
        cdouble const step = e.r / e.dr;
        u -= step;
        if (!std::isfinite(u.real()) || !std::isfinite(u.imag())) {
            return std::nullopt;
        }
        if (std::abs(step) <= 1e-14 * std::abs(u)) {
            return u;
        }
    }
    return std::nullopt;
}

/// Damped iteration of u <- -1 / (z - c S(u)).
inline std::optional<cdouble> fixed_point(FmcProblem const& p, cdouble z, cdouble u)
{
    for (int it = 0; it < fp_max_iter; ++it) {
        cdouble s{};
        for (auto const& a : p.measure.atoms) {
            s += a.weight * a.location / (1.0 + a.location * u);
        }
        cdouble const next = (1.0 - fp_damping) * u + fp_damping * (-1.0 / (z - p.c * s));
        if (!std::isfinite(next.real()) || !std::isfinite(next.imag())) {
            return std::nullopt;
        }
        if (std::abs(next - u) <= fp_tol * std::abs(next)) {
            return next;
        }
        u = next;
    }
    return std::nullopt;
}

inline std::optional<cdouble> try_newton(FmcProblem const& p, cdouble z, cdouble start)
{
    auto u = newton(p, z, start);
    if (u && accept(p, z, *u)) {
        return u;
    }
    return std::nullopt;
}

/// Enumerates every root of the cleared polynomial in m and keeps the
/// physical one closest to `guess` (a companion value).
inline std::optional<cdouble> polynomial_branch(FmcProblem const& p, cdouble z, cdouble guess)
{
    std::vector<cdouble> roots;
    try {
        roots = poly_roots(Polynomial(StieltjesPolynomial(p).coefficients(z)));
    } catch (NumericError const&) {
        return std::nullopt;
    }
    std::optional<cdouble> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (cdouble r : roots) {
        cdouble const u0 = to_companion(p.c, z, r);
        cdouble const u = newton(p, z, u0, 20).value_or(u0);
        if (!accept(p, z, u)) {
            continue;
        }
        double const dist = std::abs(u - guess);
        if (dist < best_dist) {
            best_dist = dist;
            best = u;
        }
    }
    return best;
}

inline double far_field_height(FmcProblem const& p, double x)
{
    double const r = 1.0 + std::sqrt(p.c);
    return 4.0 * (1.0 + std::abs(x) + p.measure.max_location() * r * r);
}

/// Follows the branch down the vertical line Re z = x from the far field,
/// where u ~ -1/z and the fixed-point map contracts. Returns the companion value.
inline cdouble march_from_far_field(FmcProblem const& p, cdouble z)
{
    double const x = z.real();
    double const target = z.imag();
    double eta = std::max(far_field_height(p, x), target);
    cdouble zc(x, eta);
    cdouble u = fixed_point(p, zc, -1.0 / zc).value_or(-1.0 / zc);
    if (auto nu = try_newton(p, zc, u)) {
        u = *nu;
    } else {
        throw SolverError("stieltjes_at: far-field start failed at x = " + std::to_string(x));
    }

    double ratio = 0.25;
    while (eta > target) {
        double const next_eta = std::max(target, eta * ratio);
        cdouble const zn(x, next_eta);
        auto nu = try_newton(p, zn, u);
        if (!nu && ratio > 0.9) {
            nu = polynomial_branch(p, zn, u);
        }
        if (nu) {
            u = *nu;
            eta = next_eta;
            ratio = std::max(0.25, ratio * ratio);
            continue;
        }
        ratio = std::sqrt(ratio);
        if (ratio > 0.999) {
            std::ostringstream os;
            os << "stieltjes_at: lost the physical branch at z = " << x << " + " << next_eta
               << "i, residual " << std::abs(evaluate(p, zn, u).r);
            throw SolverError(os.str());
        }
    }
    return u;
}

/// Companion-space solve behind stieltjes_at.
inline cdouble solve_companion(FmcProblem const& p, cdouble z, std::optional<cdouble> warm_u)
{
    cdouble const guess = warm_u.value_or(-1.0 / z);
    if (warm_u) {
        if (auto u = try_newton(p, z, *warm_u)) {
            return *u;
        }
    }
    if (auto fp = fixed_point(p, z, guess)) {
        if (auto u = try_newton(p, z, *fp)) {
            return *u;
        }
    }
    if (auto u = polynomial_branch(p, z, guess)) {
        return *u;
    }
    return march_from_far_field(p, z);
}

} // namespace detail

/// Stieltjes transform m(z) = int dF(x) / (x - z) of the limiting spectrum of
/// the problem, for Im z > 0. Tries Newton from the warm start, then damped
/// fixed-point iteration from the warm start or -1/z, then root enumeration of
/// the cleared polynomial, then a march in from the far field.
inline cdouble stieltjes_at(FmcProblem const& p, cdouble z,
                            std::optional<cdouble> warm_start = std::nullopt)
{
    if (!(z.imag() > 0.0) || !std::isfinite(z.real()) || !std::isfinite(z.imag())) {
        throw DomainError("stieltjes_at: need finite z with Im z > 0");
    }
    std::optional<cdouble> warm_u;
    if (warm_start) {
        warm_u = detail::to_companion(p.c, z, *warm_start);
    }
    cdouble const u = detail::solve_companion(p, z, warm_u);
    return detail::from_companion(p.c, z, u);
}

namespace detail {

// Grid points per independently seeded segment. Fixed so that the output
// does not depend on the number of workers.
inline constexpr std::size_t density_segment = 256;
inline constexpr double negative_density_tol = 1e-8;

} // namespace detail

/// Density Im m(x + i eta)/pi on the grid, with the smoothed contribution of
/// the zero atom (c > 1) removed and carried as zero_mass instead. Each
/// segment of the grid starts from a far-field march and then warm-starts
/// from its left neighbour.
inline SpectralDensity density_curve(FmcProblem const& p, std::span<double const> grid, double eta,
                                     unsigned workers = 1)
{
    p.validate();
    if (!(eta > 0.0) || !std::isfinite(eta)) {
        throw ContractError("density_curve: eta must be positive");
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (!std::isfinite(grid[j]) || (j > 0 && !(grid[j] > grid[j - 1]))) {
            throw ContractError("density_curve: grid must be finite and strictly ascending");
        }
        if (p.c >= 1.0 && !(grid[j] > 0.0)) {
            throw ContractError("density_curve: grid must be positive when c >= 1");
        }
    }

    SpectralDensity out;
    out.grid.assign(grid.begin(), grid.end());
    out.values.assign(grid.size(), 0.0);
    out.zero_mass = zero_atom_mass(p.c);
    out.eta = eta;

    std::size_t const segments = (grid.size() + detail::density_segment - 1) / detail::density_segment;
    parallel_for(segments, workers, [&](std::size_t s) {
        std::size_t const begin = s * detail::density_segment;
        std::size_t const end = std::min(grid.size(), begin + detail::density_segment);
        std::optional<cdouble> warm;
        for (std::size_t j = begin; j < end; ++j) {
            cdouble const z(grid[j], eta);
            cdouble u;
            try {
                u = warm ? detail::solve_companion(p, z, warm) : detail::march_from_far_field(p, z);
            } catch (SolverError const& e) {
                std::ostringstream os;
                os << "density_curve: grid point " << j << " (x = " << grid[j] << "): " << e.what();
                throw SolverError(os.str());
            }
            warm = u;
            double f;
            if (p.c > 1.0) {
                // Im u carries exactly the continuous part, scaled by c.
                f = u.imag() / (p.c * std::numbers::pi);
            } else {
                f = detail::from_companion(p.c, z, u).imag() / std::numbers::pi;
            }
            if (f < 0.0) {
                if (f < -detail::negative_density_tol) {
                    std::ostringstream os;
                    os << "density_curve: negative density " << f << " at x = " << grid[j];
                    throw SolverError(os.str());
                }
                f = 0.0;
            }
            out.values[j] = f;
        }
    });
    return out;
}

/// Grid covering the bulk and every spike band. Uniform, except when the
/// bulk reaches (nearly) down to zero; then the first eighth of the points is
/// spaced geometrically to resolve the x^{-1/2} edge.
inline std::vector<double> default_grid(FmcProblem const& p, std::size_t points)
{
    p.validate();
    if (points < 16) {
        throw ContractError("default_grid: need at least 16 points");
    }
    double const sc = std::sqrt(p.c);
    double const t_min = p.measure.min_location();
    double const t_max = p.measure.max_location();
    double const upper = 1.25 * t_max * (1.0 + sc) * (1.0 + sc);
    double const bulk_edge = t_min * (1.0 - sc) * (1.0 - sc);
    double const lower = p.c < 1.0 ? std::max(1e-4, 0.5 * bulk_edge) : 1e-4;

    auto uniform = [](double a, double b, std::size_t n, std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) {
            out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
    };

    std::vector<double> g;
    g.reserve(points);
    double const h = (upper - lower) / static_cast<double>(points - 1);
    if (bulk_edge >= 8.0 * h) {
        uniform(lower, upper, points, g);
        return g;
    }
    double const start = bulk_edge > 0.0 ? std::min(lower, 0.5 * bulk_edge) : std::min(lower, 1e-8);
    double const knee = 16.0 * h;
    std::size_t const n_geo = points / 8;
    double const ratio = std::pow(knee / start, 1.0 / static_cast<double>(n_geo));
    double x = start;
    for (std::size_t i = 0; i < n_geo; ++i) {
        g.push_back(x);
        x *= ratio;
    }
    uniform(knee, upper, points - n_geo, g);
    return g;
}

struct GridOptions {
    std::size_t points = 4000;
    double eta = 1e-6;
    unsigned workers = 1;
};

/// End-to-end prediction for the array noise SCM.
struct Prediction {
    SpectralDensity density;
    AtomicMeasure measure;
    double c = 0.0;
    double curve_ms = 0.0; // density_curve only
    double wall_ms = 0.0;  // whole pipeline

    [[nodiscard]] std::size_t atom_count() const noexcept { return measure.size(); }
};

inline AtomicMeasure population_measure(EnsembleSpectrum const& spectrum, double c, MeasureKind mode,
                                        ClassifyOptions const& opts = {})
{
    if (mode == MeasureKind::full) {
        return full_measure(spectrum);
    }
    return reduce(classify(spectrum, c, opts), spectrum.values.size());
}

inline Prediction predict_edf(ArrayNoiseConfig const& cfg, double c, MeasureKind mode,
                              GridOptions const& opts = {}, ClassifyOptions const& cls = {})
{
    using clock = std::chrono::steady_clock;
    auto const t0 = clock::now();
    auto const spectrum = ensemble_spectrum(cfg);
    Prediction out;
    out.c = c;
    out.measure = population_measure(spectrum, c, mode, cls);
    FmcProblem const problem{out.measure, c};
    auto const grid = default_grid(problem, opts.points);
    auto const t1 = clock::now();
    out.density = density_curve(problem, grid, opts.eta, opts.workers);
    auto const t2 = clock::now();
    out.curve_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    out.wall_ms = std::chrono::duration<double, std::milli>(t2 - t0).count();
    return out;
}

} // namespace isoedf
