#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "isoedf/error.hpp"

namespace isoedf {

/// Parameters of the Marcenko-Pastur law: aspect ratio c = N/L and the
/// background eigenvalue level the law is scaled by.
struct MpParams {
    double c = 1.0;
    double scale = 1.0;

    [[nodiscard]] bool valid() const noexcept
    {
        return std::isfinite(c) && std::isfinite(scale) && c > 0.0 && scale > 0.0;
    }
    [[nodiscard]] double lower_edge() const noexcept
    {
        double const r = 1.0 - std::sqrt(c);
        return scale * r * r;
    }
    [[nodiscard]] double upper_edge() const noexcept
    {
        double const r = 1.0 + std::sqrt(c);
        return scale * r * r;
    }
};

namespace detail {

// Below this argument the Maclaurin series is used; above it the Hankel
// expansion is accurate to ~1e-11.
inline constexpr double j0_series_limit = 12.0;

inline double j0_series(double x) noexcept
{
    double const q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 80; ++k) {
        term *= -q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum) + 1e-300) {
            break;
        }
    }
    return sum;
}

// Hankel asymptotic expansion J0(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi),
// summed until the terms stop decreasing.
inline double j0_asymptotic(double x) noexcept
{
    double p = 1.0;
    double q = 0.0;
    double term = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k < 200; ++k) {
        double const odd = 2.0 * k - 1.0;
        term *= -(odd * odd) / (8.0 * k * x);
        double const mag = std::abs(term);
        if (mag >= prev || mag < 1e-17) {
            break;
        }
        prev = mag;
        // a_k / x^k enters P for even k, Q for odd k, with alternating signs.
        if (k % 2 == 0) {
            p += ((k / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        } else {
            q += (((k - 1) / 2) % 2 == 0 ? 1.0 : -1.0) * term;
        }
    }
    double const chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

/// Bessel function of the first kind, order zero.
inline double bessel_j0(double x)
{
    if (!std::isfinite(x)) {
        throw DomainError("bessel_j0: non-finite argument");
    }
    double const ax = std::abs(x);
    return ax <= detail::j0_series_limit ? detail::j0_series(ax) : detail::j0_asymptotic(ax);
}

/// Mass of the point at zero in the MP law, max(0, 1 - 1/c).
inline double zero_atom_mass(double c)
{
    if (!std::isfinite(c) || c <= 0.0) {
        throw DomainError("zero_atom_mass: aspect ratio must be positive and finite");
    }
    return c > 1.0 ? 1.0 - 1.0 / c : 0.0;
}

/// Continuous part of the Marcenko-Pastur density. Zero outside the open
/// support, including exactly at the edges. For c = 1 the density diverges
/// like x^{-1/2} at the origin and mp_density(0) returns +inf.
inline double mp_density(double x, MpParams const& p)
{
    if (!p.valid()) {
        throw ContractError("mp_density: invalid MP parameters");
    }
    if (!std::isfinite(x)) {
        throw DomainError("mp_density: non-finite coordinate");
    }
    if (x == 0.0 && p.c == 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    double const a = p.lower_edge();
    double const b = p.upper_edge();
    if (x <= a || x >= b || x <= 0.0) {
        return 0.0;
    }
    return std::sqrt((b - x) * (x - a)) / (2.0 * std::numbers::pi * p.c * p.scale * x);
}

} // namespace isoedf
