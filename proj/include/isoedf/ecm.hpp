#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "isoedf/error.hpp"
#include "isoedf/linalg.hpp"
#include "isoedf/specfun.hpp"

namespace isoedf {

/// Uniform line array in a cylindrically isotropic noise field.
/// `zeta` is sensor spacing over wavelength; 0.5 is half-wavelength spacing.
struct ArrayNoiseConfig {
    std::size_t n = 51;
    double zeta = 0.5;

    [[nodiscard]] double alpha() const noexcept { return 2.0 * std::numbers::pi * zeta; }

    void validate() const
    {
        if (n < 2) {
            throw ContractError("ArrayNoiseConfig: need at least 2 sensors");
        }
        if (!std::isfinite(zeta) || zeta <= 0.0) {
            throw ContractError("ArrayNoiseConfig: zeta must be positive and finite");
        }
    }
};

/// Eigenvalues of the ensemble covariance, largest first, tiny negative
/// round-off already clamped to zero.
struct EnsembleSpectrum {
    std::vector<double> values;
    std::size_t n = 0;

    [[nodiscard]] double largest() const { return values.front(); }
    [[nodiscard]] double smallest() const { return values.back(); }
};

/// Toeplitz covariance with entries J0(2 pi zeta |p - q|).
inline SymmetricMatrix build_ecm(ArrayNoiseConfig const& cfg)
{
    cfg.validate();
    std::vector<double> row(cfg.n);
    for (std::size_t k = 0; k < cfg.n; ++k) {
        row[k] = bessel_j0(cfg.alpha() * static_cast<double>(k));
    }
    SymmetricMatrix m(cfg.n);
    for (std::size_t p = 0; p < cfg.n; ++p) {
        for (std::size_t q = p; q < cfg.n; ++q) {
            m.set(p, q, row[q - p]);
        }
    }
    return m;
}

inline EnsembleSpectrum ensemble_spectrum(ArrayNoiseConfig const& cfg)
{
    auto values = sym_eigenvalues(build_ecm(cfg));
    double const floor = -1e-10 * values.front();
    for (double& v : values) {
        if (v < 0.0 && v >= floor) {
            v = 0.0;
        }
    }
    return EnsembleSpectrum{std::move(values), cfg.n};
}

/// Symbol of the J0 Toeplitz family, F(w) = 2 / sqrt(alpha^2 - w^2) on |w| < alpha.
inline double szego_density(double omega, ArrayNoiseConfig const& cfg)
{
    cfg.validate();
    double const a = cfg.alpha();
    if (!std::isfinite(omega) || std::abs(omega) >= a) {
        throw DomainError("szego_density: |omega| must be below alpha");
    }
    return 2.0 / std::sqrt(a * a - omega * omega);
}

} // namespace isoedf
