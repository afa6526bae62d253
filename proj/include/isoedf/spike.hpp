#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "isoedf/ecm.hpp"
#include "isoedf/error.hpp"

namespace isoedf {

struct Atom {
    double location = 0.0;
    double weight = 0.0;
};

enum class MeasureKind { reduced, full };

/// Discrete probability measure: weighted point masses at increasing
/// locations. Used as the population spectrum fed to the convolution.
struct AtomicMeasure {
    std::vector<Atom> atoms;
    MeasureKind kind = MeasureKind::full;

    [[nodiscard]] std::size_t size() const noexcept { return atoms.size(); }

    [[nodiscard]] double total_weight() const noexcept
    {
        double s = 0.0;
        for (auto const& a : atoms) {
            s += a.weight;
        }
        return s;
    }

    [[nodiscard]] double mean() const noexcept
    {
        double s = 0.0;
        for (auto const& a : atoms) {
            s += a.weight * a.location;
        }
        return s;
    }

    [[nodiscard]] double max_location() const { return atoms.back().location; }
    [[nodiscard]] double min_location() const { return atoms.front().location; }

    /// Sort by location and merge atoms closer than `tol`, accumulating weight.
    void canonicalize(double tol = 0.0)
    {
        std::sort(atoms.begin(), atoms.end(),
                  [](Atom const& a, Atom const& b) { return a.location < b.location; });
        std::vector<Atom> merged;
        merged.reserve(atoms.size());
        for (auto const& a : atoms) {
            if (a.weight == 0.0) {
                continue;
            }
            if (!merged.empty() && a.location - merged.back().location <= tol) {
                merged.back().weight += a.weight;
            } else {
                merged.push_back(a);
            }
        }
        atoms = std::move(merged);
    }

    void validate() const
    {
        if (atoms.empty()) {
            throw ContractError("AtomicMeasure: no atoms");
        }
        double prev = -1.0;
        for (auto const& a : atoms) {
            if (!(a.location >= 0.0) || !std::isfinite(a.location)) {
                throw ContractError("AtomicMeasure: atom location must be finite and >= 0");
            }
            if (!(a.weight > 0.0) || a.weight > 1.0) {
                throw ContractError("AtomicMeasure: atom weight must lie in (0, 1]");
            }
            if (a.location <= prev) {
                throw ContractError("AtomicMeasure: locations must be strictly increasing");
            }
            prev = a.location;
        }
        if (std::abs(total_weight() - 1.0) > 1e-12) {
            throw ContractError("AtomicMeasure: weights must sum to 1");
        }
    }
};

/// Partition of the ensemble spectrum into distinct spikes, a collapsed
/// mid band and a collapsed background band. Thresholds are scaled by the
/// smallest eigenvalue gamma_n.
struct SpikeClassification {
    std::vector<double> gamma_dist; // descending
    std::size_t n_mid = 0;
    std::size_t n_low = 0;
    double gamma_mid = 0.0;
    double gamma_n = 0.0;
    double t_low = 0.0;
    double t_high = 0.0;

    [[nodiscard]] std::size_t total() const noexcept { return gamma_dist.size() + n_mid + n_low; }
};

struct ClassifyOptions {
    /// Replaces the default mid-band atom location gamma_n ((1+sqrt c) + (1+sqrt c)^2) / 2.
    std::optional<double> gamma_mid_override;
};

/// Ties: a value equal to t_low counts as background, equal to t_high as mid band.
inline SpikeClassification classify(EnsembleSpectrum const& spectrum, double c,
                                    ClassifyOptions const& opts = {})
{
    if (spectrum.values.empty()) {
        throw ContractError("classify: empty spectrum");
    }
    if (!std::isfinite(c) || c <= 0.0) {
        throw DomainError("classify: aspect ratio must be positive");
    }
    double const gamma_n = *std::min_element(spectrum.values.begin(), spectrum.values.end());
    if (!(gamma_n > 0.0)) {
        throw DegenerateSpectrumError("classify: smallest ensemble eigenvalue must be positive");
    }
    double const r = 1.0 + std::sqrt(c);

    SpikeClassification out;
    out.gamma_n = gamma_n;
    out.t_low = gamma_n * r;
    out.t_high = gamma_n * r * r;
    out.gamma_mid = opts.gamma_mid_override.value_or(0.5 * (out.t_low + out.t_high));
    for (double g : spectrum.values) {
        if (g > out.t_high) {
            out.gamma_dist.push_back(g);
        } else if (g > out.t_low) {
            ++out.n_mid;
        } else {
            ++out.n_low;
        }
    }
    std::sort(out.gamma_dist.begin(), out.gamma_dist.end(), std::greater<>());
    return out;
}

/// Reduced population measure: one atom of mass 1/n per distinct spike, the
/// mid band collapsed onto gamma_mid and the background onto gamma_n. Empty
/// bands contribute no atom.
inline AtomicMeasure reduce(SpikeClassification const& cls, std::size_t n)
{
    if (cls.total() != n || n == 0) {
        throw ContractError("reduce: classification does not partition n eigenvalues");
    }
    double const inv_n = 1.0 / static_cast<double>(n);
    AtomicMeasure m;
    m.kind = MeasureKind::reduced;
    if (cls.n_low > 0) {
        m.atoms.push_back({cls.gamma_n, static_cast<double>(cls.n_low) * inv_n});
    }
    if (cls.n_mid > 0) {
        m.atoms.push_back({cls.gamma_mid, static_cast<double>(cls.n_mid) * inv_n});
    }
    for (auto it = cls.gamma_dist.rbegin(); it != cls.gamma_dist.rend(); ++it) {
        m.atoms.push_back({*it, inv_n});
    }
    m.canonicalize();
    return m;
}

/// All n ensemble eigenvalues at mass 1/n; coincident values (within
/// 1e-10 * gamma_1) are merged.
inline AtomicMeasure full_measure(EnsembleSpectrum const& spectrum)
{
    if (spectrum.values.empty()) {
        throw ContractError("full_measure: empty spectrum");
    }
    double const inv_n = 1.0 / static_cast<double>(spectrum.values.size());
    double const gmax = *std::max_element(spectrum.values.begin(), spectrum.values.end());
    AtomicMeasure m;
    m.kind = MeasureKind::full;
    for (double g : spectrum.values) {
        m.atoms.push_back({g, inv_n});
    }
    m.canonicalize(1e-10 * gmax);
    return m;
}

} // namespace isoedf
