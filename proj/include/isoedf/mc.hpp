#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "isoedf/ecm.hpp"
#include "isoedf/error.hpp"
#include "isoedf/linalg.hpp"
#include "isoedf/parallel.hpp"
#include "isoedf/philox.hpp"

namespace isoedf {

/// Identifies one independent random stream: all draws for trial `trial`
/// under `seed`.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

struct McConfig {
    ArrayNoiseConfig array;
    std::size_t snapshots = 204;
    std::size_t trials = 5000;
    std::uint64_t seed = 1;
    std::size_t bins = 75;
    unsigned workers = 1;

    [[nodiscard]] double c() const noexcept
    {
        return static_cast<double>(array.n) / static_cast<double>(snapshots);
    }

    void validate() const
    {
        array.validate();
        if (snapshots == 0 || trials == 0 || bins == 0) {
            throw ContractError("McConfig: snapshots, trials and bins must be positive");
        }
    }
};

struct Histogram {
    std::vector<double> edges;   // bins + 1 ascending edges
    std::vector<double> heights; // density units; area = nonzero fraction
};

/// Pooled SCM eigenvalues over all trials.
struct EmpiricalSpectrum {
    std::vector<double> pooled;                 // ascending, zeros clamped to exactly 0
    std::vector<std::vector<double>> per_trial; // descending, by trial index
    std::size_t trials = 0;
    std::size_t zero_count = 0;
    Histogram histogram;

    [[nodiscard]] double zero_fraction() const noexcept
    {
        return pooled.empty() ? 0.0
                              : static_cast<double>(zero_count) / static_cast<double>(pooled.size());
    }

    /// Right-continuous empirical CDF.
    [[nodiscard]] double ecdf(double x) const noexcept
    {
        auto const it = std::upper_bound(pooled.begin(), pooled.end(), x);
        return static_cast<double>(it - pooled.begin()) / static_cast<double>(pooled.size());
    }
};

/// n x l matrix of circular complex Gaussians with E|g|^2 = 1 (variance 1/2
/// per real component). Entry k (row-major) is Box-Muller applied to Philox
/// block (k, trial) under the stream seed.
inline ComplexMatrix gaussian_snapshots(std::size_t n, std::size_t l, RngStream stream)
{
    if (n == 0 || l == 0) {
        throw ContractError("gaussian_snapshots: dimensions must be positive");
    }
    Philox4x32 const gen(stream.seed);
    ComplexMatrix g(n, l);
    auto data = g.data();
    for (std::size_t k = 0; k < data.size(); ++k) {
        auto const idx = static_cast<std::uint64_t>(k);
        auto const r = gen({static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32),
                            static_cast<std::uint32_t>(stream.trial),
                            static_cast<std::uint32_t>(stream.trial >> 32)});
        double const u1 = 1.0 - to_unit_interval(r[0], r[1]); // (0, 1]
        double const u2 = to_unit_interval(r[2], r[3]);
        double const radius = std::sqrt(-std::log(u1));
        double const phase = 2.0 * std::numbers::pi * u2;
        data[k] = cdouble(radius * std::cos(phase), radius * std::sin(phase));
    }
    return g;
}

/// Eigenvalues of (1/L) X X^H with X = sigma_half G, largest first.
inline std::vector<double> scm_eigenvalues(SymmetricMatrix const& sigma_half, std::size_t l,
                                           RngStream stream)
{
    std::size_t const n = sigma_half.order();
    auto const g = gaussian_snapshots(n, l, stream);

    ComplexMatrix x(n, l);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            double const b = sigma_half(i, k);
            if (b == 0.0) {
                continue;
            }
            for (std::size_t j = 0; j < l; ++j) {
                x(i, j) += b * g(k, j);
            }
        }
    }
    ComplexMatrix s(n, n);
    double const inv_l = 1.0 / static_cast<double>(l);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            cdouble acc{};
            for (std::size_t k = 0; k < l; ++k) {
                acc += x(i, k) * std::conj(x(j, k));
            }
            acc *= inv_l;
            if (i == j) {
                acc.imag(0.0);
            }
            s(i, j) = acc;
            s(j, i) = std::conj(acc);
        }
    }
    return hermitian_eigenvalues(s);
}

/// Histogram of the nonzero samples over [0, 1.05 max]; heights are scaled so
/// the total area equals the nonzero fraction of all samples.
inline Histogram make_histogram(std::vector<double> const& ascending, std::size_t zero_count,
                                std::size_t bins)
{
    Histogram h;
    double const top = ascending.empty() ? 1.0 : 1.05 * std::max(ascending.back(), 0.0);
    double const hi = top > 0.0 ? top : 1.0;
    double const width = hi / static_cast<double>(bins);
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) {
        h.edges[b] = width * static_cast<double>(b);
    }
    h.heights.assign(bins, 0.0);
    for (std::size_t i = zero_count; i < ascending.size(); ++i) {
        auto b = static_cast<std::size_t>(ascending[i] / width);
        h.heights[std::min(b, bins - 1)] += 1.0;
    }
    double const norm = 1.0 / (static_cast<double>(ascending.size()) * width);
    for (double& v : h.heights) {
        v *= norm;
    }
    return h;
}

inline constexpr double mc_zero_clamp = 1e-9;

/// Independent trials keyed by (seed, trial index); the merge is by index,
/// so the result does not depend on the worker count.
inline EmpiricalSpectrum run_mc(McConfig const& mc)
{
    mc.validate();
    auto const sigma_half = sqrt_psd(build_ecm(mc.array));

    EmpiricalSpectrum out;
    out.trials = mc.trials;
    out.per_trial.resize(mc.trials);
    parallel_for(mc.trials, mc.workers, [&](std::size_t t) {
        auto ev = scm_eigenvalues(sigma_half, mc.snapshots, {mc.seed, t});
        double const clamp = mc_zero_clamp * std::max(ev.front(), 0.0);
        for (double& v : ev) {
            if (v < clamp) {
                v = 0.0;
            }
        }
        out.per_trial[t] = std::move(ev);
    });

    out.pooled.reserve(mc.trials * mc.array.n);
    for (auto const& ev : out.per_trial) {
        out.pooled.insert(out.pooled.end(), ev.begin(), ev.end());
    }
    std::sort(out.pooled.begin(), out.pooled.end());
    out.zero_count = static_cast<std::size_t>(
        std::upper_bound(out.pooled.begin(), out.pooled.end(), 0.0) - out.pooled.begin());
    out.histogram = make_histogram(out.pooled, out.zero_count, mc.bins);
    return out;
}

} // namespace isoedf
