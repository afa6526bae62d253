#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "isoedf/error.hpp"
#include "isoedf/mc.hpp"
#include "isoedf/rmt.hpp"

namespace isoedf {

/// CDF of a SpectralDensity: the zero atom plus the trapezoid integral of the
/// linear interpolant, divided by the total model mass so it reaches exactly 1.
class ModelCdf {
  public:
    explicit ModelCdf(SpectralDensity const& d) : d_(&d), cum_(d.grid.size(), 0.0)
    {
        if (d.grid.empty() || d.grid.size() != d.values.size()) {
            throw ContractError("ModelCdf: empty or inconsistent density");
        }
        for (std::size_t j = 1; j < d.grid.size(); ++j) {
            cum_[j] = cum_[j - 1] + 0.5 * (d.values[j] + d.values[j - 1]) * (d.grid[j] - d.grid[j - 1]);
        }
        total_ = d.zero_mass + cum_.back();
        if (!(total_ > 0.0)) {
            throw ContractError("ModelCdf: density has no mass");
        }
    }

    [[nodiscard]] double operator()(double x) const noexcept
    {
        auto const& g = d_->grid;
        auto const& f = d_->values;
        if (x < 0.0) {
            return 0.0;
        }
        double cont;
        if (x <= g.front()) {
            cont = 0.0;
        } else if (x >= g.back()) {
            cont = cum_.back();
        } else {
            auto const j = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin());
            double const h = x - g[j - 1];
            double const slope = (f[j] - f[j - 1]) / (g[j] - g[j - 1]);
            cont = cum_[j - 1] + h * (f[j - 1] + 0.5 * slope * h);
        }
        return std::min(1.0, (d_->zero_mass + cont) / total_);
    }

    /// Limit from the left; differs from operator() only at the zero atom.
    [[nodiscard]] double left_limit(double x) const noexcept { return x <= 0.0 ? 0.0 : (*this)(x); }

    [[nodiscard]] double raw_total() const noexcept { return total_; }

  private:
    SpectralDensity const* d_;
    std::vector<double> cum_;
    double total_ = 0.0;
};

inline double model_cdf(SpectralDensity const& d, double x) { return ModelCdf(d)(x); }

/// sup_x |F_model(x) - F_emp(x)| for an ascending sample, checking both
/// one-sided limits at every distinct sample value.
inline double ks_distance(SpectralDensity const& model, std::vector<double> const& ascending)
{
    if (ascending.empty()) {
        throw ContractError("ks_distance: no samples");
    }
    ModelCdf const cdf(model);
    double const n = static_cast<double>(ascending.size());
    double ks = 0.0;
    std::size_t i = 0;
    while (i < ascending.size()) {
        double const v = ascending[i];
        std::size_t j = i;
        while (j < ascending.size() && ascending[j] == v) {
            ++j;
        }
        double const below = static_cast<double>(i) / n;
        double const at = static_cast<double>(j) / n;
        ks = std::max(ks, std::abs(cdf.left_limit(v) - below));
        ks = std::max(ks, std::abs(cdf(v) - at));
        i = j;
    }
    return ks;
}

/// Piecewise-linear interpolation of the histogram through its bin centres,
/// zero outside the histogram range.
inline double histogram_density(Histogram const& h, double x) noexcept
{
    if (h.heights.empty() || x < h.edges.front() || x > h.edges.back()) {
        return 0.0;
    }
    std::size_t const bins = h.heights.size();
    double const width = h.edges[1] - h.edges[0];
    double const pos = (x - h.edges.front()) / width - 0.5;
    if (pos <= 0.0) {
        return h.heights.front();
    }
    if (pos >= static_cast<double>(bins - 1)) {
        return h.heights.back();
    }
    auto const b = static_cast<std::size_t>(pos);
    double const frac = pos - static_cast<double>(b);
    return (1.0 - frac) * h.heights[b] + frac * h.heights[b + 1];
}

struct ComparisonReport {
    std::size_t n = 0;
    double zeta = 0.0;
    double c = 0.0;
    std::string mode;
    std::size_t atom_count = 0;
    double ks = 0.0;
    double l1 = 0.0;
    double zero_mass_model = 0.0;
    double zero_frac_empirical = 0.0;
    double runtime_model_ms = 0.0;
    double runtime_mc_ms = 0.0;
    std::uint64_t seed = 0;
};

/// KS over the pooled sample (zero atoms included on both sides) and L1
/// between the model density and the interpolated histogram on the model grid.
inline ComparisonReport compare(SpectralDensity const& model, EmpiricalSpectrum const& emp)
{
    if (model.grid.empty() || emp.pooled.empty()) {
        throw ContractError("compare: empty model or sample");
    }
    ComparisonReport r;
    r.ks = ks_distance(model, emp.pooled);
    double l1 = 0.0;
    double prev = std::abs(model.values[0] - histogram_density(emp.histogram, model.grid[0]));
    for (std::size_t j = 1; j < model.grid.size(); ++j) {
        double const cur = std::abs(model.values[j] - histogram_density(emp.histogram, model.grid[j]));
        l1 += 0.5 * (prev + cur) * (model.grid[j] - model.grid[j - 1]);
        prev = cur;
    }
    r.l1 = l1;
    r.zero_mass_model = model.zero_mass;
    r.zero_frac_empirical = emp.zero_fraction();
    return r;
}

inline nlohmann::ordered_json to_json(ComparisonReport const& r)
{
    return {{"n", r.n},
            {"zeta", r.zeta},
            {"c", r.c},
            {"mode", r.mode},
            {"atom_count", r.atom_count},
            {"ks", r.ks},
            {"l1", r.l1},
            {"zero_mass_model", r.zero_mass_model},
            {"zero_frac_empirical", r.zero_frac_empirical},
            {"runtime_model_ms", r.runtime_model_ms},
            {"runtime_mc_ms", r.runtime_mc_ms},
            {"seed", r.seed}};
}

} // namespace isoedf
