#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isoedf/error.hpp"

namespace isoedf {

using cdouble = std::complex<double>;

/// Dense real symmetric matrix, row-major. Writes go through set(), which
/// keeps both triangles in sync, so the matrix is symmetric by construction.
class SymmetricMatrix {
  public:
    SymmetricMatrix() = default;
    explicit SymmetricMatrix(std::size_t order) : n_(order), a_(order * order, 0.0)
    {
        if (order == 0) {
            throw ContractError("SymmetricMatrix: order must be >= 1");
        }
    }

    static SymmetricMatrix identity(std::size_t order)
    {
        SymmetricMatrix m(order);
        for (std::size_t i = 0; i < order; ++i) {
            m.set(i, i, 1.0);
        }
        return m;
    }

    static SymmetricMatrix diagonal(std::span<double const> d)
    {
        SymmetricMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) {
            m.set(i, i, d[i]);
        }
        return m;
    }

    /// Row-major input; rejects anything not exactly symmetric.
    static SymmetricMatrix from_row_major(std::size_t order, std::span<double const> v)
    {
        if (v.size() != order * order) {
            throw ContractError("SymmetricMatrix: entry count does not match order");
        }
        SymmetricMatrix m(order);
        for (std::size_t p = 0; p < order; ++p) {
            for (std::size_t q = 0; q < order; ++q) {
                if (v[p * order + q] != v[q * order + p]) {
                    throw ContractError("SymmetricMatrix: input is not symmetric");
                }
                m.a_[p * order + q] = v[p * order + q];
            }
        }
        return m;
    }

    [[nodiscard]] std::size_t order() const noexcept { return n_; }
    [[nodiscard]] double operator()(std::size_t p, std::size_t q) const noexcept
    {
        return a_[p * n_ + q];
    }
    void set(std::size_t p, std::size_t q, double v) noexcept
    {
        a_[p * n_ + q] = v;
        a_[q * n_ + p] = v;
    }
    [[nodiscard]] std::span<double const> data() const noexcept { return a_; }

    [[nodiscard]] double frobenius_norm() const noexcept
    {
        double s = 0.0;
        for (double v : a_) {
            s += v * v;
        }
        return std::sqrt(s);
    }

    [[nodiscard]] double trace() const noexcept
    {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            s += a_[i * n_ + i];
        }
        return s;
    }

  private:
    std::size_t n_ = 0;
    std::vector<double> a_;
};

/// Dense complex matrix, row-major; std::complex storage is interleaved re/im.
class ComplexMatrix {
  public:
    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols)
    {
        if (rows == 0 || cols == 0) {
            throw ContractError("ComplexMatrix: dimensions must be positive");
        }
    }

    static ComplexMatrix identity(std::size_t order)
    {
        ComplexMatrix m(order, order);
        for (std::size_t i = 0; i < order; ++i) {
            m(i, i) = 1.0;
        }
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] cdouble operator()(std::size_t r, std::size_t c) const noexcept
    {
        return a_[r * cols_ + c];
    }
    cdouble& operator()(std::size_t r, std::size_t c) noexcept { return a_[r * cols_ + c]; }
    [[nodiscard]] std::span<cdouble const> data() const noexcept { return a_; }
    std::span<cdouble> data() noexcept { return a_; }

    [[nodiscard]] bool all_finite() const noexcept
    {
        return std::all_of(a_.begin(), a_.end(), [](cdouble v) {
            return std::isfinite(v.real()) && std::isfinite(v.imag());
        });
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cdouble> a_;
};

/// Polynomial with complex coefficients in ascending degree, c_0 + c_1 z + ...
/// Trailing zero coefficients are trimmed on construction.
class Polynomial {
  public:
    explicit Polynomial(std::vector<cdouble> coeffs) : c_(std::move(coeffs))
    {
        while (!c_.empty() && c_.back() == cdouble{}) {
            c_.pop_back();
        }
        if (c_.size() < 2) {
            throw ContractError("Polynomial: degree must be >= 1 after trimming");
        }
    }

    [[nodiscard]] std::size_t degree() const noexcept { return c_.size() - 1; }
    [[nodiscard]] std::span<cdouble const> coeffs() const noexcept { return c_; }

    [[nodiscard]] cdouble operator()(cdouble z) const noexcept
    {
        cdouble acc{};
        for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
            acc = acc * z + *it;
        }
        return acc;
    }

    [[nodiscard]] cdouble derivative(cdouble z) const noexcept
    {
        cdouble acc{};
        for (std::size_t k = c_.size() - 1; k >= 1; --k) {
            acc = acc * z + static_cast<double>(k) * c_[k];
        }
        return acc;
    }

    [[nodiscard]] double max_abs_coeff() const noexcept
    {
        double m = 0.0;
        for (cdouble v : c_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

  private:
    std::vector<cdouble> c_;
};

namespace detail {

inline constexpr int jacobi_max_sweeps = 100;

/// Cyclic Jacobi on a row-major symmetric n x n buffer. Leaves eigenvalues on
/// the diagonal; accumulates rotations into `v` (row-major, columns are
/// eigenvectors) when it is non-empty.
inline void jacobi_diagonalize(std::vector<double>& a, std::size_t n, std::vector<double>& v)
{
    bool const want_vectors = !v.empty();
    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

    double scale = 0.0;
    for (double x : a) {
        scale = std::max(scale, std::abs(x));
    }
    if (scale == 0.0) {
        return;
    }

    for (int sweep = 0; sweep < jacobi_max_sweeps; ++sweep) {
        double off = 0.0;
        double diag = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            diag += at(p, p) * at(p, p);
            for (std::size_t q = p + 1; q < n; ++q) {
                off += at(p, q) * at(p, q);
            }
        }
        if (off <= 1e-30 * diag || off == 0.0) {
            return;
        }
        // Threshold during the first sweeps, as in the classical variant.
        double const thresh = sweep < 3 ? 0.2 * std::sqrt(off) / static_cast<double>(n * n) : 0.0;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double const apq = at(p, q);
                double const g = 100.0 * std::abs(apq);
                double const app = at(p, p);
                double const aqq = at(q, q);
                if (sweep > 3 && std::abs(app) + g == std::abs(app)
                    && std::abs(aqq) + g == std::abs(aqq)) {
                    at(p, q) = 0.0;
                    at(q, p) = 0.0;
                    continue;
                }
                if (std::abs(apq) <= thresh || apq == 0.0) {
                    continue;
                }
                double const theta = (aqq - app) / (2.0 * apq);
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0) {
                    t = -t;
                }
                double const c = 1.0 / std::sqrt(t * t + 1.0);
                double const s = t * c;
                double const tau = s / (1.0 + c);

                at(p, p) = app - t * apq;
                at(q, q) = aqq + t * apq;
                at(p, q) = 0.0;
                at(q, p) = 0.0;
                double* rp = &a[p * n];
                double* rq = &a[q * n];
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) {
                        continue;
                    }
                    double const akp = rp[k];
                    double const akq = rq[k];
                    double const nkp = akp - s * (akq + tau * akp);
                    double const nkq = akq + s * (akp - tau * akq);
                    rp[k] = nkp;
                    rq[k] = nkq;
                    a[k * n + p] = nkp;
                    a[k * n + q] = nkq;
                }
                if (want_vectors) {
                    for (std::size_t k = 0; k < n; ++k) {
                        double const vkp = v[k * n + p];
                        double const vkq = v[k * n + q];
                        v[k * n + p] = vkp - s * (vkq + tau * vkp);
                        v[k * n + q] = vkq + s * (vkp - tau * vkq);
                    }
                }
            }
        }
    }
    throw NumericError("jacobi: no convergence after " + std::to_string(jacobi_max_sweeps)
                       + " sweeps");
}

inline std::vector<double> sorted_descending_diagonal(std::vector<double> const& a, std::size_t n)
{
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = a[i * n + i];
    }
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

} // namespace detail

/// All eigenvalues of a real symmetric matrix, largest first.
inline std::vector<double> sym_eigenvalues(SymmetricMatrix const& a)
{
    for (double x : a.data()) {
        if (!std::isfinite(x)) {
            throw ContractError("sym_eigenvalues: non-finite entry");
        }
    }
    std::vector<double> work(a.data().begin(), a.data().end());
    std::vector<double> none;
    detail::jacobi_diagonalize(work, a.order(), none);
    return detail::sorted_descending_diagonal(work, a.order());
}

/// Eigenvalues of a Hermitian matrix, largest first. The N x N matrix is
/// embedded as the real symmetric 2N x 2N block [[Re, -Im], [Im, Re]], whose
/// spectrum is the Hermitian one with every eigenvalue doubled; sorted pairs
/// are averaged back down to N values.
inline std::vector<double> hermitian_eigenvalues(ComplexMatrix const& a)
{
    if (a.rows() != a.cols()) {
        throw ContractError("hermitian_eigenvalues: matrix is not square");
    }
    if (!a.all_finite()) {
        throw ContractError("hermitian_eigenvalues: non-finite entry");
    }
    std::size_t const n = a.rows();
    double amax = 0.0;
    for (cdouble v : a.data()) {
        amax = std::max(amax, std::abs(v));
    }
    double const tol = 1e-10 * std::max(amax, std::numeric_limits<double>::min());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            if (std::abs(a(i, j) - std::conj(a(j, i))) > tol) {
                throw ContractError("hermitian_eigenvalues: matrix is not Hermitian");
            }
        }
    }

    std::size_t const m = 2 * n;
    std::vector<double> work(m * m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // Symmetrize so round-off asymmetry in the input cannot leak in.
            cdouble const h = 0.5 * (a(i, j) + std::conj(a(j, i)));
            work[i * m + j] = h.real();
            work[(i + n) * m + (j + n)] = h.real();
            work[i * m + (j + n)] = -h.imag();
            work[(i + n) * m + j] = h.imag();
        }
    }
    std::vector<double> none;
    detail::jacobi_diagonalize(work, m, none);
    auto doubled = detail::sorted_descending_diagonal(work, m);
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) {
        ev[i] = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
    }
    return ev;
}

/// Principal square root of a positive semidefinite matrix. Eigenvalues down
/// to -1e-10 * lambda_max are treated as round-off and clamped to zero.
inline SymmetricMatrix sqrt_psd(SymmetricMatrix const& a)
{
    std::size_t const n = a.order();
    std::vector<double> work(a.data().begin(), a.data().end());
    std::vector<double> vec(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        vec[i * n + i] = 1.0;
    }
    detail::jacobi_diagonalize(work, n, vec);

    std::vector<double> lam(n);
    double lmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        lam[i] = work[i * n + i];
        lmax = std::max(lmax, lam[i]);
    }
    for (double& l : lam) {
        if (l < -1e-10 * lmax) {
            throw NotPsdError("sqrt_psd: eigenvalue " + std::to_string(l)
                              + " is below the PSD tolerance");
        }
        l = std::sqrt(std::max(l, 0.0));
    }

    SymmetricMatrix b(n);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p; q < n; ++q) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                s += vec[p * n + k] * lam[k] * vec[q * n + k];
            }
            b.set(p, q, s);
        }
    }
    return b;
}

namespace detail {

// Parlett-Reinsch balancing by powers of two; eigenvalues are unchanged.
inline void balance(std::vector<cdouble>& h, std::size_t n)
{
    constexpr double radix = 2.0;
    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double r = 0.0;
            double c = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) {
                    c += std::abs(h[j * n + i]);
                    r += std::abs(h[i * n + j]);
                }
            }
            if (c == 0.0 || r == 0.0) {
                continue;
            }
            double g = r / radix;
            double f = 1.0;
            double const s = c + r;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                for (std::size_t j = 0; j < n; ++j) {
                    h[i * n + j] /= f;
                    h[j * n + i] *= f;
                }
            }
        }
    }
}

/// Eigenvalues of a complex upper Hessenberg matrix by single-shift QR with
/// Wilkinson shifts and Givens rotations.
inline std::vector<cdouble> hessenberg_eigenvalues(std::vector<cdouble> h, std::size_t n)
{
    auto at = [&](std::size_t i, std::size_t j) -> cdouble& { return h[i * n + j]; };
    auto l1 = [](cdouble v) { return std::abs(v.real()) + std::abs(v.imag()); };
    constexpr double eps = std::numeric_limits<double>::epsilon();

    std::vector<cdouble> eig(n);
    std::size_t const max_iter = 100 * n;
    std::size_t total_iter = 0;
    std::size_t its = 0;
    std::vector<double> cs(n);
    std::vector<cdouble> sn(n);

    std::ptrdiff_t hi = static_cast<std::ptrdiff_t>(n) - 1;
    while (hi >= 0) {
        // Locate the start of the unreduced block ending at hi.
        std::ptrdiff_t lo = hi;
        while (lo > 0) {
            double const sub = l1(at(lo, lo - 1));
            double const ref = l1(at(lo, lo)) + l1(at(lo - 1, lo - 1));
            if (sub <= eps * ref || sub < std::numeric_limits<double>::min()) {
                at(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = at(hi, hi);
            --hi;
            its = 0;
            continue;
        }
        if (++total_iter > max_iter) {
            throw NumericError("poly_roots: QR iteration did not converge after "
                               + std::to_string(max_iter) + " iterations");
        }
        ++its;

        cdouble mu;
        if (its % 10 == 0) {
            // Exceptional shift to break cycles.
            mu = at(hi, hi) + 0.75 * std::abs(at(hi, hi - 1).real())
                 + 0.75 * std::abs(at(hi, hi - 1).imag());
        } else {
            cdouble const a = at(hi - 1, hi - 1);
            cdouble const b = at(hi - 1, hi);
            cdouble const c = at(hi, hi - 1);
            cdouble const d = at(hi, hi);
            cdouble const tr = 0.5 * (a + d);
            cdouble const disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
            cdouble const e1 = tr + disc;
            cdouble const e2 = tr - disc;
            mu = std::abs(e1 - d) < std::abs(e2 - d) ? e1 : e2;
        }

        auto const ulo = static_cast<std::size_t>(lo);
        auto const uhi = static_cast<std::size_t>(hi);
        for (std::size_t i = ulo; i <= uhi; ++i) {
            at(i, i) -= mu;
        }
        for (std::size_t k = ulo; k < uhi; ++k) {
            cdouble const x = at(k, k);
            cdouble const y = at(k + 1, k);
            double const r = std::hypot(std::abs(x), std::abs(y));
            double c;
            cdouble s;
            if (r == 0.0) {
                c = 1.0;
                s = 0.0;
            } else if (std::abs(x) == 0.0) {
                c = 0.0;
                s = 1.0;
            } else {
                c = std::abs(x) / r;
                s = (x / std::abs(x)) * std::conj(y) / r;
            }
            cs[k] = c;
            sn[k] = s;
            for (std::size_t j = k; j <= uhi; ++j) {
                cdouble const u = at(k, j);
                cdouble const v = at(k + 1, j);
                at(k, j) = c * u + s * v;
                at(k + 1, j) = -std::conj(s) * u + c * v;
            }
        }
        for (std::size_t k = ulo; k < uhi; ++k) {
            double const c = cs[k];
            cdouble const s = sn[k];
            std::size_t const last = std::min(k + 2, uhi);
            for (std::size_t i = ulo; i <= last; ++i) {
                cdouble const u = at(i, k);
                cdouble const v = at(i, k + 1);
                at(i, k) = u * c + v * std::conj(s);
                at(i, k + 1) = -u * s + v * c;
            }
        }
        for (std::size_t i = ulo; i <= uhi; ++i) {
            at(i, i) += mu;
        }
    }
    return eig;
}

} // namespace detail

/// All roots of a polynomial, from the eigenvalues of its balanced companion
/// matrix, each polished by a few Newton steps.
inline std::vector<cdouble> poly_roots(Polynomial const& p)
{
    std::size_t const d = p.degree();
    auto const c = p.coeffs();
    for (cdouble v : c) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw ContractError("poly_roots: non-finite coefficient");
        }
    }
    if (d == 1) {
        return {-c[0] / c[1]};
    }
    std::vector<cdouble> h(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        h[j] = -c[d - 1 - j] / c[d];
    }
    for (std::size_t i = 1; i < d; ++i) {
        h[i * d + (i - 1)] = 1.0;
    }
    detail::balance(h, d);
    auto roots = detail::hessenberg_eigenvalues(std::move(h), d);

    for (cdouble& r : roots) {
        for (int it = 0; it < 3; ++it) {
            cdouble const f = p(r);
            cdouble const df = p.derivative(r);
            if (df == cdouble{}) {
                break;
            }
            cdouble const next = r - f / df;
            if (!(std::abs(p(next)) < std::abs(f))) {
                break;
            }
            r = next;
        }
    }
    return roots;
}

} // namespace isoedf
