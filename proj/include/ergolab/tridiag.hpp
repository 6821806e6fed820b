#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace ergolab {

// Thomas algorithm for a general tridiagonal system.
// sub[i] multiplies x[i-1] in row i (sub[0] unused), sup[i] multiplies x[i+1].
inline std::vector<double> tridiag_solve(std::span<const double> sub,
                                         std::span<const double> diag,
                                         std::span<const double> sup,
                                         std::span<const double> rhs) {
    const size_t n = diag.size();
    if (n == 0) return {};
    std::vector<double> c(n), d(n), x(n);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("tridiag_solve: zero pivot at row 0");
    c[0] = sup[0] / beta;
    d[0] = rhs[0] / beta;
    for (size_t i = 1; i < n; ++i) {
        beta = diag[i] - sub[i] * c[i - 1];
        if (beta == 0.0) throw std::runtime_error("tridiag_solve: zero pivot");
        c[i] = (i + 1 < n ? sup[i] : 0.0) / beta;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

// Sturm count for a symmetric tridiagonal matrix (diag d, off-diagonal e,
// e[i] couples i and i+1): number of eigenvalues strictly below sigma.
inline int sturm_count(std::span<const double> d, std::span<const double> e, double sigma) {
    const size_t n = d.size();
    int count = 0;
    double q = d[0] - sigma;
    if (q < 0) ++count;
    for (size_t i = 1; i < n; ++i) {
        const double e2 = e[i - 1] * e[i - 1];
        if (q == 0.0) q = 1e-300;
        q = d[i] - sigma - e2 / q;
        if (q < 0) ++count;
    }
    return count;
}

// k-th smallest eigenvalue (k = 0 for the smallest) by Sturm bisection.
inline double tridiag_eigenvalue(std::span<const double> d, std::span<const double> e, int k,
                                 double tol = 1e-13) {
    const size_t n = d.size();
    // Gershgorin bracket
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(e[i - 1]) : 0.0) + (i + 1 < n ? std::abs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi)) + 1.0;
    for (int it = 0; it < 200 && hi - lo > tol * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace ergolab
