#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ergolab {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

namespace detail {

// Adaptive Simpson with the classic 1/15 Richardson error control.
template <class F>
double simpson(F&& f, double a, double m, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
void adapt_simpson(F&& f, double a, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, double& acc, double& err) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    if (!std::isfinite(flm) || !std::isfinite(frm))
        throw std::domain_error("quadrature: non-finite integrand near x=" + std::to_string(m));
    const double left = simpson(f, a, lm, m, fa, flm, fm);
    const double right = simpson(f, m, rm, b, fm, frm, fb);
    const double delta = left + right - whole;
    // Second clause: the correction is at round-off level relative to the
    // local panel, so further subdivision only amplifies noise (the absolute
    // target can be unreachable when the integrand is large mid-interval).
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol ||
        std::abs(delta) <= 1e-15 * (std::abs(left) + std::abs(right))) {
        acc += left + right + delta / 15.0;
        err += std::abs(delta) / 15.0;
        return;
    }
    adapt_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc, err);
    adapt_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc, err);
}

}  // namespace detail

// Adaptive quadrature of f over [a,b]. tol is an absolute tolerance target.
template <class F>
QuadResult integrate(F&& f, double a, double b, double tol = 1e-12, int max_depth = 48) {
    if (a == b) return {0.0, 0.0};
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fm) || !std::isfinite(fb))
        throw std::domain_error("quadrature: non-finite integrand at an endpoint or midpoint");
    const double whole = detail::simpson(f, a, m, b, fa, fm, fb);
    QuadResult r;
    // Seed the tolerance from a scouted magnitude estimate so that relative
    // accuracy is achieved for very large or very small integrals. The coarse
    // Simpson estimate alone is unusable here: it can be ~0 for integrands
    // that vanish at the endpoints and midpoint while being huge in between,
    // which would demand sub-round-off absolute accuracy and drive the
    // recursion to full depth on noise.
    double fmax = std::max({std::abs(fa), std::abs(fm), std::abs(fb)});
    for (int i = 1; i < 64; i += 2) {
        const double v = std::abs(f(a + (b - a) * i / 64.0));
        if (std::isfinite(v)) fmax = std::max(fmax, v);
    }
    const double scale = std::max({std::abs(whole), fmax * std::abs(b - a), 1e-300});
    detail::adapt_simpson(f, a, b, fa, fm, fb, whole, std::max(tol, 1e-15 * scale),
                          max_depth, r.value, r.error);
    return r;
}

// log of \int_a^b exp(g(x)) dx, shifted by the max of g on a scouting grid so
// that huge exponents never overflow. Returns -inf for an identically
// negligible integrand.
template <class G>
double integrate_log(G&& g, double a, double b, double tol = 1e-12) {
    const int n_scout = 512;
    double gmax = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scout; ++i) {
        const double x = a + (b - a) * i / n_scout;
        gmax = std::max(gmax, g(x));
    }
    if (!std::isfinite(gmax)) {
        if (gmax < 0) return -std::numeric_limits<double>::infinity();
        throw std::domain_error("integrate_log: integrand exponent is +inf");
    }
    auto f = [&](double x) { return std::exp(g(x) - gmax); };
    const QuadResult q = integrate(f, a, b, tol);
    if (q.value <= 0.0) return -std::numeric_limits<double>::infinity();
    return gmax + std::log(q.value);
}

}  // namespace ergolab
