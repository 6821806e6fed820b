#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

#include "ergolab/potential.hpp"
#include "ergolab/quadrature.hpp"

namespace ergolab {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double length() const { return hi - lo; }
    bool empty() const { return !(hi > lo); }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct MeasureValue {
    double value = 0.0;
    double error = 0.0;
    bool warning = false;  // degenerate input (empty set, clipped interval)
};

// log of a mu-integral, with a flag raised when the integrand has not come
// down at the truncation boundary (the value is then a lower bound only).
struct LogMoment {
    double log_value = -std::numeric_limits<double>::infinity();
    bool truncation_dominated = false;
};

struct TruncationPolicy {
    double tail_tol = 1e-10;
    double max_radius = 1e12;
    double force_radius = 0.0;  // > 0: use this radius, record the tail achieved
};

// Immutable: a potential, its normalized invariant measure on a truncated
// domain, and the quadrature used for every mu-integral.
class Scenario {
public:
    Scenario(Potential pot, TruncationPolicy policy = TruncationPolicy{})
        : pot_(std::move(pot)) {
        if (!pot_.integrable())
            throw std::invalid_argument(
                "potential is not normalizable: e^{-V} has infinite mass");
        if (pot_.family() == PotentialFamily::Tabulated) {
            // tabulated potentials live on the table's own interval
            // (flagged as outside the smoothness hypotheses downstream)
            choose_tabulated_domain();
        } else {
            choose_radius(policy);
        }
        log_z_ = integrate_log([&](double x) { return -pot_.V(x); }, x_lo_, x_hi_, 1e-14);
        if (!std::isfinite(log_z_))
            throw std::runtime_error("scenario: normalizing constant underflowed to zero");
    }

    const Potential& potential() const { return pot_; }
    double x_lo() const { return x_lo_; }
    double x_hi() const { return x_hi_; }
    double radius() const { return 0.5 * (x_hi_ - x_lo_); }
    Interval domain() const { return {x_lo_, x_hi_}; }
    double log_z() const { return log_z_; }
    double z() const { return std::exp(log_z_); }
    double tail_tol_achieved() const { return tail_achieved_; }
    bool outside_theory() const { return pot_.tabulated_outside_theory(); }

    // normalized density d mu / dx
    double density(double x) const { return std::exp(-pot_.V(x) - log_z_); }

    // \int g d mu by adaptive quadrature on the truncated domain
    MeasureValue moment(const std::function<double(double)>& g) const {
        auto f = [&](double x) { return g(x) * density(x); };
        QuadResult q = integrate(f, x_lo_, x_hi_, 1e-13);
        return {q.value, q.error, false};
    }

    MeasureValue measure_of(Interval a) const {
        MeasureValue mv;
        if (a.empty()) { mv.warning = true; return mv; }
        const double lo = std::max(a.lo, x_lo_), hi = std::min(a.hi, x_hi_);
        if (!(hi > lo)) { mv.warning = true; return mv; }
        mv.warning = (lo != a.lo) || (hi != a.hi);
        QuadResult q = integrate([&](double x) { return density(x); }, lo, hi, 1e-13);
        mv.value = q.value;
        mv.error = q.error;
        return mv;
    }

    // log of \int e^{h} d mu. `domain_scale` > 1 extends the quadrature past
    // the truncation radius (legitimate: V is known in closed form there);
    // used for heavy integrands whose mass peaks near or past the boundary.
    LogMoment log_exp_moment(const std::function<double(double)>& h,
                             double domain_scale = 1.0) const {
        const double lo = x_lo_ * domain_scale, hi = x_hi_ * domain_scale;
        auto g = [&](double x) { return h(x) - pot_.V(x) - log_z_; };
        LogMoment lm;
        lm.log_value = integrate_log(g, lo, hi, 1e-13);
        // integrand still rising at the edge => the moment is divergent or
        // unresolved at this truncation
        const double ge = g(hi), gi = g(hi - 0.02 * (hi - lo));
        const double ge2 = g(lo), gi2 = g(lo + 0.02 * (hi - lo));
        if (ge > gi || ge2 > gi2 || std::max(ge, ge2) > lm.log_value - 5.0)
            lm.truncation_dominated = true;
        return lm;
    }

private:
    void choose_radius(const TruncationPolicy& policy) {
        if (policy.force_radius > 0.0) {
            const double r = policy.force_radius;
            const double tb = tail_bound(r);
            const double zc =
                integrate([&](double x) { return std::exp(-pot_.V(x)); }, -r, r, 1e-12).value;
            tail_achieved_ = tb >= 0.0 && zc > 0.0 ? 2.0 * tb / zc : 1.0;
            x_lo_ = -r;
            x_hi_ = r;
            return;
        }
        double r = 1.0;
        while (true) {
            const double tb = tail_bound(r);
            if (tb >= 0.0) {
                // normalize the tail against a running estimate of Z
                const double zc =
                    integrate([&](double x) { return std::exp(-pot_.V(x)); }, -r, r, 1e-12).value;
                if (zc > 0.0 && 2.0 * tb / zc < policy.tail_tol) {
                    tail_achieved_ = 2.0 * tb / zc;
                    break;
                }
            }
            r *= 1.4142135623730951;
            if (r > policy.max_radius)
                throw std::runtime_error(
                    "scenario: truncation target unreachable within max_radius");
        }
        x_lo_ = -r;
        x_hi_ = r;
    }

    // upper bound for \int_r^inf e^{-V}, or -1 if no valid bound yet
    double tail_bound(double r) const {
        if (pot_.family() == PotentialFamily::Cauchy) {
            const double c = pot_.param();
            return std::pow(r, 1.0 - 2.0 * c) / (2.0 * c - 1.0);
        }
        const double s = pot_.dV(r);
        if (!(s > 0.0)) return -1.0;
        return std::exp(-pot_.V(r)) / s;
    }

    void choose_tabulated_domain() {
        // table endpoints define the domain; the linear extrapolation slopes
        // give an exponential tail bound
        x_lo_ = pot_.table_lo();
        x_hi_ = pot_.table_hi();
        const double sl = pot_.dV(x_hi_), sr = -pot_.dV(x_lo_);
        const double zc =
            integrate([&](double x) { return std::exp(-pot_.V(x)); }, x_lo_, x_hi_, 1e-12).value;
        tail_achieved_ = (std::exp(-pot_.V(x_hi_)) / std::max(sl, 1e-30) +
                          std::exp(-pot_.V(x_lo_)) / std::max(sr, 1e-30)) /
                         std::max(zc, 1e-300);
    }

    Potential pot_;
    double x_lo_ = 0.0, x_hi_ = 0.0;
    double log_z_ = 0.0;
    double tail_achieved_ = 0.0;
};

}  // namespace ergolab
