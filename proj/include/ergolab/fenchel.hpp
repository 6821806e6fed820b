#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace ergolab {

struct DualValue {
    double value = 0.0;
    bool unbounded = false;  // sup is +inf (G sublinear at infinity)
};

// An F-Sobolev profile: F on [0, inf), G(u) = u F(u), the Fenchel-Legendre
// dual G*(t) = sup_{u>0} (ut - G(u)), and its inverse. Built-in family is
// F = ln_+^beta; a user hook can replace F.
class FSpec {
public:
    static FSpec logplus_power(double beta, double c_f, double d_f = 0.0) {
        FSpec fs;
        fs.beta_ = beta;
        fs.c_f_ = c_f;
        fs.d_f_ = d_f;
        return fs;
    }

    static FSpec custom(std::function<double(double)> f, double c_f, double d_f = 0.0) {
        FSpec fs;
        fs.custom_f_ = std::move(f);
        fs.c_f_ = c_f;
        fs.d_f_ = d_f;
        return fs;
    }

    double C_F() const { return c_f_; }
    double D_F() const { return d_f_; }
    double beta() const { return beta_; }

    double F(double u) const {
        if (custom_f_) return custom_f_(u);
        if (u <= 1.0) return 0.0;
        return std::pow(std::log(u), beta_);
    }

    double G(double u) const { return u <= 0.0 ? 0.0 : u * F(u); }

    // G*(t) by golden-section maximization of u(t - F(u)) over a bracketed
    // unimodal range
    DualValue dual(double t) const {
        if (t < 0.0) return {0.0, false};  // G >= 0, G(0)=0 => G*(t)=0 for t<=0
        const double lg = log_dual(t);
        if (lg == std::numeric_limits<double>::infinity()) return {lg, true};
        return {std::exp(lg), false};
    }

    // log G*(t), stable for large t
    double log_dual(double t) const {
        if (t <= 0.0) return -std::numeric_limits<double>::infinity();
        if (custom_f_) return log_dual_generic(t);
        // ln G*(t) = sup_{0 <= w < t^{1/beta}} [ w + ln(t - w^beta) ]
        const double wmax = std::pow(t, 1.0 / beta_);
        auto obj = [&](double w) {
            const double r = t - std::pow(w, beta_);
            return r > 0.0 ? w + std::log(r) : -std::numeric_limits<double>::infinity();
        };
        return golden_max(obj, 0.0, wmax);
    }

    // smallest t with G*(t) >= y, bisection on the computed dual
    double dual_inverse(double y) const {
        if (y <= 0.0) return 0.0;
        return log_dual_inverse(std::log(y));
    }

    double log_dual_inverse(double log_y) const {
        double lo = 0.0, hi = 1.0;
        int guard = 0;
        while (log_dual(hi) < log_y) {
            hi *= 2.0;
            if (++guard > 200) throw std::runtime_error("fenchel: dual inverse out of range");
        }
        for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (log_dual(mid) < log_y ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    }

private:
    template <class Obj>
    static double golden_max(Obj&& f, double a, double b) {
        const double gr = 0.6180339887498949;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = f(x1), f2 = f(x2);
        for (int it = 0; it < 300 && b - a > 1e-13 * (1.0 + std::abs(b)); ++it) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a); f2 = f(x2);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a); f1 = f(x1);
            }
        }
        return std::max(f1, f2);
    }

    // generic route for custom F: maximize w + ln(t - F(e^w)), expanding the
    // bracket; detects an unbounded supremum
    double log_dual_generic(double t) const {
        auto obj = [&](double w) {
            const double r = t - F(std::exp(w));
            return r > 0.0 ? w + std::log(r) : -std::numeric_limits<double>::infinity();
        };
        double hi = 1.0;
        while (obj(hi) > obj(hi - 0.5)) {
            hi *= 2.0;
            if (hi > 1e6) return std::numeric_limits<double>::infinity();
        }
        return golden_max(obj, -60.0, hi);
    }

    std::function<double(double)> custom_f_;
    double beta_ = 1.0;
    double c_f_ = 1.0;
    double d_f_ = 0.0;
};

}  // namespace ergolab
