#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergolab {

enum class PotentialFamily { Quadratic, Power, LogPower, Cauchy, Tabulated };

inline const char* family_name(PotentialFamily f) {
    switch (f) {
        case PotentialFamily::Quadratic: return "quadratic";
        case PotentialFamily::Power: return "power";
        case PotentialFamily::LogPower: return "logpower";
        case PotentialFamily::Cauchy: return "cauchy";
        case PotentialFamily::Tabulated: return "table";
    }
    return "?";
}

// Monotone (Fritsch-Carlson) cubic interpolant for tabulated potentials.
// Extrapolates linearly beyond the table with the end slopes.
class MonotoneSpline {
public:
    MonotoneSpline() = default;
    MonotoneSpline(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("spline: need >= 2 points, equal sizes");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("spline: x must be strictly increasing");
        std::vector<double> d(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_.assign(n, 0.0);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (size_t i = 1; i + 1 < n; ++i)
            m_[i] = (d[i - 1] * d[i] > 0) ? 2.0 * d[i - 1] * d[i] / (d[i - 1] + d[i]) : 0.0;
        // Fritsch-Carlson limiter
        for (size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) { m_[i] = m_[i + 1] = 0.0; continue; }
            const double a = m_[i] / d[i], b = m_[i + 1] / d[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                m_[i] = t * a * d[i];
                m_[i + 1] = t * b * d[i];
            }
        }
    }

    double operator()(double x) const { return eval(x, 0); }
    double deriv(double x) const { return eval(x, 1); }
    double xmin() const { return x_.front(); }
    double xmax() const { return x_.back(); }

private:
    double eval(double x, int order) const {
        const size_t n = x_.size();
        if (x <= x_.front())
            return order ? m_.front() : y_.front() + m_.front() * (x - x_.front());
        if (x >= x_.back())
            return order ? m_.back() : y_.back() + m_.back() * (x - x_.back());
        size_t i = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1;
        const double hh = x_[i + 1] - x_[i], t = (x - x_[i]) / hh;
        const double h00 = 2 * t * t * t - 3 * t * t + 1, h10 = t * t * t - 2 * t * t + t;
        const double h01 = -2 * t * t * t + 3 * t * t, h11 = t * t * t - t * t;
        if (order == 0)
            return h00 * y_[i] + hh * h10 * m_[i] + h01 * y_[i + 1] + hh * h11 * m_[i + 1];
        const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
        const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
        return (d00 * y_[i] + hh * d10 * m_[i] + d01 * y_[i + 1] + hh * d11 * m_[i + 1]) / hh;
    }

    std::vector<double> x_, y_, m_;
};

// Confining potential V with closed-form V' and V''.
//   quadratic:  V = x^2/2
//   power:      V = |x|^alpha, alpha >= 1
//   logpower:   V = (1+x^2) ln^beta(1+x^2), beta > 0
//   cauchy:     V = c ln(1+x^2)
//   table:      monotone-cubic interpolation of (x, V) samples
class Potential {
public:
    static Potential quadratic() { return Potential(PotentialFamily::Quadratic, 0.0); }

    static Potential power(double alpha) {
        if (!(alpha >= 1.0)) throw std::invalid_argument("power family requires alpha >= 1");
        return Potential(PotentialFamily::Power, alpha);
    }

    static Potential logpower(double beta) {
        if (!(beta > 0.0)) throw std::invalid_argument("logpower family requires beta > 0");
        return Potential(PotentialFamily::LogPower, beta);
    }

    static Potential cauchy(double c) {
        if (!(c > 0.0)) throw std::invalid_argument("cauchy family requires c > 0");
        return Potential(PotentialFamily::Cauchy, c);
    }

    static Potential tabulated(std::vector<double> x, std::vector<double> v) {
        Potential p(PotentialFamily::Tabulated, 0.0);
        p.spline_ = MonotoneSpline(std::move(x), std::move(v));
        return p;
    }

    PotentialFamily family() const { return family_; }
    double param() const { return param_; }
    // table range; only meaningful for the tabulated family
    double table_lo() const { return spline_.xmin(); }
    double table_hi() const { return spline_.xmax(); }
    bool tabulated_outside_theory() const { return family_ == PotentialFamily::Tabulated; }

    double V(double x) const {
        switch (family_) {
            case PotentialFamily::Quadratic: return 0.5 * x * x;
            case PotentialFamily::Power: return std::pow(std::abs(x), param_);
            case PotentialFamily::LogPower: {
                const double u = 1.0 + x * x;
                const double l = std::log(u);
                return u * std::pow(l, param_);
            }
            case PotentialFamily::Cauchy: return param_ * std::log1p(x * x);
            case PotentialFamily::Tabulated: return spline_(x);
        }
        return 0.0;
    }

    double dV(double x) const {
        switch (family_) {
            case PotentialFamily::Quadratic: return x;
            case PotentialFamily::Power: {
                if (x == 0.0) return 0.0;
                return param_ * std::pow(std::abs(x), param_ - 1.0) * (x > 0 ? 1.0 : -1.0);
            }
            case PotentialFamily::LogPower: {
                const double u = 1.0 + x * x;
                const double l = std::log(u);
                if (l == 0.0) return 0.0;
                return 2.0 * x * (std::pow(l, param_) + param_ * std::pow(l, param_ - 1.0));
            }
            case PotentialFamily::Cauchy: return param_ * 2.0 * x / (1.0 + x * x);
            case PotentialFamily::Tabulated: return spline_.deriv(x);
        }
        return 0.0;
    }

    double ddV(double x) const {
        switch (family_) {
            case PotentialFamily::Quadratic: return 1.0;
            case PotentialFamily::Power: {
                if (param_ == 1.0) return 0.0;
                if (x == 0.0) return param_ >= 2.0 ? 0.0 : std::numeric_limits<double>::infinity();
                return param_ * (param_ - 1.0) * std::pow(std::abs(x), param_ - 2.0);
            }
            default: {
                // centered difference is accurate enough for the remaining
                // families; ddV is only used in diagnostics
                const double h = 1e-5 * std::max(1.0, std::abs(x));
                return (dV(x + h) - dV(x - h)) / (2.0 * h);
            }
        }
    }

    // true if e^{-V} is integrable on the line
    bool integrable() const {
        switch (family_) {
            case PotentialFamily::Cauchy: return param_ > 0.5;
            case PotentialFamily::Tabulated: return spline_.deriv(spline_.xmax()) > 0 &&
                                                    spline_.deriv(spline_.xmin()) < 0;
            default: return true;
        }
    }

private:
    Potential(PotentialFamily f, double p) : family_(f), param_(p) {}

    PotentialFamily family_;
    double param_;
    MonotoneSpline spline_;
};

}  // namespace ergolab
