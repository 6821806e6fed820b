#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/fenchel.hpp"
#include "ergolab/generator.hpp"

namespace ergolab {

// W = exp(a |x|^p); carries exact expressions for (log W)' and LW/W
struct ClosedFormW {
    double a = 0.5;
    double p = 2.0;

    double log_w(double x) const { return a * std::pow(std::abs(x), p); }
    double dlog_w(double x) const {
        if (x == 0.0) return 0.0;
        return a * p * std::pow(std::abs(x), p - 1.0) * (x > 0 ? 1.0 : -1.0);
    }
    // LW/W = u' + u^2 - V'(x) u  with u = (log W)'
    double lw_over_w(const Potential& pot, double x) const {
        const double u = dlog_w(x);
        const double up = (x == 0.0 && p < 2.0) ? 0.0
                                                : a * p * (p - 1.0) * std::pow(std::abs(x), p - 2.0);
        return up + u * u - pot.dV(x) * u;
    }
    std::string tag() const {
        return "exp(" + std::to_string(a) + "*|x|^" + std::to_string(p) + ")";
    }
};

// Verified pointwise drift inequality LW <= -phi^2 W + b 1_U on the grid.
struct DriftCertificate {
    std::string candidate_tag;
    double lambda = 1.0;  // folded into phi^2 unless the caller splits it out
    double b = 0.0;
    Interval exceptional_set;
    double worst_margin = -std::numeric_limits<double>::infinity();
    bool valid = false;
    double w_min = 0.0;
    int grid_n = 0;
    // max |closed-form LW/W - discrete LW/W| when both routes were available
    double route_discrepancy = 0.0;
};

struct CertifyOptions {
    int collar = 1;          // grid cells excluded around the boundary of U
    double tol_rel = 1e-9;   // validity threshold relative to ||LW/W||_inf
};

// Checks LW <= -phi2*W + b 1_U pointwise; b is set to the smallest value
// making the inequality hold on U. LW comes from the discrete generator, or
// from the exact closed form when `cf` is given (discrepancy reported).
inline DriftCertificate certify_drift(const DiscreteGenerator& gen, std::span<const double> w,
                                      std::span<const double> phi2, Interval u,
                                      std::optional<ClosedFormW> cf = std::nullopt,
                                      CertifyOptions opt = CertifyOptions{}) {
    const int n = gen.nodes();
    DriftCertificate cert;
    cert.grid_n = n - 1;
    cert.exceptional_set = u;
    cert.w_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        if (!(w[i] > 0.0)) throw std::invalid_argument("certify_drift: W must be positive");
        cert.w_min = std::min(cert.w_min, w[i]);
    }

    std::vector<double> ratio(n);  // LW/W
    if (cf) {
        cert.candidate_tag = cf->tag();
        const auto lw = gen.apply(w);
        for (int i = 0; i < n; ++i) {
            ratio[i] = cf->lw_over_w(gen.scenario().potential(), gen.x()[i]);
            // skip the endpoint rows: the discrete Neumann closure does not
            // approximate the unbounded-domain operator there
            if (i > 0 && i + 1 < n)
                cert.route_discrepancy =
                    std::max(cert.route_discrepancy, std::abs(ratio[i] - lw[i] / w[i]));
        }
    } else {
        cert.candidate_tag = "grid";
        const auto lw = gen.apply(w);
        for (int i = 0; i < n; ++i) ratio[i] = lw[i] / w[i];
    }

    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(ratio[i]));

    // smallest b making the inequality hold on U
    double b = 0.0;
    for (int i = 0; i < n; ++i)
        if (u.contains(gen.x()[i])) b = std::max(b, (ratio[i] + phi2[i]) * w[i]);
    cert.b = b;

    // worst margin off U, excluding a one-cell collar around its boundary
    const double collar = opt.collar * gen.h();
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const double x = gen.x()[i];
        if (u.contains(x)) continue;
        if (!u.empty() && (std::abs(x - u.lo) < collar || std::abs(x - u.hi) < collar)) continue;
        worst = std::max(worst, ratio[i] + phi2[i]);
    }
    cert.worst_margin = worst;
    cert.valid = worst <= opt.tol_rel * std::max(scale, 1.0);
    return cert;
}

// Result of a resolvent-based Lyapunov construction: v solves (-L+phi)v = 1,
// rate is the certified coefficient in Lv <= -rate*v off the exceptional set.
struct LyapunovConstruction {
    std::vector<double> v;
    std::vector<double> rate;  // pointwise rate function (phi^2 in the certificate)
    double c = 0.0;            // scalar rate (Poincare route), or rho for the h-routes
    double b = 0.0;
    Interval exceptional_set;
    DriftCertificate certificate;
    bool trivial = false;  // empty U_eps(h): nothing to certify
    double residual = 0.0;
};

// Poincare route: phi = -c + 1_A, c = mu(A) min(1/(4 C_P), 1/8);
// v > 0 solves (-L + phi) v = 1 and satisfies Lv <= -c v on A^c.
inline LyapunovConstruction construct_poincare_lyapunov(const DiscreteGenerator& gen, Interval a,
                                                        double c_p) {
    if (!(c_p > 0.0)) throw std::invalid_argument("construct_poincare_lyapunov: C_P must be > 0");
    const double mu_a = gen.scenario().measure_of(a).value;
    if (!(mu_a > 0.0)) throw std::invalid_argument("construct_poincare_lyapunov: mu(A) = 0");
    const double c = mu_a * std::min(1.0 / (4.0 * c_p), 0.125);

    const int n = gen.nodes();
    std::vector<double> phi(n), one(n, 1.0);
    for (int i = 0; i < n; ++i) phi[i] = -c + (a.contains(gen.x()[i]) ? 1.0 : 0.0);

    LyapunovConstruction out;
    out.v = gen.resolvent_solve(phi, one);
    out.c = c;
    out.exceptional_set = a;
    for (double vi : out.v)
        if (!(vi > 0.0))
            throw std::runtime_error(
                "construct_poincare_lyapunov: resolvent solution lost positivity");
    // residual ||(-L+phi)v - 1||_inf
    auto lv = gen.apply(out.v);
    for (int i = 0; i < n; ++i)
        out.residual = std::max(out.residual, std::abs(-lv[i] + phi[i] * out.v[i] - 1.0));
    out.rate.assign(n, c);
    out.certificate = certify_drift(gen, out.v, out.rate, a);
    out.b = out.certificate.b;
    return out;
}

namespace detail {

// shared resolvent pipeline for the entropic and F-Sobolev routes:
// phi = rho(b - h), v solves (-L+phi)v = 1, drift rate eps*rho*h holds on
// U_eps(h) = {(1-eps)h >= b} (>= at grid nodes).
inline LyapunovConstruction h_route(const DiscreteGenerator& gen, std::span<const double> h,
                                    double rho, double b, double eps) {
    const int n = gen.nodes();
    std::vector<double> phi(n), one(n, 1.0);
    for (int i = 0; i < n; ++i) phi[i] = rho * (b - h[i]);

    LyapunovConstruction out;
    out.v = gen.resolvent_solve(phi, one);
    out.c = rho;
    out.b = b;
    for (double vi : out.v)
        if (!(vi > 0.0))
            throw std::runtime_error("lyapunov h-route: resolvent solution lost positivity");
    auto lv = gen.apply(out.v);
    for (int i = 0; i < n; ++i)
        out.residual = std::max(out.residual, std::abs(-lv[i] + phi[i] * out.v[i] - 1.0));

    // U_eps(h) and its complement (an interval for coercive symmetric h)
    out.rate.assign(n, 0.0);
    double lo = gen.scenario().x_lo(), hi = gen.scenario().x_hi();
    bool any = false, all = true;
    double clo = std::numeric_limits<double>::infinity(), chi = -clo;
    for (int i = 0; i < n; ++i) {
        if ((1.0 - eps) * h[i] >= b) {
            out.rate[i] = eps * rho * h[i];
            any = true;
        } else {
            clo = std::min(clo, gen.x()[i]);
            chi = std::max(chi, gen.x()[i]);
            all = false;
        }
    }
    (void)lo; (void)hi;
    if (!any) {
        out.trivial = true;
        out.exceptional_set = gen.scenario().domain();
        out.certificate.valid = true;
        out.certificate.candidate_tag = "trivial (empty U_eps)";
        return out;
    }
    out.exceptional_set = all ? Interval{0.0, 0.0} : Interval{clo, chi};
    out.certificate = certify_drift(gen, out.v, out.rate, out.exceptional_set);
    return out;
}

}  // namespace detail

// Log-Sobolev route: b = 2 mu(e^h), rho = 1/(2 C_LS).
inline LyapunovConstruction construct_entropic_lyapunov(const DiscreteGenerator& gen,
                                                        const std::function<double(double)>& h,
                                                        double c_ls, double eps = 0.1) {
    if (!(c_ls > 0.0)) throw std::invalid_argument("construct_entropic_lyapunov: C_LS > 0");
    const LogMoment m = gen.scenario().log_exp_moment(h);
    if (m.truncation_dominated || !std::isfinite(m.log_value))
        throw std::runtime_error(
            "construct_entropic_lyapunov: h not exponentially integrable at this truncation");
    const double b = 2.0 * std::exp(m.log_value);
    const double rho = 1.0 / (2.0 * c_ls);
    return detail::h_route(gen, gen.sample(h), rho, b, eps);
}

// F-Sobolev route: b = 2 (D_F + mu(G*(h))), rho C_F = 1/2.
inline LyapunovConstruction construct_fsobolev_lyapunov(const DiscreteGenerator& gen,
                                                        const FSpec& fspec,
                                                        const std::function<double(double)>& h,
                                                        double eps = 0.1) {
    const LogMoment m =
        gen.scenario().log_exp_moment([&](double x) { return fspec.log_dual(h(x)); });
    if (m.truncation_dominated || !std::isfinite(m.log_value) || m.log_value > 600.0)
        throw std::runtime_error(
            "construct_fsobolev_lyapunov: mu(G*(h)) diverges at this truncation");
    const double b = 2.0 * (fspec.D_F() + std::exp(m.log_value));
    const double rho = 0.5 / fspec.C_F();
    return detail::h_route(gen, gen.sample(h), rho, b, eps);
}

}  // namespace ergolab
