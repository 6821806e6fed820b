#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/generator.hpp"
#include "ergolab/lyapunov.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// psi forced to 0 on [-k, k] with a C^1 smoothstep ramp of width `ramp`
// (one grid cell by default); keeps |psi'| finite where psi turns on.
inline std::function<double(double)> zero_on_compact(std::function<double(double)> psi,
                                                     double k, double ramp) {
    if (!(ramp > 0.0)) throw std::invalid_argument("zero_on_compact: ramp width must be > 0");
    return [psi = std::move(psi), k, ramp](double x) {
        const double s = (std::abs(x) - k) / ramp;
        if (s <= 0.0) return 0.0;
        if (s >= 1.0) return psi(x);
        return psi(x) * s * s * (3.0 - 2.0 * s);
    };
}

// b / min over the closure of C of W, for a drift certificate (W, b, C)
inline double b_bar_of(const DiscreteGenerator& gen, std::span<const double> w, double b,
                       Interval c) {
    double wmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < gen.nodes(); ++i)
        if (c.contains(gen.x()[i])) wmin = std::min(wmin, w[i]);
    if (!std::isfinite(wmin))
        throw std::invalid_argument("b_bar_of: C contains no grid node");
    return b / wmin;
}

// The four suprema gating the moment recursion, the contraction constant
// delta (< 1 required), and the growth factor a they imply:
//   psi^2 psi'^2 / phi^2 <= alpha       |psi phi' psi' / phi^3| <= beta
//   phi'^2 / phi^4 <= delta             sup_C psi^2 / phi^2 <= gamma
struct ConditionConstants {
    double alpha = 0.0, beta = 0.0, gamma = 0.0, delta = 0.0;
    double b_bar = 0.0;
    double a = 0.0;           // smallest admissible growth factor + headroom
    double a_prime_max = 0.0; // 1/a
    double k_radius = 0.0;    // compact [-k,k] where psi was zeroed
    bool valid = false;       // delta < 1 and everything finite
    std::string violation;    // where delta >= 1, when invalid
};

struct CondOptions {
    std::vector<double> k_schedule;  // radii to try for K; empty: automatic
    int collar = 1;                  // nodes skipped around K and the endpoints
    double a_headroom = 1e-6;        // a = (1 + headroom) * formula value
};

// Evaluates the four suprema on grid nodes outside K = [-k, k] (one-node
// collar past the psi ramp), searching k over a schedule and keeping the
// smallest k achieving delta < 1. psi is ramped to 0 on K internally; pass
// the raw candidate. Gradients are central differences on the grid.
inline ConditionConstants condition_constants(const DiscreteGenerator& gen,
                                              const std::function<double(double)>& phi,
                                              const std::function<double(double)>& psi,
                                              Interval c, double b_bar,
                                              CondOptions opt = CondOptions{}) {
    const int n = gen.nodes();
    const double h = gen.h();
    const double r_dom = std::min(-gen.scenario().x_lo(), gen.scenario().x_hi());

    std::vector<double> ks = opt.k_schedule;
    if (ks.empty()) {
        ks.push_back(0.0);
        for (double k = 4.0 * h; k < 0.5 * r_dom; k *= 1.5) ks.push_back(k);
    }

    auto phig = gen.sample(phi);
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(phig[i]))
            throw std::invalid_argument("condition_constants: phi non-finite on the grid");

    ConditionConstants best;
    best.b_bar = b_bar;
    std::string last_violation;
    for (double k : ks) {
        auto psik = zero_on_compact(psi, k, h);
        auto psig = gen.sample(psik);
        // skip K, the ramp cell, and a collar node on each side of it
        const double cut = k + h * (1.0 + opt.collar);
        ConditionConstants cc;
        cc.b_bar = b_bar;
        cc.k_radius = k;
        double worst_delta_x = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double x = gen.x()[i];
            if (std::abs(x) <= cut) continue;
            const double dphi = (phig[i + 1] - phig[i - 1]) / (2.0 * h);
            const double dpsi = (psig[i + 1] - psig[i - 1]) / (2.0 * h);
            const double p2 = phig[i] * phig[i];
            if (!(p2 > 0.0)) {
                cc.delta = std::numeric_limits<double>::infinity();
                worst_delta_x = x;
                break;
            }
            const double d_here = dphi * dphi / (p2 * p2);
            if (d_here > cc.delta) {
                cc.delta = d_here;
                worst_delta_x = x;
            }
            cc.alpha = std::max(cc.alpha, psig[i] * psig[i] * dpsi * dpsi / p2);
            cc.beta = std::max(cc.beta,
                               std::abs(psig[i] * dphi * dpsi / (p2 * phig[i])));
        }
        for (int i = 0; i < n; ++i) {
            const double x = gen.x()[i];
            if (!c.contains(x)) continue;
            const double p2 = phig[i] * phig[i];
            if (psig[i] == 0.0) continue;  // psi vanishes there, ratio is 0
            cc.gamma = std::max(cc.gamma, p2 > 0.0
                                              ? psig[i] * psig[i] / p2
                                              : std::numeric_limits<double>::infinity());
        }
        if (cc.delta < 1.0 && std::isfinite(cc.alpha) && std::isfinite(cc.beta) &&
            std::isfinite(cc.gamma)) {
            const double q = 1.0 - cc.delta;
            const double base =
                0.5 * (2.0 * cc.beta / q +
                       std::sqrt(4.0 * cc.beta * cc.beta / (q * q) + 4.0 * cc.alpha / q));
            cc.a = (1.0 + opt.a_headroom) * base;
            cc.a_prime_max = cc.a > 0.0 ? 1.0 / cc.a : std::numeric_limits<double>::infinity();
            cc.valid = true;
            return cc;
        }
        last_violation = "1/phi not a contraction outside |x| <= " + std::to_string(k) +
                         " (delta = " + std::to_string(cc.delta) + " at x = " +
                         std::to_string(worst_delta_x) + ")";
        best = cc;
    }
    best.valid = false;
    best.violation = last_violation;
    return best;
}

// ln beta_n for beta_n = int psi^{2n} d mu, computed in log space on an
// extended quadrature domain (the integrand's peak migrates outward with n).
struct MomentSequence {
    int n_max = 0;
    std::vector<double> log_beta;  // index 0..n_max, log_beta[0] = 0
    std::vector<double> ratio;     // beta_n / (n beta_{n-1}), index 1..n_max
    bool reduced = false;          // n_max lowered because the tail was unresolved
    std::string warning;
};

inline MomentSequence moment_sequence(const Scenario& sc,
                                      const std::function<double(double)>& psi,
                                      int n_max = 30) {
    if (n_max < 1) throw std::invalid_argument("moment_sequence: n_max >= 1");
    MomentSequence ms;
    ms.log_beta.push_back(0.0);
    for (int nn = 1; nn <= n_max; ++nn) {
        // extend the domain so the peak of psi^{2n} e^{-V} is well inside
        const double scale = std::max(1.0, 3.0 * std::sqrt(static_cast<double>(nn)) /
                                               std::max(sc.radius(), 1.0) + 1.0);
        const LogMoment m = sc.log_exp_moment(
            [&](double x) {
                const double p = std::abs(psi(x));
                return p > 0.0 ? 2.0 * nn * std::log(p)
                               : -std::numeric_limits<double>::infinity();
            },
            scale);
        if (m.truncation_dominated) {
            ms.reduced = true;
            ms.warning = "tail unresolved at n = " + std::to_string(nn) +
                         "; sequence truncated";
            break;
        }
        ms.log_beta.push_back(m.log_value);
        const int i = static_cast<int>(ms.log_beta.size()) - 1;
        // psi == 0 gives log_beta = -inf throughout; the ratio is then 0
        ms.ratio.push_back(std::isfinite(ms.log_beta[i])
                               ? std::exp(ms.log_beta[i] - ms.log_beta[i - 1]) / i
                               : 0.0);
    }
    ms.n_max = static_cast<int>(ms.log_beta.size()) - 1;
    if (ms.n_max < 1) throw std::runtime_error("moment_sequence: no moment resolved");
    return ms;
}

struct RecursionReport {
    int max_n = 0;
    double worst_slack = std::numeric_limits<double>::infinity();  // min log(RHS/LHS)
    int n0 = 1;               // first n from which beta_n <= a n beta_{n-1} holds onward
    double a_observed = 0.0;  // max_n>=n0 of beta_n / (n beta_{n-1})
    double c_fit = 0.0;       // smallest c with beta_n <= c a^n n! for all n
    bool pass = false;
};

namespace detail {
inline double logsumexp2(double la, double lb) {
    const double m = std::max(la, lb);
    if (!std::isfinite(m)) return m;
    return m + std::log(std::exp(la - m) + std::exp(lb - m));
}
}  // namespace detail

// Verifies, in log space, the two-term recursion
//   beta_n <= (alpha/(1-delta)) n^2 beta_{n-2} + ((2n beta + gamma b_bar)/(1-delta)) beta_{n-1}
// for every computed n >= 2, the collapsed bound beta_n <= a n beta_{n-1}
// from some n0 onward, and beta_n <= c a^n n! with fitted c. A violation of
// the two-term recursion is a hard failure: it is theorem-backed given valid
// constants, so it can only mean an implementation bug.
inline RecursionReport recursion_check(const MomentSequence& ms, const ConditionConstants& cc) {
    if (!cc.valid) throw std::invalid_argument("recursion_check: constants not valid");
    RecursionReport rep;
    rep.max_n = ms.n_max;
    const double q = 1.0 - cc.delta;
    const bool vacuous =
        ms.log_beta.size() > 1 && !std::isfinite(ms.log_beta[1]) && ms.log_beta[1] < 0;
    if (vacuous) {  // psi == 0: every inequality is 0 <= RHS
        rep.worst_slack = std::numeric_limits<double>::infinity();
        rep.pass = true;
        return rep;
    }
    for (int nn = 2; nn <= ms.n_max; ++nn) {
        const double t1 = std::log(cc.alpha / q * nn * nn) + ms.log_beta[nn - 2];
        const double t2 =
            std::log((2.0 * nn * cc.beta + cc.gamma * cc.b_bar) / q) + ms.log_beta[nn - 1];
        const double slack = detail::logsumexp2(t1, t2) - ms.log_beta[nn];
        rep.worst_slack = std::min(rep.worst_slack, slack);
        if (slack < -1e-9)
            throw std::runtime_error("recursion_check: two-term recursion violated at n = " +
                                     std::to_string(nn));
    }
    // collapsed bound: find the first n0 from which ratio <= a holds onward
    rep.n0 = ms.n_max + 1;
    for (int nn = ms.n_max; nn >= 1; --nn) {
        if (ms.ratio[nn - 1] <= cc.a)
            rep.n0 = nn;
        else
            break;
    }
    if (rep.n0 > ms.n_max)
        throw std::runtime_error("recursion_check: collapsed bound fails at n = " +
                                 std::to_string(ms.n_max));
    for (int nn = rep.n0; nn <= ms.n_max; ++nn)
        rep.a_observed = std::max(rep.a_observed, ms.ratio[nn - 1]);
    // c from beta_n <= c a^n n!
    double lc = 0.0, lfac = 0.0;
    for (int nn = 1; nn <= ms.n_max; ++nn) {
        lfac += std::log(static_cast<double>(nn));
        lc = std::max(lc, ms.log_beta[nn] - nn * std::log(cc.a) - lfac);
    }
    rep.c_fit = std::exp(lc);
    rep.pass = true;
    return rep;
}

struct ExpMomentReport {
    double direct = 0.0;
    double series = 0.0;          // partial sum to n_max
    double series_tail_bound = 0.0;  // analytic bound on the dropped tail
    double bound = 0.0;           // c / (1 - a' a)
    bool consistent = false;      // |direct - series| <= tail bound + quadrature slop
};

// int e^{a' psi^2} d mu two ways: direct quadrature and the moment series
// sum a'^n beta_n / n!. Requires a' < 1/a; the dropped series tail is bounded
// by c (a'a)^{n_max+1} / (1 - a'a).
inline ExpMomentReport exponential_moment(const Scenario& sc,
                                          const std::function<double(double)>& psi,
                                          double a_prime, const ConditionConstants& cc,
                                          const MomentSequence& ms,
                                          const RecursionReport& rec) {
    if (!(a_prime >= 0.0)) throw std::invalid_argument("exponential_moment: a' >= 0");
    if (!(a_prime < cc.a_prime_max))
        throw std::invalid_argument("exponential_moment: a' >= 1/a");
    ExpMomentReport out;

    const LogMoment dm = sc.log_exp_moment(
        [&](double x) {
            const double p = psi(x);
            return a_prime * p * p;
        },
        2.0);
    if (dm.truncation_dominated)
        throw std::runtime_error(
            "exponential_moment: direct quadrature divergent at truncation with a' < 1/a");
    out.direct = std::exp(dm.log_value);

    const double la = a_prime > 0.0 ? std::log(a_prime) : -std::numeric_limits<double>::infinity();
    double ls = 0.0;  // n = 0 term
    double lfac = 0.0;
    for (int nn = 1; nn <= ms.n_max; ++nn) {
        lfac += std::log(static_cast<double>(nn));
        if (std::isfinite(ms.log_beta[nn]))
            ls = detail::logsumexp2(ls, nn * la + ms.log_beta[nn] - lfac);
    }
    out.series = std::exp(ls);

    const double r = a_prime * cc.a;
    out.series_tail_bound =
        rec.c_fit * std::exp((ms.n_max + 1) * std::log(std::max(r, 1e-300))) / (1.0 - r);
    out.bound = rec.c_fit / (1.0 - r);
    out.consistent =
        std::abs(out.direct - out.series) <= out.series_tail_bound + 1e-9 * (1.0 + out.direct);
    return out;
}

struct WeightedPoincareReport {
    double worst_rel_slack = std::numeric_limits<double>::infinity();  // min over tests
    int n_tests = 0;
    double weighted_constant = 0.0;  // 1 + b_bar e^{Osc_C V} |C|^2 / pi^2
    bool pass = false;
};

// Checks, for a certificate LW <= -phi^2 W + b 1_C on the grid, the energy
// inequality  sum mu h^2 phi^2 <= E(h) + b_bar sum_{C} mu h^2  on a suite of
// test functions (polynomial modes, a bump off C, and seeded random grid
// vectors). Given the certificate this is an identity-backed inequality, so
// slack below -tol_rel (relative) is a hard failure.
inline WeightedPoincareReport phi_lyap_to_poincare_check(const DiscreteGenerator& gen,
                                                         std::span<const double> phi2,
                                                         std::span<const double> w, double b,
                                                         Interval c, int n_random = 100,
                                                         std::uint64_t seed = 7,
                                                         double tol_rel = 1e-8) {
    const int n = gen.nodes();
    const double bbar = b_bar_of(gen, w, b, c);
    WeightedPoincareReport rep;

    auto check = [&](std::span<const double> hv) {
        double lhs = 0.0, massc = 0.0;
        for (int i = 0; i < n; ++i) {
            lhs += gen.mu()[i] * hv[i] * hv[i] * phi2[i];
            if (c.contains(gen.x()[i])) massc += gen.mu()[i] * hv[i] * hv[i];
        }
        const double rhs = gen.dirichlet_form(hv) + bbar * massc;
        const double scale = std::max({lhs, rhs, 1e-300});
        const double slack = (rhs - lhs) / scale;
        rep.worst_rel_slack = std::min(rep.worst_rel_slack, slack);
        ++rep.n_tests;
    };

    std::vector<double> hv(n);
    // polynomial modes 1, x, x^2 - 1, x^3 - 3x, x^4 - 6x^2 + 3
    const double r = std::max(std::abs(gen.x().front()), std::abs(gen.x().back()));
    auto poly = [&](int k, double x) {
        const double t = x;  // unscaled: only the inequality matters, not conditioning
        switch (k) {
            case 0: return 1.0;
            case 1: return t;
            case 2: return t * t - 1.0;
            case 3: return t * (t * t - 3.0);
            default: return t * t * (t * t - 6.0) + 3.0;
        }
    };
    for (int k = 0; k <= 4; ++k) {
        for (int i = 0; i < n; ++i) hv[i] = poly(k, gen.x()[i]);
        check(hv);
    }
    // bump supported away from C, against the small-energy reading
    const double mid = c.hi + 0.25 * (r - c.hi);
    const double wid = std::max(0.1 * (r - c.hi), 4.0 * gen.h());
    for (int i = 0; i < n; ++i) {
        const double t = (gen.x()[i] - mid) / wid;
        hv[i] = std::abs(t) < 1.0 ? (1.0 - t * t) * (1.0 - t * t) : 0.0;
    }
    check(hv);
    // seeded random grid functions
    CounterRng rng(seed, 0);
    for (int s = 0; s < n_random; ++s) {
        for (int i = 0; i < n; ++i) hv[i] = rng.next_normal();
        check(hv);
    }

    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (int i = 0; i < n; ++i)
        if (c.contains(gen.x()[i])) {
            const double v = gen.scenario().potential().V(gen.x()[i]);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    const double pi = 3.141592653589793;
    rep.weighted_constant =
        1.0 + bbar * std::exp(vmax - vmin) * c.length() * c.length() / (pi * pi);
    rep.pass = rep.worst_rel_slack >= -tol_rel;
    if (!rep.pass)
        throw std::runtime_error("phi_lyap_to_poincare_check: energy inequality violated, slack " +
                                 std::to_string(rep.worst_rel_slack));
    return rep;
}

}  // namespace ergolab
