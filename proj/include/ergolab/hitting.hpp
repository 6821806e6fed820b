#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "ergolab/generator.hpp"
#include "ergolab/rng.hpp"

namespace ergolab {

// threshold theta*(h,U): largest theta with E_x exp(theta int h dt) finite,
// i.e. the smallest h-weighted Dirichlet eigenvalue of -L outside U
inline double critical_theta(const DiscreteGenerator& gen, Interval u,
                             std::span<const double> h) {
    return gen.weighted_dirichlet_threshold(u, h);
}

inline double critical_theta(const DiscreteGenerator& gen, Interval u) {
    std::vector<double> one(gen.nodes(), 1.0);
    return critical_theta(gen, u, one);
}

// w(x) = E_x exp(int_0^{T_U} theta h(X_s) ds) on the grid, by solving
// (-L - theta h) w = 0 off U with w = 1 on U and Neumann outer endpoints.
// Requires theta < theta*(h,U).
inline std::vector<double> fk_moment(const DiscreteGenerator& gen, Interval u, double theta,
                                     std::span<const double> h) {
    if (theta < 0.0) throw std::invalid_argument("fk_moment: theta must be >= 0");
    const double tstar = critical_theta(gen, u, h);
    if (theta >= tstar)
        throw std::runtime_error("fk_moment: theta >= theta*(h,U) = " + std::to_string(tstar));

    const int n = gen.nodes();
    std::vector<double> w(n, 1.0);
    for (const auto& c : gen.exterior_components(u)) {
        const int m = c.size();
        std::vector<double> sub(m), dia(m), sup(m), rhs(m, 0.0);
        for (int i = c.begin; i < c.end; ++i) {
            const int k = i - c.begin;
            dia[k] = -gen.diag(i) - theta * h[i];
            sub[k] = (i > c.begin) ? -gen.sub(i) : 0.0;
            sup[k] = (i + 1 < c.end) ? -gen.sup(i) : 0.0;
        }
        // absorbing neighbors carry w = 1
        if (c.absorb_right >= 0) rhs[c.end - 1 - c.begin] += gen.sup(c.end - 1);
        if (c.absorb_left >= 0) rhs[0] += gen.sub(c.begin);
        auto sol = tridiag_solve(sub, dia, sup, rhs);
        for (int k = 0; k < m; ++k) {
            if (!(sol[k] >= 1.0 - 1e-9))
                throw std::runtime_error("fk_moment: solution lost positivity (theta too large)");
            w[c.begin + k] = sol[k];
        }
    }
    return w;
}

struct MCEstimate {
    double value = 1.0;
    double stderr_ = 0.0;
    long n_paths = 0;
    double dt = 0.0;
    long truncation_hits = 0;  // paths that touched the reflecting boundary
    long capped_paths = 0;     // paths stopped by the time cap
    bool possibly_divergent = false;
    std::uint64_t seed = 0;
};

struct MCOptions {
    long n_paths = 100000;
    double dt = 1e-3;
    std::uint64_t seed = 0;
    double time_cap = 0.0;  // 0: choose 50/theta_hint
    double theta_hint = 1.0;
    int threads = 0;  // 0: hardware concurrency
};

// Monte Carlo route: Euler-Maruyama paths of dX = -V'(X) dt + sqrt(2) dB,
// reflected at the truncation boundary; A accumulates theta*h(X)*dt until
// first entry into U; returns mean and stderr of e^A.
// Deterministic for fixed (seed, n_paths, dt) regardless of thread count:
// path p uses counter stream (seed, p) and the reduction order is fixed.
inline MCEstimate mc_moment(const Scenario& sc, Interval u, double theta,
                            const std::function<double(double)>& h, double x0,
                            MCOptions opt = MCOptions{}) {
    if (opt.n_paths < 1000) throw std::invalid_argument("mc_moment: need n_paths >= 1000");
    const double cap = opt.time_cap > 0.0 ? opt.time_cap : 50.0 / std::max(opt.theta_hint, 1e-6);
    const double lo = sc.x_lo(), hi = sc.x_hi();
    const double sq2dt = std::sqrt(2.0 * opt.dt);
    const long steps_cap = static_cast<long>(cap / opt.dt) + 1;

    std::vector<double> vals(opt.n_paths);
    std::vector<unsigned char> reflected(opt.n_paths, 0), capped(opt.n_paths, 0);

    auto run_range = [&](long p0, long p1) {
        for (long p = p0; p < p1; ++p) {
            CounterRng rng(opt.seed, static_cast<std::uint64_t>(p));
            double x = x0, acc = 0.0;
            bool hit = u.contains(x);
            for (long s = 0; !hit && s < steps_cap; ++s) {
                acc += theta * h(x) * opt.dt;
                const double xn = x - sc.potential().dV(x) * opt.dt + sq2dt * rng.next_normal();
                double xr = xn;
                if (xr > hi) { xr = 2.0 * hi - xr; reflected[p] = 1; }
                if (xr < lo) { xr = 2.0 * lo - xr; reflected[p] = 1; }
                // sign change across either face of U counts as a hit
                if (u.contains(xr) || (x > u.hi && xr < u.hi) || (x < u.lo && xr > u.lo))
                    hit = true;
                x = xr;
            }
            if (!hit) capped[p] = 1;
            vals[p] = std::exp(acc);
        }
    };

    int nt = opt.threads > 0 ? opt.threads
                             : static_cast<int>(std::thread::hardware_concurrency());
    if (nt < 1) nt = 1;
    if (nt == 1) {
        run_range(0, opt.n_paths);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (opt.n_paths + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const long p0 = t * chunk, p1 = std::min<long>(opt.n_paths, p0 + chunk);
            if (p0 < p1) pool.emplace_back(run_range, p0, p1);
        }
        for (auto& th : pool) th.join();
    }

    MCEstimate est;
    est.n_paths = opt.n_paths;
    est.dt = opt.dt;
    est.seed = opt.seed;
    double sum = 0.0;
    for (long p = 0; p < opt.n_paths; ++p) sum += vals[p];
    est.value = sum / opt.n_paths;
    double ss = 0.0;
    for (long p = 0; p < opt.n_paths; ++p) {
        const double d = vals[p] - est.value;
        ss += d * d;
    }
    est.stderr_ = std::sqrt(ss / (static_cast<double>(opt.n_paths) *
                                  (static_cast<double>(opt.n_paths) - 1.0)));
    for (long p = 0; p < opt.n_paths; ++p) {
        est.truncation_hits += reflected[p];
        est.capped_paths += capped[p];
    }
    est.possibly_divergent = est.capped_paths > opt.n_paths / 100;
    return est;
}

struct LpMembership {
    double lp_integral = 0.0;  // int W_{theta,p}^p d mu
    bool finite = true;
    std::vector<double> w;  // W_{theta,p} on the grid
};

// W_{theta,p}(x) = E_x e^{(theta/p) T_U}; checks W_{theta,p} in L^p(mu) at
// this truncation. Requires theta/p < theta*(1,U).
inline LpMembership lp_membership_of_moment(const DiscreteGenerator& gen, Interval u,
                                            double theta, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_membership: p >= 1 required");
    std::vector<double> one(gen.nodes(), 1.0);
    const double tstar = critical_theta(gen, u, one);
    if (!(theta / p < tstar))
        throw std::runtime_error("lp_membership: theta/p >= theta*(1,U)");
    LpMembership out;
    out.w = fk_moment(gen, u, theta / p, one);
    double s = 0.0;
    for (int i = 0; i < gen.nodes(); ++i) s += gen.mu()[i] * std::pow(out.w[i], p);
    out.lp_integral = s;
    out.finite = std::isfinite(s);
    return out;
}

}  // namespace ergolab
