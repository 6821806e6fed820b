#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "ergolab/scenario.hpp"
#include "ergolab/tridiag.hpp"

namespace ergolab {

struct SpectralGap {
    double value = 0.0;
    bool no_gap = false;  // value below resolution: weak-Poincare regime
};

// mu-symmetric finite-difference realization of L = d^2/dx^2 - V' d/dx with
// Neumann (reflecting) endpoints. Divergence form with face weights
// e^{-V(face)} makes the discrete mu-symmetry exact, not approximate:
//   mu_i L_{i,i+1} = mu_{i+1} L_{i+1,i}  to round-off.
class DiscreteGenerator {
public:
    DiscreteGenerator(const Scenario& sc, int n_cells) : scenario_(&sc) {
        if (n_cells < 64) throw std::invalid_argument("generator: need N >= 64 cells");
        const int n = n_cells + 1;  // nodes
        const double lo = sc.x_lo(), hi = sc.x_hi();
        h_ = (hi - lo) / n_cells;
        x_.resize(n);
        for (int i = 0; i < n; ++i) x_[i] = lo + i * h_;
        x_.back() = hi;

        const Potential& p = sc.potential();
        sub_.assign(n, 0.0);
        diag_.assign(n, 0.0);
        sup_.assign(n, 0.0);
        mu_.assign(n, 0.0);

        // node weights in log space; shifted by the min so nothing overflows
        std::vector<double> vnode(n);
        double vmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            vnode[i] = p.V(x_[i]);
            vmin = std::min(vmin, vnode[i]);
        }
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            const double cell = (i == 0 || i == n - 1) ? 0.5 * h_ : h_;
            mu_[i] = std::exp(-(vnode[i] - vmin)) * cell;
            mass += mu_[i];
        }
        if (!(mass > 0.0))
            throw std::runtime_error("generator: measure weights underflowed to zero");
        for (double& w : mu_) w /= mass;

        for (int i = 0; i < n; ++i) {
            const double cell = (i == 0 || i == n - 1) ? 0.5 * h_ : h_;
            if (i + 1 < n) {
                const double vface = p.V(0.5 * (x_[i] + x_[i + 1]));
                sup_[i] = std::exp(vnode[i] - vface) / (cell * h_);
            }
            if (i > 0) {
                const double vface = p.V(0.5 * (x_[i] + x_[i - 1]));
                sub_[i] = std::exp(vnode[i] - vface) / (cell * h_);
            }
            diag_[i] = -(sub_[i] + sup_[i]);
        }
    }

    const Scenario& scenario() const { return *scenario_; }
    int nodes() const { return static_cast<int>(x_.size()); }
    double h() const { return h_; }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& mu() const { return mu_; }
    double sub(int i) const { return sub_[i]; }
    double diag(int i) const { return diag_[i]; }
    double sup(int i) const { return sup_[i]; }

    // sample a function on the grid
    template <class F>
    std::vector<double> sample(F&& f) const {
        std::vector<double> v(x_.size());
        for (size_t i = 0; i < x_.size(); ++i) v[i] = f(x_[i]);
        return v;
    }

    std::vector<double> apply(std::span<const double> f) const {
        const int n = nodes();
        std::vector<double> out(n);
        for (int i = 0; i < n; ++i) {
            double s = diag_[i] * f[i];
            if (i > 0) s += sub_[i] * f[i - 1];
            if (i + 1 < n) s += sup_[i] * f[i + 1];
            out[i] = s;
        }
        return out;
    }

    double mu_mean(std::span<const double> f) const {
        double s = 0.0;
        for (size_t i = 0; i < f.size(); ++i) s += mu_[i] * f[i];
        return s;
    }

    double mu_variance(std::span<const double> f) const {
        const double m = mu_mean(f);
        double s = 0.0;
        for (size_t i = 0; i < f.size(); ++i) s += mu_[i] * (f[i] - m) * (f[i] - m);
        return s;
    }

    // <f, -Lf>_mu as the exact sum of squared differences over faces
    double dirichlet_form(std::span<const double> f) const {
        double s = 0.0;
        for (int i = 0; i + 1 < nodes(); ++i) {
            const double df = f[i + 1] - f[i];
            s += mu_[i] * sup_[i] * df * df;
        }
        return s;
    }

    // symmetric tridiagonal similar to -L in the mu inner product
    void symmetrized(std::vector<double>& d, std::vector<double>& e) const {
        const int n = nodes();
        d.resize(n);
        e.resize(n - 1);
        for (int i = 0; i < n; ++i) d[i] = -diag_[i];
        for (int i = 0; i + 1 < n; ++i) e[i] = -std::sqrt(sup_[i] * sub_[i + 1]);
    }

    // second-smallest eigenvalue of -L (the first is ~0)
    SpectralGap spectral_gap() const {
        std::vector<double> d, e;
        symmetrized(d, e);
        const double l1 = tridiag_eigenvalue(d, e, 1);
        SpectralGap g{l1, l1 < 1e-12};
        return g;
    }

    // --- Dirichlet restrictions ------------------------------------------

    struct Component {
        int begin = 0, end = 0;       // node range [begin, end)
        int absorb_left = -1;         // absorbing neighbor index, or -1
        int absorb_right = -1;
        int size() const { return end - begin; }
    };

    // connected components of the grid outside the closed interval U
    std::vector<Component> exterior_components(Interval u) const {
        const int n = nodes();
        int first = -1, last = -1;
        for (int i = 0; i < n; ++i)
            if (u.contains(x_[i])) {
                if (first < 0) first = i;
                last = i;
            }
        if (first < 0) throw std::invalid_argument("absorbing set contains no grid node");
        if (first == 0 && last == n - 1)
            throw std::invalid_argument("absorbing set covers the whole domain");
        std::vector<Component> out;
        if (first > 0) out.push_back({0, first, -1, first});
        if (last < n - 1) out.push_back({last + 1, n, last, -1});
        return out;
    }

    // restricted -L - theta*diag(w) on one component, as symmetric tridiag
    void restricted_sym(const Component& c, std::span<const double> w, double theta,
                        std::vector<double>& d, std::vector<double>& e) const {
        d.resize(c.size());
        e.assign(std::max(c.size() - 1, 0), 0.0);
        for (int i = c.begin; i < c.end; ++i)
            d[i - c.begin] = -diag_[i] - theta * (w.empty() ? 0.0 : w[i]);
        for (int i = c.begin; i + 1 < c.end; ++i)
            e[i - c.begin] = -std::sqrt(sup_[i] * sub_[i + 1]);
    }

    // smallest eigenvalue of -L on the complement of U with absorption on
    // the boundary of U and Neumann at the outer endpoints
    double principal_dirichlet_eigenvalue(Interval u) const {
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> d, e;
        for (const Component& c : exterior_components(u)) {
            restricted_sym(c, {}, 0.0, d, e);
            best = std::min(best, tridiag_eigenvalue(d, e, 0));
        }
        return best;
    }

    // largest theta with -L - theta*diag(w) still positive definite on the
    // exterior of U: the finiteness threshold for the w-weighted hitting
    // moment. w >= 0 on the grid.
    double weighted_dirichlet_threshold(Interval u, std::span<const double> w) const {
        const auto comps = exterior_components(u);
        std::vector<double> d, e;
        double best = std::numeric_limits<double>::infinity();
        for (const Component& c : comps) {
            double wmax = 0.0;
            for (int i = c.begin; i < c.end; ++i) wmax = std::max(wmax, w[i]);
            if (wmax <= 0.0)
                throw std::invalid_argument(
                    "weighted threshold: weight vanishes on an exterior component");
            restricted_sym(c, {}, 0.0, d, e);
            double hi = tridiag_eigenvalue(d, e, 0) / wmax * static_cast<double>(c.size());
            hi = std::max(hi, 1.0);
            auto negcount = [&](double theta) {
                std::vector<double> dd, ee;
                restricted_sym(c, w, theta, dd, ee);
                return sturm_count(dd, ee, 0.0);
            };
            while (negcount(hi) == 0) hi *= 2.0;
            double lo = 0.0;
            for (int it = 0; it < 120 && hi - lo > 1e-12 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (negcount(mid) == 0 ? lo : hi) = mid;
            }
            best = std::min(best, 0.5 * (lo + hi));
        }
        return best;
    }

    // --- linear solves ----------------------------------------------------

    // solve (-L + diag(phi)) v = g; requires the symmetrized form to be
    // positive definite (checked), which is the discrete coercivity condition
    std::vector<double> resolvent_solve(std::span<const double> phi,
                                        std::span<const double> g) const {
        const int n = nodes();
        std::vector<double> d(n), e(n - 1);
        symmetrized(d, e);
        for (int i = 0; i < n; ++i) d[i] += phi[i];
        const double lmin = tridiag_eigenvalue(d, e, 0);
        if (!(lmin > 0.0))
            throw std::runtime_error(
                "resolvent: form not coercive (lambda_min = " + std::to_string(lmin) +
                "); reduce c or enlarge A");
        std::vector<double> sub(n), dia(n), sup(n);
        for (int i = 0; i < n; ++i) {
            sub[i] = -sub_[i];
            dia[i] = -diag_[i] + phi[i];
            sup[i] = -sup_[i];
        }
        return tridiag_solve(sub, dia, sup, g);
    }

    // Crank-Nicolson approximation of P_t f; substep <= min(t/16, h).
    // be_startup > 0 replaces that many leading substeps by backward Euler
    // (Rannacher smoothing): CN is not L-stable, so rough data (point
    // masses) rings without it.
    std::vector<double> semigroup_step(std::span<const double> f, double t,
                                       int be_startup = 0) const {
        if (!(t > 0.0)) throw std::invalid_argument("semigroup_step: t must be > 0");
        const double target = std::min(t / 16.0, h_);
        const int nsub = static_cast<int>(std::ceil(t / target));
        const double dt = t / nsub;
        const int n = nodes();
        std::vector<double> cur(f.begin(), f.end()), rhs(n);
        std::vector<double> sub(n), dia(n), sup(n);
        for (int i = 0; i < n; ++i) {
            sub[i] = -0.5 * dt * sub_[i];
            dia[i] = 1.0 - 0.5 * dt * diag_[i];
            sup[i] = -0.5 * dt * sup_[i];
        }
        if (be_startup > 0) {
            std::vector<double> bsub(n), bdia(n), bsup(n);
            for (int i = 0; i < n; ++i) {
                bsub[i] = -dt * sub_[i];
                bdia[i] = 1.0 - dt * diag_[i];
                bsup[i] = -dt * sup_[i];
            }
            const int nbe = std::min(be_startup, nsub);
            for (int s = 0; s < nbe; ++s) cur = tridiag_solve(bsub, bdia, bsup, cur);
        }
        for (int s = std::min(std::max(be_startup, 0), nsub); s < nsub; ++s) {
            for (int i = 0; i < n; ++i) {
                double v = (1.0 + 0.5 * dt * diag_[i]) * cur[i];
                if (i > 0) v += 0.5 * dt * sub_[i] * cur[i - 1];
                if (i + 1 < n) v += 0.5 * dt * sup_[i] * cur[i + 1];
                rhs[i] = v;
            }
            cur = tridiag_solve(sub, dia, sup, rhs);
        }
        return cur;
    }

    // Matrix Market coordinate dump, for debugging
    void dump_matrix_market(std::ostream& os) const {
        const int n = nodes();
        os << "%%MatrixMarket matrix coordinate real general\n";
        os << n << " " << n << " " << 3 * n - 2 << "\n";
        for (int i = 0; i < n; ++i) {
            if (i > 0) os << i + 1 << " " << i << " " << sub_[i] << "\n";
            os << i + 1 << " " << i + 1 << " " << diag_[i] << "\n";
            if (i + 1 < n) os << i + 1 << " " << i + 2 << " " << sup_[i] << "\n";
        }
    }

private:
    const Scenario* scenario_;
    double h_ = 0.0;
    std::vector<double> x_, mu_, sub_, diag_, sup_;
};

}  // namespace ergolab
