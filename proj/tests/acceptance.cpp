// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Each criterion re-derives its reference values from scratch (closed forms or
// an independent numerical route); nothing is read from previous runs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/experiments.hpp"

using namespace ergolab;

namespace {

int g_failures = 0;

void report(int id, bool ok, const std::string& what) {
    std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

void guarded(int id, const std::string& what, const std::function<bool(std::string&)>& body) {
    std::string detail = what;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = what + " [exception: " + e.what() + "]";
    }
    report(id, ok, detail);
}

Scenario& ou() {
    static Scenario sc(Potential::quadratic());
    return sc;
}

int node_near(const DiscreteGenerator& g, double x0) {
    int i0 = 0;
    for (int i = 0; i < g.nodes(); ++i)
        if (std::abs(g.x()[i] - x0) < std::abs(g.x()[i0] - x0)) i0 = i;
    return i0;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// --- criteria ----------------------------------------------------------------

void criterion1() {
    guarded(1, "gaussian spectral gap = 1 within 0.5% with O(h^2) refinement trend",
            [](std::string& d) {
                DiscreteGenerator g(ou(), 4096);
                const double gap = g.spectral_gap().value;
                const double rel = std::abs(gap - 1.0);
                bool ok = rel <= 5e-3;
                std::vector<double> errs;
                for (int n : {64, 128, 256, 512})
                    errs.push_back(
                        std::abs(DiscreteGenerator(ou(), n).spectral_gap().value - 1.0));
                bool trend = true;
                for (size_t i = 1; i < errs.size(); ++i)
                    if (!(errs[i - 1] / errs[i] >= 3.5)) trend = false;
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              " (gap = %.8f, err ratios %.1f %.1f %.1f)", gap,
                              errs[0] / errs[1], errs[1] / errs[2], errs[2] / errs[3]);
                d += buf;
                return ok && trend;
            });
}

void criterion2() {
    guarded(2, "resolvent Lyapunov construction pins c and certifies the drift",
            [](std::string& d) {
                DiscreteGenerator g(ou(), 4096);
                const double gap = g.spectral_gap().value;
                auto lyap = construct_poincare_lyapunov(g, {-1.0, 1.0}, 1.0 / gap);
                bool pos = true;
                for (double v : lyap.v) pos = pos && v > 0.0;
                char buf[96];
                std::snprintf(buf, sizeof buf, " (c = %.7f, worst margin %.2e)", lyap.c,
                              lyap.certificate.worst_margin);
                d += buf;
                return std::abs(lyap.c - 0.085336) <= 1e-4 && pos && lyap.certificate.valid;
            });
}

void criterion3() {
    guarded(3, "hitting threshold grid-converges; Monte Carlo meets Feynman-Kac",
            [](std::string& d) {
                DiscreteGenerator g1(ou(), 4096), g2(ou(), 8192);
                const Interval u{-1.0, 1.0};
                const double t1 = critical_theta(g1, u), t2 = critical_theta(g2, u);
                const double rel = std::abs(t1 - t2) / t2;
                const double theta = 0.8 * t2;
                std::vector<double> one(g2.nodes(), 1.0);
                auto w = fk_moment(g2, u, theta, one);
                const int i0 = node_near(g2, 2.0);
                MCOptions mo;
                mo.n_paths = 100000;
                mo.dt = 1e-3;
                mo.seed = 0;
                mo.theta_hint = theta;
                auto mc = mc_moment(ou(), u, theta, [](double) { return 1.0; }, g2.x()[i0], mo);
                const double dev = std::abs(w[i0] - mc.value);
                char buf[160];
                std::snprintf(buf, sizeof buf, " (refine rel %.2e, dev %.2f se)", rel,
                              mc.stderr_ > 0 ? dev / mc.stderr_ : 0.0);
                d += buf;
                return rel < 0.01 && dev <= 3.0 * mc.stderr_ && !mc.possibly_divergent;
            });
}

void criterion4() {
    guarded(4, "entropy decay meets the log-Sobolev rate; entropic Lyapunov chain holds",
            [](std::string& d) {
                DiscreteGenerator g(ou(), 1024);
                std::vector<double> tg;
                for (double t = 0.25; t <= 12.0 + 1e-9; t += 0.25) tg.push_back(t);
                auto ec = entropy_decay(
                    g, g.sample([](double x) { return std::exp(0.5 * x); }), tg);
                const double target = 2.0 / 2.0;  // 2 / C_LS with C_LS = 2
                auto lyap =
                    construct_entropic_lyapunov(g, [](double x) { return 0.25 * x * x; }, 2.0);
                double theta_h = 0.0;
                if (!lyap.trivial) {
                    auto wt = g.sample([](double x) { return x * x; });
                    theta_h = critical_theta(g, lyap.exceptional_set, wt);
                }
                char buf[96];
                std::snprintf(buf, sizeof buf, " (rate %.4f, weighted theta* %.4f)",
                              ec.fitted_rate, theta_h);
                d += buf;
                return ec.fit_ok && ec.fitted_rate >= 0.95 * target && !lyap.trivial &&
                       lyap.certificate.valid && theta_h > 0.0;
            });
}

void criterion5() {
    guarded(5, "F-Sobolev construction: critical growth certifies, 1.5x overshoot diverges",
            [](std::string& d) {
                bool ok = true;
                for (double alpha : {1.5, 2.0, 3.0}) {
                    Scenario sp(Potential::power(alpha));
                    DiscreteGenerator g(sp, 2048);
                    const double bf = 2.0 * (1.0 - 1.0 / alpha);
                    FSpec fs = FSpec::logplus_power(bf, 1.0);
                    const Potential& pot = sp.potential();
                    auto lyap = construct_fsobolev_lyapunov(g, fs, [&pot, bf](double x) {
                        return 0.5 * std::pow(std::abs(pot.V(x)), bf);
                    });
                    ok = ok && !lyap.trivial && lyap.certificate.valid;
                }
                // alpha = 1.5 with the h-exponent pushed 1.5x past critical: the
                // dual moment must blow up
                Scenario sp(Potential::power(1.5));
                DiscreteGenerator g(sp, 2048);
                const double bf = 2.0 * (1.0 - 1.0 / 1.5);
                FSpec fs = FSpec::logplus_power(bf, 1.0);
                const Potential& pot = sp.potential();
                bool threw = false;
                try {
                    (void)construct_fsobolev_lyapunov(g, fs, [&pot, bf](double x) {
                        return 0.5 * std::pow(std::abs(pot.V(x)), 1.5 * bf);
                    });
                } catch (const std::runtime_error&) {
                    threw = true;
                }
                d += threw ? " (overshoot rejected)" : " (overshoot NOT rejected)";
                return ok && threw;
            });
}

void criterion6() {
    guarded(6, "nested drift ladder: summable slow-log case, divergent gaussian, "
               "boundedness probe separates the families",
            [](std::string& d) {
                Scenario lp(Potential::logpower(2.0));
                DiscreteGenerator g(lp, 1024);
                ClosedFormW w{0.5, 2.0};
                std::vector<double> radii;
                for (int k = 1; k <= 44; ++k)
                    radii.push_back(std::exp(static_cast<double>(k)));
                auto rep = build_ladder(lp.potential(), w, radii, &g);
                bool ok = rep.verdict == "convergent" && rep.term.size() >= 41 &&
                          rep.term[40] < 1e-3;
                // term_k ~ k^{-2}: log-log slope over the upper rungs
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                int n = 0;
                for (size_t k = 10; k < rep.term.size(); ++k) {
                    const double lx = std::log(static_cast<double>(k + 1));
                    const double ly = std::log(rep.term[k]);
                    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
                    ++n;
                }
                const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
                ok = ok && std::abs(slope + 2.0) <= 0.2 * 2.0;

                ClosedFormW wq{0.25, 2.0};
                std::vector<double> dyadic;
                for (int k = 1; k <= 20; ++k) dyadic.push_back(std::pow(2.0, k));
                auto repq = build_ladder(ou().potential(), wq, dyadic);
                ok = ok && repq.verdict == "divergent";

                auto sweep_diff = [](double beta) {
                    const double r0 = Scenario(Potential::logpower(beta)).radius();
                    std::vector<double> sups;
                    for (double f : {1.0, 1.5, 2.0}) {
                        TruncationPolicy tp;
                        tp.force_radius = r0 * f;
                        Scenario s(Potential::logpower(beta), tp);
                        DiscreteGenerator sg(s, 1024);
                        sups.push_back(ultraboundedness_probe(sg, 1.0).sup);
                    }
                    return sups.back() - sups.front();
                };
                const double d2 = sweep_diff(2.0), dhalf = sweep_diff(0.5);
                ok = ok && d2 <= 0.7 && dhalf >= 2.0;
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              " (term[41] = %.2e, slope %.3f, sweeps %.2f / %.2f)",
                              rep.term[40], slope, d2, dhalf);
                d += buf;
                return ok;
            });
}

void criterion7() {
    guarded(7, "gaussian moment machinery: double factorials, recursion, e^{x^2/4} moment",
            [](std::string& d) {
                Scenario& sc = ou();
                DiscreteGenerator g(sc, 2048);
                const double a = 0.25;
                const Potential& pot = sc.potential();
                auto wv = g.sample([&pot, a](double x) { return std::exp(a * pot.V(x)); });
                auto phi = [](double x) { return std::abs(x) / std::sqrt(8.0); };
                auto psi = [](double x) { return std::abs(x); };
                auto phi2 = g.sample([&](double x) { return phi(x) * phi(x); });
                const Interval c{-2.0, 2.0};
                auto cert = certify_drift(g, wv, phi2, c);
                const double bbar = b_bar_of(g, wv, cert.b, c);
                CondOptions copt;
                copt.k_schedule = {4.0};
                auto cc = condition_constants(g, phi, psi, c, bbar, copt);
                if (!cc.valid) {
                    d += " (constants invalid: " + cc.violation + ")";
                    return false;
                }
                auto ms = moment_sequence(sc, psi, 30);
                // beta_n = mu(x^{2n}) = (2n-1)!! for the standard gaussian
                double worst = 0.0;
                double log_df = 0.0;
                for (int n = 1; n <= 15; ++n) {
                    log_df += std::log(2.0 * n - 1.0);
                    worst = std::max(worst, std::abs(ms.log_beta[n] - log_df));
                }
                bool ok = cert.valid && worst <= 1e-6 && ms.n_max == 30;
                auto rec = recursion_check(ms, cc);
                ok = ok && rec.pass;
                auto em = exponential_moment(sc, psi, 0.25, cc, ms, rec);
                // int e^{x^2/4} dmu = sqrt(2) in closed form
                const double root2 = std::sqrt(2.0);
                ok = ok && em.consistent && std::abs(em.direct - root2) <= 1e-6 &&
                     std::abs(em.series - root2) <= 1e-6;
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              " (moment err %.1e, direct %.8f, series %.8f)", worst,
                              em.direct, em.series);
                d += buf;
                return ok;
            });
}

void criterion8() {
    guarded(8, "energy inequality holds for every certificate and 100 random test functions",
            [](std::string& d) {
                double worst = std::numeric_limits<double>::infinity();
                int total = 0;
                auto run = [&](const DiscreteGenerator& g, std::span<const double> phi2,
                               std::span<const double> w, double b, Interval c) {
                    auto rep = phi_lyap_to_poincare_check(g, phi2, w, b, c);
                    worst = std::min(worst, rep.worst_rel_slack);
                    total += rep.n_tests;
                    return rep.pass;
                };
                bool ok = true;

                // resolvent-route certificate on the gaussian
                DiscreteGenerator g1(ou(), 2048);
                auto lyap = construct_poincare_lyapunov(
                    g1, {-1.0, 1.0}, 1.0 / g1.spectral_gap().value);
                ok = ok && run(g1, lyap.rate, lyap.v, lyap.b, {-1.0, 1.0});

                // closed-form W = e^{x^2/4} on the gaussian
                auto wv1 = g1.sample([](double x) { return std::exp(0.25 * x * x); });
                auto p1 = g1.sample([](double x) { return x * x / 8.0; });
                auto c1 = certify_drift(g1, wv1, p1, {-2.0, 2.0});
                ok = ok && c1.valid && run(g1, p1, wv1, c1.b, {-2.0, 2.0});

                // steep power potential, alpha = 3
                Scenario sp(Potential::power(3.0));
                DiscreteGenerator g2(sp, 2048);
                const double a = 0.25, al = 3.0;
                const double coef = al * std::sqrt(0.5 * a * (1.0 - a));
                const Potential& pot = sp.potential();
                auto wv2 = g2.sample([&](double x) { return std::exp(a * pot.V(x)); });
                auto p2 = g2.sample([&](double x) {
                    const double f = coef * std::pow(std::abs(x), al - 1.0);
                    return f * f;
                });
                const double xc = std::pow(2.0 * (al - 1.0) / ((1.0 - a) * al), 1.0 / al) + 0.5;
                auto c2 = certify_drift(g2, wv2, p2, {-xc, xc});
                ok = ok && c2.valid && run(g2, p2, wv2, c2.b, {-xc, xc});

                // slowly-confining logpower potential
                Scenario lp(Potential::logpower(2.0));
                DiscreteGenerator g3(lp, 2048);
                ClosedFormW w3{0.5, 2.0};
                auto wv3 = g3.sample([&](double x) { return std::exp(w3.log_w(x)); });
                auto p3 = g3.sample([](double x) {
                    const double l = std::log1p(x * x);
                    return 0.9 * x * x * l * l;
                });
                auto c3 = certify_drift(g3, wv3, p3, {-1.0, 1.0});
                ok = ok && c3.valid && run(g3, p3, wv3, c3.b, {-1.0, 1.0});

                char buf[96];
                std::snprintf(buf, sizeof buf, " (worst rel slack %.2e over %d tests)",
                              worst, total);
                d += buf;
                return ok && worst >= -1e-8;
            });
}

void criterion9() {
    guarded(9, "equal seeds, different thread counts: bit-identical summary output",
            [](std::string& d) {
                namespace fs = std::filesystem;
                const fs::path base = fs::temp_directory_path() / "ergolab_acceptance";
                fs::remove_all(base);
                ExperimentConfig c;
                c.experiment = "hitting-xcheck";
                c.n_cells = 1024;
                c.n_paths = 100000;
                c.dt = 1e-3;
                c.seed = 0;
                c.threads = 1;
                c.out_dir = (base / "t1").string();
                const int r1 = run_experiment(c);
                ExperimentConfig c2 = c;
                c2.threads = 3;
                c2.out_dir = (base / "t3").string();
                const int r2 = run_experiment(c2);
                const std::string s1 = slurp(fs::path(c.out_dir) / "summary.json");
                const std::string s2 = slurp(fs::path(c2.out_dir) / "summary.json");
                const bool same = !s1.empty() && s1 == s2;
                d += same ? " (summaries identical)" : " (summaries differ)";
                return r1 == 0 && r2 == 0 && same;
            });
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures > 0) {
        std::printf("ACCEPTANCE: %d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("ACCEPTANCE: all criteria passed\n");
    return 0;
}
