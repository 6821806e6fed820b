#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ergolab/quadrature.hpp"
#include "ergolab/scenario.hpp"

using namespace ergolab;

namespace {
const double kSqrt2Pi = 2.5066282746310002;
}

TEST_CASE("normalizing constants match closed forms") {
    Scenario ou(Potential::quadratic());
    CHECK(ou.z() == Catch::Approx(kSqrt2Pi).epsilon(1e-6));

    Scenario p2(Potential::power(2.0));  // int e^{-x^2} = sqrt(pi)
    CHECK(p2.z() == Catch::Approx(std::sqrt(M_PI)).epsilon(1e-6));

    Scenario cy(Potential::cauchy(1.0));  // int dx/(1+x^2) = pi
    CHECK(cy.z() == Catch::Approx(M_PI).epsilon(1e-4));
}

TEST_CASE("gaussian moments") {
    Scenario ou(Potential::quadratic());
    CHECK(ou.moment([](double) { return 1.0; }).value == Catch::Approx(1.0).margin(1e-10));
    CHECK(ou.moment([](double x) { return x * x; }).value == Catch::Approx(1.0).epsilon(1e-8));
    CHECK(ou.moment([](double x) { return x * x * x * x; }).value ==
          Catch::Approx(3.0).epsilon(1e-8));
    CHECK(ou.measure_of({-1.0, 1.0}).value ==
          Catch::Approx(0.6826894921370859).epsilon(1e-9));
    // full-domain measure ~ 1, tail below the truncation tolerance
    const auto full = ou.measure_of(ou.domain());
    CHECK(full.value == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("measure_of edge cases") {
    Scenario ou(Potential::quadratic());
    CHECK(ou.measure_of({1.0, 1.0}).warning);           // empty
    CHECK(ou.measure_of({2.0, -2.0}).warning);          // inverted => empty
    CHECK(ou.measure_of({-1e9, 1e9}).warning);          // clipped to the domain
    CHECK_FALSE(ou.measure_of({-1.0, 1.0}).warning);

    // monotone and additive
    const double a = ou.measure_of({-2.0, 0.0}).value;
    const double b = ou.measure_of({0.0, 1.5}).value;
    const double ab = ou.measure_of({-2.0, 1.5}).value;
    CHECK(a + b == Catch::Approx(ab).margin(1e-10));
    CHECK(ou.measure_of({-1.0, 1.0}).value < ou.measure_of({-2.0, 2.0}).value);
}

TEST_CASE("power family moments are log-convex in n") {
    for (double al : {1.5, 2.0, 3.0}) {
        Scenario sc(Potential::power(al));
        std::vector<double> logm;
        for (int n = 0; n <= 10; ++n)
            logm.push_back(std::log(
                sc.moment([n](double x) { return std::pow(std::abs(x), 2.0 * n); }).value));
        for (int n = 1; n + 1 <= 10; ++n)
            CHECK(2.0 * logm[n] <= logm[n - 1] + logm[n + 1] + 1e-9);
    }
}

TEST_CASE("potential derivatives match central differences") {
    const double h = 1e-6;
    for (const Potential& p : {Potential::quadratic(), Potential::power(1.7),
                               Potential::logpower(2.0), Potential::cauchy(1.3)}) {
        for (double x : {0.3, 1.0, 2.5, -1.8}) {
            const double fd = (p.V(x + h) - p.V(x - h)) / (2.0 * h);
            CHECK(p.dV(x) == Catch::Approx(fd).epsilon(1e-5).margin(1e-5));
        }
    }
}

TEST_CASE("non-normalizable inputs are rejected") {
    CHECK_THROWS_AS(Scenario(Potential::cauchy(0.4)), std::invalid_argument);
    // tabulated potential decreasing at the right end: e^{-V} not integrable
    CHECK_THROWS_AS(Scenario(Potential::tabulated({-1.0, 0.0, 1.0}, {1.0, 0.0, -1.0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(Potential::cauchy(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Potential::power(0.5), std::invalid_argument);
    CHECK_THROWS_AS(Potential::logpower(0.0), std::invalid_argument);
}

TEST_CASE("tabulated scenario is flagged as outside the smooth theory") {
    std::vector<double> xs, vs;
    for (int i = -40; i <= 40; ++i) {
        const double x = 0.25 * i;
        xs.push_back(x);
        vs.push_back(0.5 * x * x);
    }
    Scenario tab(Potential::tabulated(xs, vs));
    CHECK(tab.outside_theory());
    Scenario ou(Potential::quadratic());
    CHECK_FALSE(ou.outside_theory());
    // tabulated Gaussian reproduces the Gaussian variance closely
    CHECK(tab.moment([](double x) { return x * x; }).value == Catch::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("singular integrand raises instead of returning garbage") {
    Scenario ou(Potential::quadratic());
    CHECK_THROWS_AS(ou.moment([](double x) { return 1.0 / x; }), std::domain_error);
}

TEST_CASE("log_exp_moment: closed form and divergence flag") {
    Scenario ou(Potential::quadratic());
    // int e^{x^2/4} dmu = sqrt(2)
    const LogMoment m = ou.log_exp_moment([](double x) { return 0.25 * x * x; });
    CHECK_FALSE(m.truncation_dominated);
    CHECK(m.log_value == Catch::Approx(0.5 * std::log(2.0)).margin(1e-8));
    // int e^{x^2} dmu diverges: integrand still rising at the boundary
    CHECK(ou.log_exp_moment([](double x) { return x * x; }).truncation_dominated);
}

TEST_CASE("truncation policy controls") {
    TruncationPolicy tp;
    tp.force_radius = 3.0;
    Scenario ou(Potential::quadratic(), tp);
    CHECK(ou.radius() == Catch::Approx(3.0));
    CHECK(ou.tail_tol_achieved() > 1e-10);  // deliberately short domain

    TruncationPolicy tight;
    tight.tail_tol = 1e-14;
    Scenario out(Potential::quadratic(), tight);
    CHECK(out.tail_tol_achieved() < 1e-14);
    CHECK(out.radius() > Scenario(Potential::quadratic()).radius() - 1e-12);

    TruncationPolicy unreachable;
    unreachable.tail_tol = 1e-10;
    unreachable.max_radius = 2.0;
    CHECK_THROWS_AS(Scenario(Potential::cauchy(0.6), unreachable), std::runtime_error);
}

TEST_CASE("density integrates against the quadrature identity") {
    Scenario lp(Potential::logpower(2.0));
    const double mass = integrate([&](double x) { return lp.density(x); }, lp.x_lo(),
                                  lp.x_hi(), 1e-12)
                            .value;
    CHECK(mass == Catch::Approx(1.0).margin(1e-8));
}
