#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "hypheat/nonlinearity.hpp"
#include "oracles.hpp"

using namespace hypheat;

TEST_CASE("exponential-weight reaction matches its formula") {
    const auto spec = TypeTwoSpec::make(0.5, 1.0, 1.0);
    for (double u : {1e-8, 1e-3, 0.1, 1.0, 5.0, 50.0})
        for (double t : {0.0, 1.0, 10.0}) {
            const long double want =
                std::exp(0.5L * t) * (long double)u * std::expm1((long double)u);
            CHECK(oracle::rel_err(eval_f(spec, u, t), (double)want) < 1e-13);
        }
    CHECK(eval_f(spec, 0.0, 3.0) == 0.0);

    const auto sp2 = TypeTwoSpec::make(1.0, 0.3, 2.0);
    const long double want = std::exp(2.0L) * 1.5L * std::expm1(0.3L * 1.5L * 1.5L);
    CHECK(oracle::rel_err(eval_f(sp2, 1.5, 2.0), (double)want) < 1e-13);
}

TEST_CASE("exponential-weight reaction saturates instead of overflowing") {
    const auto spec = TypeTwoSpec::make(0.5, 1.0, 1.0);
    const double huge = eval_f(spec, 5000.0, 10.0);
    CHECK(huge == kReactionSaturation);
    CHECK(std::isfinite(huge));
    CHECK(!std::isnan(eval_f(spec, 1e308, 1e6)));
    // Monotone in u across the saturation boundary.
    double prev = 0.0;
    for (double u = 1.0; u < 2000.0; u *= 1.5) {
        const double v = eval_f(spec, u, 1.0);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("critical exponent of the exponential-weight family") {
    CHECK(fujita_exponent(2, 0.5) == doctest::Approx(3.0));
    CHECK(fujita_exponent(2, 0.25) == doctest::Approx(2.0));
    CHECK(fujita_exponent(3, 1.0) == doctest::Approx(2.0));
    CHECK(fujita_exponent(4, 0.0) == doctest::Approx(1.0));
}

TEST_CASE("log-weight profile: piecewise structure") {
    const auto g1 = TypeOneSpec::make(1.0, 1.0);
    CHECK(g1.eps_splice <= std::exp(-2.0) + 1e-15);
    CHECK(g1.eps_splice > 0.0);

    // Singular regime: exactly s |ln s|^{-alpha}.
    for (double s : {1e-8, 1e-4, 0.01, 0.9 * g1.eps_splice}) {
        const long double want = (long double)s * std::pow(-std::log((long double)s), -1.0L);
        CHECK(oracle::rel_err(eval_g(g1, s), (double)want) < 1e-13);
    }
    // Quadratic tail: kappa s^2, meeting the chord at s = 1/2 with value kappa/4.
    CHECK(oracle::rel_err(eval_g(g1, 0.5), 0.25) < 1e-12);
    CHECK(oracle::rel_err(eval_g(g1, 2.0), 4.0) < 1e-13);
    const auto g3 = TypeOneSpec::make(0.5, 2.0, 3.0);
    CHECK(oracle::rel_err(eval_g(g3, 2.0), 12.0) < 1e-13);
    CHECK(oracle::rel_err(eval_g(g3, 0.5), 0.75) < 1e-12);

    // Continuity at both junctions.
    const double eps = g1.eps_splice;
    CHECK(oracle::rel_err(eval_g(g1, eps * (1 - 1e-10)), eval_g(g1, eps * (1 + 1e-10))) < 1e-8);
    CHECK(oracle::rel_err(eval_g(g1, 0.5 - 1e-11), eval_g(g1, 0.5 + 1e-11)) < 1e-8);
    CHECK(eval_g(g1, 0.0) == 0.0);
}

TEST_CASE("log-weight profile: convex, non-decreasing, chord never below the pieces") {
    const auto spec = TypeOneSpec::make(1.5, 1.0);
    double prev_slope = 0.0;
    for (double s = 1e-6; s < 4.0; s *= 1.08) {
        const double v = eval_g(spec, s);
        const double v_left = eval_g(spec, s / 1.08);
        CHECK(v >= v_left - 1e-15);
        const double slope = (v - v_left) / (s - s / 1.08);
        CHECK(slope >= prev_slope - 1e-9 * (1.0 + slope));  // secant slopes increase
        prev_slope = slope;
    }
}

TEST_CASE("log-weight derivative matches finite differences away from kinks") {
    const auto spec = TypeOneSpec::make(1.0, 1.0, 2.0);
    for (double s : {1e-4, 0.01, 0.3, 0.8, 3.0}) {
        const double h = 1e-7 * std::max(s, 1e-3);
        const double fd = (eval_g(spec, s + h) - eval_g(spec, s - h)) / (2 * h);
        CHECK(oracle::rel_err(eval_g_deriv(spec, s), fd) < 1e-5);
    }
}

TEST_CASE("time weight multiplies the profile") {
    const auto spec = TypeOneSpec::make(1.0, 2.0);
    CHECK(eval_f(spec, 0.7, 0.0) == 0.0);
    CHECK(oracle::rel_err(eval_f(spec, 0.7, 3.0), 9.0 * eval_g(spec, 0.7)) < 1e-14);
    const auto q0 = TypeOneSpec::make(1.0, 0.0);
    CHECK(oracle::rel_err(eval_f(q0, 0.7, 5.0), eval_g(q0, 0.7)) < 1e-14);
}

TEST_CASE("reciprocal tail integral") {
    // Above s = 1/2 the profile is exactly kappa s^2, so the tail integral of
    // 1/g over (1/2, inf) is 2/kappa.
    CHECK(oracle::rel_err(reciprocal_tail(TypeOneSpec::make(1.0, 1.0, 1.0)), 2.0) < 1e-8);
    CHECK(reciprocal_tail(TypeOneSpec::make(1.0, 1.0, 1.0)) <= 2.0 + 1e-6);
    CHECK(oracle::rel_err(reciprocal_tail(TypeOneSpec::make(0.5, 2.0, 4.0)), 0.5) < 1e-8);
}

TEST_CASE("spec construction guards") {
    CHECK_THROWS(TypeOneSpec::make(0.0, 1.0));
    CHECK_THROWS(TypeOneSpec::make(1.0, -0.5));
    CHECK_THROWS(TypeOneSpec::make(1.0, 1.0, 0.0));
    CHECK_THROWS(TypeTwoSpec::make(-0.1, 1.0, 1.0));
    CHECK_THROWS(TypeTwoSpec::make(0.5, 0.0, 1.0));
    CHECK_THROWS(TypeTwoSpec::make(0.5, 1.0, 0.0));
}
