#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "hypheat/geometry.hpp"
#include "hypheat/spectral.hpp"
#include "oracles.hpp"

using namespace hypheat;

namespace {

std::vector<double> uniform_radii(double r_hi, int n) {
    std::vector<double> r(n + 1);
    for (int i = 0; i <= n; ++i) r[i] = r_hi * double(i) / n;
    return r;
}

}  // namespace

TEST_CASE("ground state on three-dimensional hyperbolic space is r/sinh r") {
    const auto m = ManifoldModel::hyperbolic(3);
    const auto gs = solve_ground_state(m, 1.0, uniform_radii(20.0, 4000));
    double worst = 0.0;
    for (std::size_t i = 0; i < gs.r.size(); ++i) {
        const long double r = gs.r[i];
        const long double want = r == 0.0L ? 1.0L : r / std::sinh(r);
        worst = std::max(worst, std::fabs(gs.phi[i] - (double)want));
    }
    CHECK(worst < 1e-6);
    CHECK(gs.phi[0] == 1.0);
    // Interpolated evaluation between samples keeps the accuracy.
    CHECK(std::fabs(gs(1.0) - (double)(1.0L / std::sinh(1.0L))) < 1e-6);
    CHECK(gs(1.0) == doctest::Approx(0.8509).epsilon(1e-3));
    CHECK(gs.sup() == 1.0);
}

TEST_CASE("profiles satisfy the radial equation to high accuracy") {
    for (int n : {2, 3, 4}) {
        const auto m = ManifoldModel::hyperbolic(n);
        const double res = ground_state_residual_sup(m, lambda1_hyperbolic(n), 18.0);
        CHECK(res < 1e-6);
    }
    const auto sc = ManifoldModel::scaled_hyperbolic(3, 2.0);
    CHECK(ground_state_residual_sup(sc, 4.0, 15.0) < 1e-6);
}

TEST_CASE("eigenvalue above the spectral floor loses positivity") {
    const auto m = ManifoldModel::hyperbolic(2);
    CHECK_THROWS_AS(solve_ground_state(m, 0.40, uniform_radii(35.0, 7000)),
                    eigenvalue_too_large);
    // At the floor itself the profile stays positive on the same range.
    CHECK_NOTHROW(solve_ground_state(m, 0.25, uniform_radii(35.0, 7000)));
}

TEST_CASE("supersolution residual accepts eigenfunctions and rejects impostors") {
    const auto m = ManifoldModel::hyperbolic(3);
    auto radii = uniform_radii(15.0, 3000);
    radii.erase(radii.begin());  // residual sampling starts away from the pole
    std::vector<double> phi(radii.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const long double r = radii[i];
        phi[i] = r == 0.0L ? 1.0 : (double)(r / std::sinh(r));
    }
    const auto res = supersolution_residual(m, radii, phi, 1.0, 1e-6);
    for (double v : res) CHECK(std::fabs(v) < 1e-6);
    // The same profile is strictly a supersolution for smaller lambda...
    CHECK_NOTHROW(supersolution_residual(m, radii, phi, 0.5, 1e-8));
    // ...and fails the inequality for larger lambda.
    CHECK_THROWS_AS(supersolution_residual(m, radii, phi, 1.5, 1e-8), not_a_supersolution);
}

TEST_CASE("profile sits inside the (1+r) exp(-(n-1)r/2) envelope with small spread") {
    for (int n : {2, 3, 4}) {
        const auto m = ManifoldModel::hyperbolic(n);
        const auto gs = solve_ground_state(m, lambda1_hyperbolic(n), uniform_radii(20.0, 4000));
        const auto env = fit_envelope(m, gs, 0.0, 20.0);
        CHECK(env.c_low > 0.0);
        CHECK(env.ratio() <= 10.0);
        // The fitted constants really bound the profile on the sampled range.
        for (std::size_t i = 0; i < gs.r.size(); i += 37) {
            const double bound = (1.0 + gs.r[i]) * std::exp(-0.5 * (n - 1) * gs.r[i]);
            CHECK(gs.phi[i] <= env.c_up * bound * (1 + 1e-12));
            CHECK(gs.phi[i] >= env.c_low * bound * (1 - 1e-12));
        }
    }
}

TEST_CASE("ball eigenvalue estimate against the euclidean closed form") {
    // On the euclidean 3-ball the principal Dirichlet eigenvalue is (pi/R)^2.
    const auto e3 = ManifoldModel::euclidean(3);
    const double pi = std::acos(-1.0);
    CHECK(oracle::rel_err(lambda1_ball_estimate(e3, pi), 1.0) < 1e-6);
    CHECK(oracle::rel_err(lambda1_ball_estimate(e3, 2.0), pi * pi / 4.0) < 1e-6);

    // On hyperbolic space the ball value decreases to (n-1)^2/4 as R grows.
    const auto h2 = ManifoldModel::hyperbolic(2);
    const double l10 = lambda1_ball_estimate(h2, 10.0);
    const double l20 = lambda1_ball_estimate(h2, 20.0);
    CHECK(l10 > l20);
    CHECK(l20 > 0.25);
    CHECK(l20 < 0.30);
}

TEST_CASE("numeric spectral floor matches closed forms and fills the gap") {
    CHECK(oracle::rel_err(lambda_star_numeric(ManifoldModel::hyperbolic(3)), 1.0) < 1e-14);
    CHECK(oracle::rel_err(lambda_star_numeric(ManifoldModel::scaled_hyperbolic(2, 3.0)),
                          9.0 / 4.0) < 1e-14);
    CHECK(lambda_star_numeric(ManifoldModel::euclidean(3)) == 0.0);
    // Power-decay with gamma > 0: curvature grows, so the floor exceeds the
    // gamma = 0 value of the same c_hat.
    const double base = lambda_star_numeric(ManifoldModel::power_decay(3, 0.5, 0.0));
    const double grown = lambda_star_numeric(ManifoldModel::power_decay(3, 0.5, 1.0));
    CHECK(grown > base);
}

TEST_CASE("input validation") {
    const auto m = ManifoldModel::hyperbolic(2);
    CHECK_THROWS(solve_ground_state(m, -0.1, uniform_radii(10.0, 100)));
    CHECK_THROWS(solve_ground_state(m, 0.2, {}));
    std::vector<double> bad = {0.0, 1.0, 0.5};  // not ascending
    CHECK_THROWS(solve_ground_state(m, 0.2, bad));
}
