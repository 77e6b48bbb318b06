// Analytic certificates, scalar majorants, regime predicates, and the
// kernel-weighted trajectory audit.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "hypheat/comparison.hpp"
#include "hypheat/grid.hpp"
#include "hypheat/nonlinearity.hpp"
#include "hypheat/solver.hpp"
#include "hypheat/spectral.hpp"
#include "oracles.hpp"

using namespace hypheat;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("regime names are stable identifiers") {
    CHECK(regime_name(Regime::global_small_data) == "Global");
    CHECK(regime_name(Regime::blow_up_all_data) == "BlowUp");
    CHECK(regime_name(Regime::borderline_unknown) == "BorderlineUnknown");
}

TEST_CASE("exponential-weight threshold on constant curvature is sharp at p*lambda1") {
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    const ThresholdTypeII th = threshold_type2(h2, 1.0);
    CHECK(th.global_below == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(th.blowup_above == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(th.global_inclusive);

    CHECK(th.classify(0.10) == Regime::global_small_data);
    CHECK(th.classify(0.25) == Regime::global_small_data);  // equality still decays
    CHECK(th.classify(0.26) == Regime::blow_up_all_data);
    CHECK(th.certificate(0.25) == "mu <= p*lambda1");
    CHECK(th.certificate(0.30) == "mu > p*lambda1");

    const ManifoldModel h3 = ManifoldModel::hyperbolic(3);
    CHECK(threshold_type2(h3, 2.0).global_below == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("exponential-weight threshold on warped models keeps an open gap") {
    // sinh-type warp with unit rate: the spectral floor matches the
    // constant-curvature value but only the strict side is certified.
    const ManifoldModel ms = ManifoldModel::scaled_hyperbolic(3, 1.0);
    const ThresholdTypeII th = threshold_type2(ms, 1.0);
    CHECK(th.global_below == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(th.global_inclusive);
    CHECK(th.blowup_above == kInf);

    CHECK(th.classify(0.5) == Regime::global_small_data);
    CHECK(th.classify(1.0) == Regime::borderline_unknown);  // equality not certified here
    CHECK(th.classify(3.0) == Regime::borderline_unknown);  // no upper estimate supplied
    CHECK(th.certificate(0.5) == "mu < p*lambda_star");
    CHECK(th.certificate(3.0) == "mu inside the uncertified spectral gap");

    // A caller-supplied upper estimate of the spectral bottom closes the gap
    // from above.
    const ThresholdTypeII th2 = threshold_type2(ms, 1.0, 1.0);
    CHECK(th2.blowup_above == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(th2.classify(3.0) == Regime::blow_up_all_data);
    CHECK(th2.certificate(3.0) == "mu > p*lambda1 upper estimate");
}

TEST_CASE("exponential-weight threshold declines flat space and unbounded curvature") {
    const ThresholdTypeII flat = threshold_type2(ManifoldModel::euclidean(3), 1.0);
    CHECK(flat.classify(0.0) == Regime::borderline_unknown);
    CHECK(flat.classify(100.0) == Regime::borderline_unknown);

    // gamma = 2 grows like exp(r^3): keep the table short of overflow.
    const ManifoldModel grow = ManifoldModel::power_decay(3, 1.0, 2.0, 10.0);
    const ThresholdTypeII th = threshold_type2(grow, 1.0, 5.0);
    CHECK(th.classify(0.01) == Regime::borderline_unknown);
    CHECK(th.classify(100.0) == Regime::borderline_unknown);

    // gamma = 0 keeps the curvature bounded, so the floor side works again.
    ManifoldModel m0 = ManifoldModel::power_decay(3, 0.5, 0.0);
    const double ls = lambda_star(m0);  // matches the sinh-type warp at rate sqrt(2*0.5)
    CHECK(ls == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(threshold_type2(m0, 1.0).global_below == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(threshold_type2(ManifoldModel::hyperbolic(2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(threshold_type2(ManifoldModel::hyperbolic(2), -1.0), std::invalid_argument);
}

TEST_CASE("amplitude majorant with zero coupling never moves") {
    const TypeTwoSpec spec = TypeTwoSpec::make(0.5, 1.0, 1.0);
    const AmplitudePath path = amplitude_ode(spec, 0.0, 10.0);
    CHECK_FALSE(path.escaped);
    CHECK(path.a_sup == doctest::Approx(1.0));
    CHECK(path.at(0.0) == doctest::Approx(1.0));
    CHECK(path.at(7.3) == doctest::Approx(1.0));
    CHECK(path.t.back() == doctest::Approx(10.0));
}

TEST_CASE("amplitude majorant matches a high-order scalar reference") {
    // mu = 0, beta = 1, p = 1, C = 1: a' = a (e^a - 1), a(0) = 1.
    const TypeTwoSpec spec = TypeTwoSpec::make(0.0, 1.0, 1.0);
    // Land the integrator exactly on t = 0.2 so the comparison sees the
    // integrator, not the linear interpolation between stored nodes.
    const AmplitudePath path = amplitude_ode(spec, 1.0, 0.2);
    REQUIRE_FALSE(path.escaped);
    const long double ref =
        oracle::rk4_scalar([](long double, long double a) { return a * std::expm1l(a); }, 1.0L,
                           0.0L, 0.2L, 40000);
    CHECK(path.at(0.2) == doctest::Approx(double(ref)).epsilon(1e-7));

    // Monotone time stamps and a_sup consistent with the stored samples.
    double worst = 0.0;
    for (std::size_t i = 1; i < path.t.size(); ++i) {
        CHECK(path.t[i] > path.t[i - 1]);
        worst = std::max(worst, path.a[i]);
    }
    CHECK(path.a_sup == doctest::Approx(std::max(worst, path.a.front())));
}

TEST_CASE("amplitude majorant escape time matches the quadrature of the lifetime integral") {
    // Separable lifetime: T = integral_1^inf da / (a (e^a - 1)).  The tail
    // beyond a = 40 is below e^{-40}, far under the comparison tolerance.
    const TypeTwoSpec spec = TypeTwoSpec::make(0.0, 1.0, 1.0);
    const AmplitudePath path = amplitude_ode(spec, 1.0, 10.0);
    REQUIRE(path.escaped);
    const long double T = oracle::simpson(
        [](long double a) { return 1.0L / (a * std::expm1l(a)); }, 1.0L, 40.0L, 4000);
    CHECK(path.t_escape == doctest::Approx(double(T)).epsilon(1e-3));
    CHECK(path.t_escape < 10.0);
}

TEST_CASE("amplitude majorant barely grows for weak coupling") {
    const TypeTwoSpec spec = TypeTwoSpec::make(1.0, 1.0, 2.0);
    const AmplitudePath path = amplitude_ode(spec, 1e-3, 5.0);
    REQUIRE_FALSE(path.escaped);
    CHECK(path.a_sup >= 1.0);
    CHECK(path.a_sup - 1.0 < 1e-2);
    CHECK(path.at(5.0) >= path.at(0.0));
}

TEST_CASE("amplitude majorant rejects bad arguments") {
    const TypeTwoSpec spec = TypeTwoSpec::make(0.0, 1.0, 1.0);
    CHECK_THROWS_AS(amplitude_ode(spec, -0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(amplitude_ode(spec, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(amplitude_ode(spec, 1.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("certified amplitude solves the mode-locked fixed point") {
    // Returned theta satisfies X e^X = p*lambda - mu with X = beta (C e theta)^p.
    const double lambda = 0.25, mu = 0.1, beta = 1.0, p = 1.0, C = 1.0;
    const double theta = certified_amplitude_type2(lambda, mu, beta, p, C);
    REQUIRE(theta > 0.0);
    const double X = beta * std::pow(C * M_E * theta, p);
    CHECK(X * std::exp(X) == doctest::Approx(p * lambda - mu).epsilon(1e-12));

    // Exponent pair away from 1 exercises the root and the power.
    const double t2 = certified_amplitude_type2(1.0, 0.25, 2.0, 1.5, 0.7);
    const double X2 = 2.0 * std::pow(0.7 * M_E * t2, 1.5);
    CHECK(X2 * std::exp(X2) == doctest::Approx(1.5 * 1.0 - 0.25).epsilon(1e-12));
}

TEST_CASE("certified amplitude vanishes at and above the spectral threshold") {
    CHECK(certified_amplitude_type2(0.25, 0.25, 1.0, 1.0, 1.0) == 0.0);
    CHECK(certified_amplitude_type2(0.25, 0.50, 1.0, 1.0, 1.0) == 0.0);
    CHECK(certified_amplitude_type2(0.25, 0.2499, 1.0, 1.0, 1.0) > 0.0);
}

TEST_CASE("certified amplitude is monotone in the margin and the scales") {
    const double base = certified_amplitude_type2(0.25, 0.10, 1.0, 1.0, 1.0);
    CHECK(certified_amplitude_type2(0.30, 0.10, 1.0, 1.0, 1.0) > base);  // more margin
    CHECK(certified_amplitude_type2(0.25, 0.15, 1.0, 1.0, 1.0) < base);  // less margin
    CHECK(certified_amplitude_type2(0.25, 0.10, 2.0, 1.0, 1.0) < base);  // stiffer reaction
    CHECK(certified_amplitude_type2(0.25, 0.10, 1.0, 1.0, 2.0) ==
          doctest::Approx(base / 2.0).epsilon(1e-13));  // C only rescales

    CHECK_THROWS_AS(certified_amplitude_type2(0.0, 0.1, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certified_amplitude_type2(0.25, -0.1, 1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certified_amplitude_type2(0.25, 0.1, 0.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certified_amplitude_type2(0.25, 0.1, 1.0, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certified_amplitude_type2(0.25, 0.1, 1.0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("critical barrier weight matches the one-dimensional minimisation") {
    CHECK(critical_alpha_weight(1.0) == doctest::Approx(2.0).epsilon(1e-14));
    for (double alpha : {0.5, 1.5, 2.0, 4.0}) {
        const auto obj = [alpha](double d) { return d + std::pow(d, -1.0 / alpha); };
        const double d_star = oracle::golden_min(obj, 1e-3, 50.0, 1e-12);
        CHECK(critical_alpha_weight(alpha) == doctest::Approx(obj(d_star)).epsilon(1e-9));
    }
    CHECK_THROWS_AS(critical_alpha_weight(0.0), std::invalid_argument);
}

TEST_CASE("logarithm-weight certificate reproduces the closed-form envelope") {
    // lambda = 1/4, alpha = 1, q = 1/2: default split delta = lambda/(1+q),
    // gamma = 1/delta, and the peak value has an explicit closed form.
    const double eps = std::exp(-2.0), sup_phi = 1.0;
    const TypeICertificate cert = certify_type1(0.25, 1.0, 0.5, eps, sup_phi);
    REQUIRE(cert.valid);
    CHECK(cert.delta == doctest::Approx(0.25 / 1.5).epsilon(1e-14));
    CHECK(cert.gamma == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(cert.sigma == doctest::Approx(0.5));
    // sup_t [6 sqrt(t) - t/12] sits at t = 36^2 with value 6*(1-1/2)*36 = 108.
    CHECK(cert.exponent_sup == doctest::Approx(108.0).epsilon(1e-11));
    CHECK(cert.theta_max ==
          doctest::Approx(eps * std::exp(-108.0) / sup_phi).epsilon(1e-10));
    CHECK(cert.theta_max > 0.0);  // representable despite the huge exponent

    // A caller-chosen delta changes the envelope accordingly.
    const TypeICertificate c2 = certify_type1(0.25, 1.0, 0.5, eps, sup_phi, 0.1);
    REQUIRE(c2.valid);
    const double tp = std::pow(0.5 * 10.0 / 0.15, 2.0);
    CHECK(c2.exponent_sup == doctest::Approx(10.0 * 0.5 * std::sqrt(tp)).epsilon(1e-11));
}

TEST_CASE("balanced exponents certify only when the barrier weight fits under lambda") {
    const double eps = std::exp(-2.0);
    // lambda = 9/4 admits delta = 1 with delta + 1/delta = 2 <= 9/4.
    const TypeICertificate ok = certify_type1(2.25, 1.0, 1.0, eps, 1.0, 1.0);
    REQUIRE(ok.valid);
    CHECK(ok.exponent_sup == 0.0);
    CHECK(ok.theta_max == doctest::Approx(eps).epsilon(1e-14));

    // lambda = 1/4 cannot: delta + 1/delta >= 2 > 1/4 for every delta.
    for (double d : {0.01, 0.05, 0.1, 0.2, 0.24})
        CHECK_FALSE(certify_type1(0.25, 1.0, 1.0, eps, 1.0, d).valid);
    CHECK_FALSE(certify_type1(0.25, 1.0, 1.0, eps, 1.0).valid);

    // Super-balanced weight growth defeats every barrier.
    CHECK_FALSE(certify_type1(100.0, 1.0, 2.0, eps, 1.0).valid);
    CHECK(certify_type1(100.0, 1.0, 2.0, eps, 1.0).sigma == doctest::Approx(2.0));
}

TEST_CASE("certificate rejects out-of-range arguments") {
    const double eps = std::exp(-2.0);
    CHECK_THROWS_AS(certify_type1(0.0, 1.0, 0.5, eps, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certify_type1(0.25, 0.0, 0.5, eps, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certify_type1(0.25, 1.0, -0.5, eps, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certify_type1(0.25, 1.0, 0.5, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certify_type1(0.25, 1.0, 0.5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(certify_type1(0.25, 1.0, 0.5, eps, 0.0), std::invalid_argument);
}

TEST_CASE("barrier lifetime is consistent with the certificate amplitude") {
    const double eps = std::exp(-2.0), sup_phi = 1.0;
    const TypeICertificate cert = certify_type1(0.25, 1.0, 0.5, eps, sup_phi);
    REQUIRE(cert.valid);

    const BarrierLifetime good = check_type1_barrier(0.25, 1.0, 0.5, eps, sup_phi,
                                                     0.5 * cert.theta_max, cert.delta);
    CHECK(good.global);
    CHECK(good.horizon == kInf);
    CHECK(good.exponent_sup == doctest::Approx(cert.exponent_sup).epsilon(1e-11));

    // Slightly above the certified amplitude the envelope pokes through at a
    // finite time, and the reported horizon is a root of the excess.
    const double theta_bad = 1.05 * cert.theta_max;
    const BarrierLifetime bad =
        check_type1_barrier(0.25, 1.0, 0.5, eps, sup_phi, theta_bad, cert.delta);
    CHECK_FALSE(bad.global);
    REQUIRE(bad.horizon > 0.0);
    REQUIRE(bad.horizon < kInf);
    const double B = std::log(theta_bad * sup_phi / eps);
    const double excess =
        B + cert.gamma * std::sqrt(bad.horizon) - (0.25 - cert.delta) * bad.horizon;
    CHECK(std::fabs(excess) < 1e-9 * std::max(1.0, std::fabs(B)));
}

TEST_CASE("barrier lifetime handles the balanced and super-balanced weights") {
    const double eps = std::exp(-2.0);
    // Balanced, decaying slope: global for any admissible amplitude.
    const BarrierLifetime flat = check_type1_barrier(2.25, 1.0, 1.0, eps, 1.0, 1e-3, 1.0);
    CHECK(flat.global);

    // Balanced, growing slope: explicit crossing time -B / (gamma - rate).
    const double theta = 0.5 * eps;
    const BarrierLifetime grow = check_type1_barrier(0.25, 1.0, 1.0, eps, 1.0, theta, 0.1);
    CHECK_FALSE(grow.global);
    const double slope = 10.0 - 0.15;
    CHECK(grow.horizon == doctest::Approx(-std::log(0.5) / slope).epsilon(1e-12));

    // Super-balanced weight: finite crossing found by bracketing.
    const BarrierLifetime steep = check_type1_barrier(0.25, 1.0, 2.0, eps, 1.0, theta, 0.1);
    CHECK_FALSE(steep.global);
    const double B = std::log(0.5);
    const double ex = B + 10.0 * std::pow(steep.horizon, 2.0) - 0.15 * steep.horizon;
    CHECK(std::fabs(ex) < 1e-8);

    // Constant weight (q = 0): the peak sits at t = 0, so it either holds
    // forever or fails immediately.
    const double V0 = std::pow(0.1, -1.0);  // gamma at delta = 0.1, alpha = 1
    const double th_ok = eps * std::exp(-V0) * 0.5;
    CHECK(check_type1_barrier(0.25, 1.0, 0.0, eps, 1.0, th_ok, 0.1).global);
    const BarrierLifetime now = check_type1_barrier(0.25, 1.0, 0.0, eps, 1.0, 3.0 * th_ok, 0.1);
    CHECK_FALSE(now.global);
    CHECK(now.horizon == 0.0);

    CHECK_THROWS_AS(check_type1_barrier(0.25, 1.0, 0.5, eps, 1.0, 1e-3, 0.3),
                    std::invalid_argument);  // delta >= lambda
    CHECK_THROWS_AS(check_type1_barrier(0.25, 1.0, 0.5, eps, 1.0, eps, 0.1),
                    std::invalid_argument);  // starts at the splice level
    CHECK_THROWS_AS(check_type1_barrier(0.25, 0.0, 0.5, eps, 1.0, 1e-3, 0.1),
                    std::invalid_argument);
}

TEST_CASE("logarithm-weight regime table") {
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    const ManifoldModel h3 = ManifoldModel::hyperbolic(3);
    const ManifoldModel h4 = ManifoldModel::hyperbolic(4);

    // Sub-balanced weight: global whenever the spectral floor is positive.
    CHECK(threshold_type1(h2, 1.0, 0.5).kind == Regime::global_small_data);
    CHECK(threshold_type1(h2, 2.0, 1.0).kind == Regime::global_small_data);

    // Super-balanced weight: blow-up regardless of the floor.
    CHECK(threshold_type1(h3, 1.0, 1.5).kind == Regime::blow_up_all_data);
    CHECK(threshold_type1(h4, 0.5, 1.0).kind == Regime::blow_up_all_data);

    // Balanced weight: decided by the two spectral comparisons.
    const Type1Verdict n2 = threshold_type1(h2, 1.0, 1.0);
    CHECK(n2.kind == Regime::blow_up_all_data);  // lambda1^2 = 1/16 < 1
    CHECK(n2.certificate == "lambda1^{alpha+1} < 1");
    const Type1Verdict n4 = threshold_type1(h4, 1.0, 1.0);
    CHECK(n4.kind == Regime::global_small_data);  // 2 <= 9/4
    const Type1Verdict n3 = threshold_type1(h3, 1.0, 1.0);
    CHECK(n3.kind == Regime::borderline_unknown);  // 2 > 1 but lambda1 = 1

    // Fast warp rate lifts the floor above the barrier weight.
    const ManifoldModel fast = ManifoldModel::scaled_hyperbolic(3, 2.0);
    CHECK(threshold_type1(fast, 1.0, 1.0).kind == Regime::global_small_data);
    CHECK(threshold_type1(fast, 1.0, 1.0, {}, 4.0).kind == Regime::global_small_data);

    // Flat space never has a positive floor.
    CHECK(threshold_type1(ManifoldModel::euclidean(3), 1.0, 0.5).kind ==
          Regime::borderline_unknown);

    CHECK_THROWS_AS(threshold_type1(h2, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(threshold_type1(h2, 1.0, -0.5), std::invalid_argument);
}

TEST_CASE("space-time barrier dominates the reaction at certified amplitudes") {
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    std::vector<double> radii;
    for (double r = 0.0; r <= 12.0 + 1e-12; r += 0.01) radii.push_back(r);
    const GroundState gs = solve_ground_state(h2, 0.25, radii);

    const TypeOneSpec spec = TypeOneSpec::make(1.0, 0.5);
    const TypeICertificate cert =
        certify_type1(0.25, 1.0, 0.5, spec.eps_splice, gs.sup());
    REQUIRE(cert.valid);

    Type1Barrier barrier{0.5 * cert.theta_max, cert.delta, 0.25, gs};
    CHECK(barrier.value(1.0, 2.0) ==
          doctest::Approx(barrier.theta * std::exp(-(0.25 - cert.delta) * 2.0) * gs(1.0))
              .epsilon(1e-13));

    std::vector<double> ts, rs;
    for (double t = 0.1; t <= 40.0 + 1e-9; t += 0.7) ts.push_back(t);
    for (double r = 0.0; r <= 10.0 + 1e-9; r += 0.5) rs.push_back(r);
    for (double t : ts)
        for (double r : rs) CHECK(barrier.defect(spec, r, t) >= 0.0);
    CHECK(barrier.first_failure(spec, ts, rs) == kInf);

    // A wildly over-sized amplitude fails, and the scan reports the earliest
    // sampled failure time.
    Type1Barrier big{10.0, cert.delta, 0.25, gs};
    CHECK(big.first_failure(spec, ts, rs) == doctest::Approx(ts.front()));
}

namespace {

Trajectory decaying_run(const ManifoldModel& m, double R, int cells, double theta,
                        const TypeTwoSpec& spec, double horizon, int snapshots) {
    auto [grid, lap] = discretize(m, R, cells);
    std::vector<double> radii;
    for (double c = 0.0; c <= R + 1e-12; c += 0.01) radii.push_back(c);
    const GroundState gs = solve_ground_state(m, lambda1_hyperbolic(m.dim()), radii);
    std::vector<double> u0(grid->unknowns());
    for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = theta * gs(grid->nodes()[i]);
    SolverControls ctl;
    ctl.snapshots = snapshots;
    Reaction f = [spec](double s, double t) { return eval_f(spec, s, t); };
    return evolve(lap, u0, f, horizon, ctl);
}

}  // namespace

TEST_CASE("flat amplitude majorant dominates the full evolution") {
    // The spatially flat path C a(t) solves the reaction exactly and ignores
    // the (dissipative) diffusion, so every snapshot must sit below it.
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    const TypeTwoSpec spec = TypeTwoSpec::make(0.3, 1.0, 1.0);
    const Trajectory traj = decaying_run(h2, 15.0, 300, 0.2, spec, 2.0, 9);
    REQUIRE(traj.stop == StopReason::horizon);

    const double C = traj.sup_initial;
    const AmplitudePath bar = amplitude_ode(spec, C, 2.0);
    REQUIRE_FALSE(bar.escaped);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        double sup = 0.0;
        for (double v : traj.fields[s]) sup = std::max(sup, v);
        CHECK(sup <= C * bar.at(traj.times[s]) * (1.0 + 1e-4) + 1e-12);
    }
}

TEST_CASE("kernel-weighted functional audit on a decaying run") {
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    const TypeTwoSpec spec = TypeTwoSpec::make(0.0, 1.0, 1.0);
    const Trajectory traj = decaying_run(h2, 15.0, 500, 0.05, spec, 16.0, 33);

    PhiAuditOptions opt;
    opt.lambda = 0.25;
    const PhiAudit audit = phi_functional_audit(traj, spec, opt);

    REQUIRE(audit.c_samples.size() == 3);
    double cmin = kInf, cmax = 0.0, clog = 0.0;
    for (double c : audit.c_samples) {
        CHECK(c > 0.0);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        clog += std::log(c);
    }
    CHECK(audit.c_fit == doctest::Approx(std::exp(clog / 3.0)).epsilon(1e-12));
    CHECK(audit.c_spread == doctest::Approx(cmax / cmin - 1.0).epsilon(1e-12));

    // Averaging a convex reaction beats reacting to the average, up to
    // quadrature error.
    CHECK(audit.convexity_worst >= -0.02);
    // The weighted average grows at least as fast as its own reaction.
    CHECK(audit.jensen_worst >= -0.05);
    // Small data keeps every term of the iterated lower bound under one.
    CHECK(audit.chain_ok);
    CHECK(audit.chain_lhs <= 1.0);
    CHECK(audit.chain_lhs > 0.0);

    // Guards: missing horizons, references beyond the run, too few snapshots.
    CHECK_THROWS_AS(phi_functional_audit(traj, spec, PhiAuditOptions{{}, 0.0, 0.05, 0.05, 60}),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        phi_functional_audit(traj, spec, PhiAuditOptions{{4.0, 32.0}, 0.0, 0.05, 0.05, 60}),
        std::invalid_argument);
}

TEST_CASE("functional audit needs enough early snapshots") {
    const ManifoldModel h2 = ManifoldModel::hyperbolic(2);
    const TypeTwoSpec spec = TypeTwoSpec::make(0.0, 1.0, 1.0);
    const Trajectory sparse = decaying_run(h2, 8.0, 120, 0.05, spec, 3.0, 4);
    PhiAuditOptions opt;
    opt.t_ref = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(phi_functional_audit(sparse, spec, opt), std::invalid_argument);
}
