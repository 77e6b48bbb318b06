#pragma once

// Analytic certificates and regime predicates for the two reaction families,
// plus the kernel-weighted functional that audits the blow-up argument on a
// computed trajectory.

#include <optional>
#include <string>
#include <vector>

#include "hypheat/geometry.hpp"
#include "hypheat/nonlinearity.hpp"
#include "hypheat/solver.hpp"
#include "hypheat/spectral.hpp"

namespace hypheat {

enum class Regime { global_small_data, blow_up_all_data, borderline_unknown };

std::string regime_name(Regime r);

// Exponential-weight family: the regime of e^{mu t} s (e^{beta s^p} - 1) is
// decided by where mu sits relative to p times the spectral quantities.
struct ThresholdTypeII {
    double global_below = 0.0;   // global for small data when mu is below this
    double blowup_above = 0.0;   // blow-up for all data when mu is above this
    bool global_inclusive = true;  // whether mu == global_below still certifies

    Regime classify(double mu) const;
    std::string certificate(double mu) const;
};

// Builds the threshold pair for a model. On the constant-curvature space both
// sides are sharp at p*lambda1 and equality stays global. On warped models the
// global side uses the spectral floor strictly, and the blow-up side needs a
// caller-supplied upper estimate of the spectral bottom (a ball eigenvalue);
// without one that side is unbounded.
ThresholdTypeII threshold_type2(const ManifoldModel& m, double p,
                                std::optional<double> lambda1_upper = {});

// Scalar majorant for the exponential-weight family: the spatially flat
// super-solution C a(t) with a'(t) = e^{mu t} a (e^{beta (C a)^p} - 1), a(0)=1.
struct AmplitudePath {
    std::vector<double> t;
    std::vector<double> a;
    bool escaped = false;     // reached the escape level before the horizon
    double t_escape = 0.0;    // valid when escaped
    double a_sup = 0.0;

    double at(double time) const;  // linear interpolation
};

AmplitudePath amplitude_ode(const TypeTwoSpec& spec, double C, double horizon,
                            double escape = 1e8);

// Largest initial amplitude for which the mode-locked barrier stays bounded:
// with X = beta (C e a0)^p, global decay holds whenever X e^X <= p*lambda - mu.
// Returns 0 when mu >= p*lambda (no certified amplitude).
double certified_amplitude_type2(double lambda, double mu, double beta, double p, double C);

// min over d > 0 of d + d^{-1/alpha}, attained at d = alpha^{-alpha/(1+alpha)}.
double critical_alpha_weight(double alpha);

// Logarithm-weight family: barrier theta e^{-(lambda-d) t} phi against
// t^q g(s). Validity is the single folded inequality
//   theta sup(phi) * sup_t exp(gamma t^{q/alpha} - (lambda-d) t) < eps.
struct TypeICertificate {
    bool valid = false;
    double delta = 0.0;
    double gamma = 0.0;         // delta^{-1/alpha}
    double sigma = 0.0;         // q / alpha
    double exponent_sup = 0.0;  // sup_t [gamma t^sigma - (lambda-delta) t]
    double theta_max = 0.0;     // largest amplitude satisfying the inequality
};

// Picks delta (or takes the caller's), evaluates the exponent envelope, and
// returns the admissible amplitude range. valid=false when no decaying
// barrier exists at these exponents.
TypeICertificate certify_type1(double lambda, double alpha, double q, double eps_splice,
                               double sup_phi, std::optional<double> delta = {});

// Checks a concrete (theta, delta) pair: global when the folded inequality
// holds for every t >= 0, otherwise reports the first time it fails.
struct BarrierLifetime {
    bool global = false;
    double horizon = 0.0;       // infinity when global
    double exponent_sup = 0.0;  // sup of the exponent envelope (sigma <= 1)
};

BarrierLifetime check_type1_barrier(double lambda, double alpha, double q,
                                    double eps_splice, double sup_phi, double theta,
                                    double delta);

struct Type1Verdict {
    Regime kind = Regime::borderline_unknown;
    std::string certificate;
};

// Regime of t^q g(s) from the exponent pair and the spectral quantities.
// lambda_star_known skips the numerical floor estimate when the caller has
// one cached.
Type1Verdict threshold_type1(const ManifoldModel& m, double alpha, double q,
                             std::optional<double> lambda1_upper = {},
                             std::optional<double> lambda_star_known = {});

// Concrete space-time barrier for dominance tests.
struct Type1Barrier {
    double theta = 0.0;
    double delta = 0.0;
    double lambda = 0.0;
    GroundState phi;

    double value(double r, double t) const;
    // Positive part of the super-solution inequality at one point:
    // delta*value - f(value, t). Negative means the barrier fails there.
    double defect(const TypeOneSpec& spec, double r, double t) const;
    double first_failure(const TypeOneSpec& spec, const std::vector<double>& t_samples,
                         const std::vector<double>& r_samples) const;
};

// Kernel-weighted average of a trajectory at the pole, with the three audits
// of the blow-up argument: pointwise convexity, discrete growth, and the
// on-diagonal compensation fit, plus the partial-sum chain bound.
struct PhiAuditOptions {
    std::vector<double> t_ref = {4.0, 8.0, 16.0};
    double lambda = 0.0;        // decay rate used in the compensation fit
    double jensen_tol = 0.05;
    double chain_tol = 0.05;
    int max_chain_terms = 60;
};

struct PhiAudit {
    std::vector<double> c_samples;      // Phi_0(T) T^{3/2} e^{lambda T} per reference T
    double c_fit = 0.0;                 // geometric mean of the samples
    double c_spread = 0.0;              // max/min - 1
    double convexity_worst = 0.0;       // min over samples of the direct convexity margin
    double jensen_worst = 0.0;          // min discrete-growth defect, horizon-scaled
    double chain_lhs = 0.0;             // largest partial-sum term, must stay <= 1
    bool chain_ok = false;
};

PhiAudit phi_functional_audit(const Trajectory& traj, const TypeTwoSpec& spec,
                              const PhiAuditOptions& opt = {});

}  // namespace hypheat
