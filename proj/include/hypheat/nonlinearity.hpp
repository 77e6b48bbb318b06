#pragma once

namespace hypheat {

// Reaction families driving the semilinear heat flows.
//
// Type I:  f(s, t) = t^q g(s), with g spliced from three pieces:
//   (0, eps]   : s |ln s|^{-alpha}        (singular, convex, flat at 0)
//   (eps, 1/2] : the chord into (1/2, kappa/4)
//   (1/2, inf) : kappa s^2
// eps is the largest s <= e^{-2} at which the singular slope does not exceed
// the chord slope, so the assembled g is continuous, convex and
// non-decreasing, and the quadratic tail dominates kappa s^2 exactly.
//
// Type II: f(s, t) = e^{mu t} s (e^{beta s^p} - 1).
struct TypeOneSpec {
    double alpha;
    double q;
    double kappa_quad;
    // splice data fixed at construction
    double eps_splice;
    double mid_slope;
    double mid_intercept;

    static TypeOneSpec make(double alpha, double q, double kappa_quad = 1.0);
};

struct TypeTwoSpec {
    double mu;
    double beta;
    double p;

    static TypeTwoSpec make(double mu, double beta, double p);
};

// Value at which eval_f saturates instead of overflowing: explosions stay
// finite and monotone, so the solver can ride them to its sup ceiling and the
// detector sees every blow-up signal fire.
inline constexpr double kReactionSaturation = 1e300;

double eval_g(const TypeOneSpec& spec, double s);
double eval_g_deriv(const TypeOneSpec& spec, double s);  // right-derivative at kinks

double eval_f(const TypeOneSpec& spec, double s, double t);
double eval_f(const TypeTwoSpec& spec, double s, double t);

// Critical exponent 1 + 4 mu / (n-1)^2 of the Type II family on hyperbolic
// space: exponents p below it mean every solution blows up, above it small
// data survive globally.
double fujita_exponent(int n, double mu);

// Integral of 1/g over (1/2, infinity); finite because the tail is
// quadratic.  Bounded by 2/kappa_quad.
double reciprocal_tail(const TypeOneSpec& spec, double tol = 1e-10);

}  // namespace hypheat
