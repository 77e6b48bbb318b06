#include "hypheat/nonlinearity.hpp"

#include <cmath>
#include <stdexcept>

#include "hypheat/detail/quadrature.hpp"

namespace hypheat {

namespace {

// Singular piece and its derivative, s in (0, 1).
double sing_value(double alpha, double s) {
    return s * std::pow(-std::log(s), -alpha);
}

double sing_deriv(double alpha, double s) {
    const double l = -std::log(s);
    return std::pow(l, -alpha) * (1.0 + alpha / l);
}

}  // namespace

TypeOneSpec TypeOneSpec::make(double alpha, double q, double kappa_quad) {
    if (alpha <= 0.0) throw std::invalid_argument("TypeOneSpec: alpha must be positive");
    if (q < 0.0) throw std::invalid_argument("TypeOneSpec: q must be non-negative");
    if (kappa_quad <= 0.0)
        throw std::invalid_argument("TypeOneSpec: kappa_quad must be positive");

    const double s_hi = std::exp(-2.0);
    auto chord = [&](double s) {
        return (kappa_quad / 4.0 - sing_value(alpha, s)) / (0.5 - s);
    };
    double eps = s_hi;
    if (sing_deriv(alpha, s_hi) > chord(s_hi)) {
        // The singular slope is increasing and the chord slope stays bounded
        // below, so there is a unique crossing; bisect it down.
        double lo = 1e-12, hi = s_hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (sing_deriv(alpha, mid) > chord(mid)) hi = mid;
            else lo = mid;
        }
        eps = lo;
    }

    TypeOneSpec spec;
    spec.alpha = alpha;
    spec.q = q;
    spec.kappa_quad = kappa_quad;
    spec.eps_splice = eps;
    spec.mid_slope = chord(eps);
    spec.mid_intercept = sing_value(alpha, eps) - spec.mid_slope * eps;
    return spec;
}

TypeTwoSpec TypeTwoSpec::make(double mu, double beta, double p) {
    if (mu < 0.0) throw std::invalid_argument("TypeTwoSpec: mu must be non-negative");
    if (beta <= 0.0) throw std::invalid_argument("TypeTwoSpec: beta must be positive");
    if (p <= 0.0) throw std::invalid_argument("TypeTwoSpec: p must be positive");
    return TypeTwoSpec{mu, beta, p};
}

double eval_g(const TypeOneSpec& spec, double s) {
    if (s < 0.0) throw std::domain_error("eval_g: negative state");
    if (s == 0.0) return 0.0;
    if (s <= spec.eps_splice) return sing_value(spec.alpha, s);
    if (s <= 0.5) return spec.mid_slope * s + spec.mid_intercept;
    return spec.kappa_quad * s * s;
}

double eval_g_deriv(const TypeOneSpec& spec, double s) {
    if (s < 0.0) throw std::domain_error("eval_g_deriv: negative state");
    if (s == 0.0) return 0.0;
    if (s < spec.eps_splice) return sing_deriv(spec.alpha, s);
    if (s < 0.5) return spec.mid_slope;
    return 2.0 * spec.kappa_quad * s;
}

double eval_f(const TypeOneSpec& spec, double s, double t) {
    if (t < 0.0) throw std::domain_error("eval_f: negative time");
    if (t == 0.0) return 0.0;
    const double g = eval_g(spec, s);
    const double v = std::pow(t, spec.q) * g;
    return std::min(v, kReactionSaturation);
}

double eval_f(const TypeTwoSpec& spec, double s, double t) {
    if (t < 0.0) throw std::domain_error("eval_f: negative time");
    if (s == 0.0) return 0.0;
    if (s < 0.0) throw std::domain_error("eval_f: negative state");
    const double x = spec.beta * std::pow(s, spec.p);
    const double log_budget = spec.mu * t + std::log(s) + x;
    if (log_budget > 650.0) return kReactionSaturation;  // e^650 ~ 1e282
    const double v = std::exp(spec.mu * t) * s * std::expm1(x);
    return std::min(v, kReactionSaturation);
}

double fujita_exponent(int n, double mu) {
    if (n < 2) throw std::invalid_argument("fujita_exponent: n must be >= 2");
    if (mu < 0.0) throw std::domain_error("fujita_exponent: mu must be non-negative");
    const double nm1 = n - 1;
    return 1.0 + 4.0 * mu / (nm1 * nm1);
}

double reciprocal_tail(const TypeOneSpec& spec, double tol) {
    const double v = detail::integral_to_infinity(
        [&](double s) { return 1.0 / eval_g(spec, s); }, 0.5, tol);
    return v;
}

}  // namespace hypheat
