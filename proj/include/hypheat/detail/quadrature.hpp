#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace hypheat::detail {

struct divergent_integral : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adaptive Simpson on [a, b].
template <typename F>
double adaptive_simpson(F f, double a, double b, double tol, int depth = 48) {
    auto simpson = [&](double lo, double hi, double flo, double fmid, double fhi) {
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    };
    std::function<double(double, double, double, double, double, double, double, int)> rec =
        [&](double lo, double hi, double flo, double fmid, double fhi, double whole,
            double eps, int d) -> double {
        const double m = 0.5 * (lo + hi);
        const double lm = 0.5 * (lo + m), rm = 0.5 * (m + hi);
        const double flm = f(lm), frm = f(rm);
        const double left = simpson(lo, m, flo, flm, fmid);
        const double right = simpson(m, hi, fmid, frm, fhi);
        if (d <= 0) return left + right;
        if (std::abs(left + right - whole) <= 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, m, flo, flm, fmid, left, eps / 2, d - 1) +
               rec(m, hi, fmid, frm, fhi, right, eps / 2, d - 1);
    };
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return rec(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, depth);
}

// Improper integral over [a, inf) of a positive decreasing-enough integrand,
// by summing dyadic windows until they become negligible.  Declares
// divergence when the window contributions fail to decay.
template <typename F>
double integral_to_infinity(F f, double a, double tol) {
    double total = 0.0;
    double lo = a, width = std::max(1.0, a);
    double prev = -1.0;
    for (int win = 0; win < 200; ++win) {
        const double hi = lo + width;
        const double part = adaptive_simpson(f, lo, hi, tol * 0.01);
        total += part;
        if (win > 4 && part <= tol * std::max(1.0, total)) return total;
        if (win > 8 && prev > 0.0 && part >= prev * 0.999)
            throw divergent_integral("tail integral does not converge");
        prev = part;
        lo = hi;
        width *= 2.0;
    }
    throw divergent_integral("tail integral did not settle within window budget");
}

// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
// Legendre recurrence.  Deterministic and accurate to machine precision for
// the modest orders used here.
inline void gauss_legendre(int k, std::vector<double>& x, std::vector<double>& w) {
    if (k < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
    x.assign(k, 0.0);
    w.assign(k, 0.0);
    for (int i = 0; i < (k + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= k; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[k - 1 - i] = z;
        w[i] = w[k - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

// Composite trapezoid with explicit node weights: sum_i w_i f_i where the
// weights come from the node spacing of a (possibly graded) grid.
inline std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    return w;
}

}  // namespace hypheat::detail
