#include "hypheat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hypheat/detail/ode.hpp"

namespace hypheat {

namespace {

struct SeriesStart {
    double c2, c4;
};

// phi = 1 + c2 r^2 + c4 r^4 + O(r^6) near the pole, from matching the
// radial equation phi'' + drift phi' + lambda phi = 0 order by order.
SeriesStart series_coefficients(const ManifoldModel& m, double lambda) {
    const int n = m.dim();
    const double g0 = m.curvature_G(0.0);
    const double c2 = -lambda / (2.0 * n);
    const double c4 = -c2 * (lambda + 2.0 * (n - 1) * g0 / 3.0) / (4.0 * (n + 2));
    return {c2, c4};
}

detail::OdeOptions eigen_ode_options() {
    detail::OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-300;  // profiles decay through hundreds of digits; control relatively
    o.dt_init = 1e-4;
    o.dt_max = 0.25;
    return o;
}

// Integrates the profile outward.  on_node(r, phi, dphi) is called at every
// requested radius; returns the radius of the first sign change if one occurs
// before r_end, +infinity otherwise.
template <class NodeFn>
double integrate_profile(const ManifoldModel& m, double lambda,
                         const std::vector<double>& radii, double r_end, NodeFn&& on_node) {
    const auto [c2, c4] = series_coefficients(m, lambda);
    auto series_phi = [&](double r) { return 1.0 + r * r * (c2 + c4 * r * r); };
    auto series_dphi = [&](double r) { return r * (2.0 * c2 + 4.0 * c4 * r * r); };

    double r_start = 1e-3;
    for (double r : radii)
        if (r > 0.0) {
            r_start = std::min(r_start, r);
            break;
        }

    std::size_t next = 0;
    while (next < radii.size() && radii[next] <= r_start) {
        on_node(radii[next], series_phi(radii[next]), series_dphi(radii[next]));
        ++next;
    }
    if (r_start >= r_end && next >= radii.size()) return std::numeric_limits<double>::infinity();

    auto rhs = [&](double r, const detail::OdeState<2>& y, detail::OdeState<2>& d) {
        d[0] = y[1];
        d[1] = -(m.radial_drift(r) * y[1] + lambda * y[0]);
    };
    detail::Rk45Stepper<2, decltype(rhs)> stepper(rhs, eigen_ode_options());

    double r = r_start;
    detail::OdeState<2> y{series_phi(r_start), series_dphi(r_start)};
    detail::OdeState<2> dy;
    rhs(r, y, dy);
    while (true) {
        double target = r_end;
        if (next < radii.size()) target = std::min(target, radii[next]);
        if (r >= target) {
            if (next < radii.size() && r >= radii[next]) {
                on_node(radii[next], y[0], y[1]);
                ++next;
                continue;
            }
            if (r >= r_end) break;
            continue;
        }
        const double r_prev = r;
        const double phi_prev = y[0];
        stepper.clip_at(target);
        if (!stepper.try_advance(r, y, dy)) continue;
        if (y[0] <= 0.0) {
            const double w = phi_prev / (phi_prev - y[0]);
            return r_prev + w * (r - r_prev);
        }
    }
    return std::numeric_limits<double>::infinity();
}

}  // namespace

double GroundState::operator()(double radius) const {
    if (radius <= r.front()) return phi.front();
    if (radius > r.back()) throw std::domain_error("GroundState: radius beyond sampled range");
    auto it = std::upper_bound(r.begin(), r.end(), radius);
    const std::size_t j = std::size_t(it - r.begin());
    const double h = r[j] - r[j - 1];
    const double s = (radius - r[j - 1]) / h;
    const double p0 = phi[j - 1], p1 = phi[j];
    const double d0 = dphi[j - 1] * h, d1 = dphi[j] * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * d0 + (-2 * s3 + 3 * s2) * p1 +
           (s3 - s2) * d1;
}

double GroundState::sup() const {
    double s = 0.0;
    for (double a : phi) s = std::max(s, a);
    return s;
}

GroundState solve_ground_state(const ManifoldModel& m, double lambda,
                               const std::vector<double>& radii) {
    if (radii.empty()) throw std::invalid_argument("solve_ground_state: no radii");
    if (radii.front() < 0.0) throw std::invalid_argument("solve_ground_state: negative radius");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            throw std::invalid_argument("solve_ground_state: radii must be ascending");
    if (radii.back() > m.r_max())
        throw std::invalid_argument("solve_ground_state: radius beyond the model's range");
    if (!(lambda >= 0.0)) throw std::invalid_argument("solve_ground_state: lambda must be >= 0");

    GroundState gs;
    gs.lambda = lambda;
    gs.r = radii;
    gs.phi.reserve(radii.size());
    gs.dphi.reserve(radii.size());
    const double zero_at = integrate_profile(m, lambda, radii, radii.back(),
                                             [&](double, double p, double dp) {
                                                 gs.phi.push_back(p);
                                                 gs.dphi.push_back(dp);
                                             });
    if (zero_at < radii.back() || gs.phi.size() < radii.size())
        throw eigenvalue_too_large("profile loses positivity near r = " +
                                   std::to_string(zero_at));
    return gs;
}

EnvelopeFit fit_envelope(const ManifoldModel& m, const GroundState& gs, double r_lo,
                         double r_hi) {
    const double half = 0.5 * (m.dim() - 1);
    EnvelopeFit fit;
    fit.c_low = std::numeric_limits<double>::infinity();
    fit.c_up = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < gs.r.size(); ++i) {
        const double r = gs.r[i];
        if (r < r_lo || r > r_hi) continue;
        const double env = (1.0 + r) * std::exp(-half * r);
        const double ratio = gs.phi[i] / env;
        fit.c_low = std::min(fit.c_low, ratio);
        fit.c_up = std::max(fit.c_up, ratio);
        ++used;
    }
    if (used < 3) throw std::invalid_argument("fit_envelope: too few samples in window");
    return fit;
}

std::vector<double> supersolution_residual(const ManifoldModel& m,
                                           const std::vector<double>& radii,
                                           const std::vector<double>& phi, double lambda,
                                           double tol) {
    const std::size_t n = radii.size();
    if (phi.size() != n) throw std::invalid_argument("supersolution_residual: size mismatch");
    if (n < 7) throw std::invalid_argument("supersolution_residual: need at least 7 samples");
    if (radii.front() <= 0.0)
        throw std::invalid_argument("supersolution_residual: samples must avoid the pole");
    const double h = radii[1] - radii[0];
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(radii[i] - radii[i - 1] - h) > 1e-9 * h)
            throw std::invalid_argument("supersolution_residual: samples must be uniform");

    // Five-point first/second derivative weights at window positions 0..4.
    static const double w1[5][5] = {{-25, 48, -36, 16, -3},
                                    {-3, -10, 18, -6, 1},
                                    {1, -8, 0, 8, -1},
                                    {-1, 6, -18, 10, 3},
                                    {3, -16, 36, -48, 25}};
    static const double w2[5][5] = {{35, -104, 114, -56, 11},
                                    {11, -20, 6, 4, -1},
                                    {-1, 16, -30, 16, -1},
                                    {-1, 4, 6, -20, 11},
                                    {11, -56, 114, -104, 35}};

    std::vector<double> res(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j0 = i < 2 ? 0 : (i > n - 3 ? n - 5 : i - 2);
        const std::size_t p = i - j0;
        double d1 = 0.0, d2 = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            d1 += w1[p][k] * phi[j0 + k];
            d2 += w2[p][k] * phi[j0 + k];
        }
        d1 /= 12.0 * h;
        d2 /= 12.0 * h * h;
        res[i] = -(d2 + m.radial_drift(radii[i]) * d1) - lambda * phi[i];
        if (res[i] < -tol)
            throw not_a_supersolution("deficit " + std::to_string(res[i]) + " at r = " +
                                      std::to_string(radii[i]));
    }
    return res;
}

double ground_state_residual_sup(const ManifoldModel& m, double lambda, double r_hi,
                                 double h) {
    std::vector<double> radii;
    for (double r = h; r <= r_hi + 0.5 * h; r += h) radii.push_back(r);
    const GroundState gs = solve_ground_state(m, lambda, radii);
    const auto res =
        supersolution_residual(m, gs.r, gs.phi, lambda, std::numeric_limits<double>::infinity());
    double s = 0.0;
    for (double v : res) s = std::max(s, std::fabs(v));
    return s;
}

double lambda1_ball_estimate(const ManifoldModel& m, double R, double tol) {
    if (!(R > 0.0) || R > m.r_max())
        throw std::invalid_argument("lambda1_ball_estimate: radius outside the model range");
    const std::vector<double> no_nodes;
    auto first_zero = [&](double lambda) {
        return integrate_profile(m, lambda, no_nodes, R, [](double, double, double) {});
    };
    // Bracket: grow until the profile develops a zero inside the ball.
    double lo = 0.0, hi = std::max(1.0, lambda1_hyperbolic(m.dim()));
    int guard = 0;
    while (!(first_zero(hi) <= R)) {
        lo = hi;
        hi *= 2.0;
        if (++guard > 60)
            throw std::runtime_error("lambda1_ball_estimate: failed to bracket the eigenvalue");
    }
    while (hi - lo > tol * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (first_zero(mid) <= R ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double lambda_star_numeric(const ManifoldModel& m) {
    if (m.kind() == WarpKind::power_decay && m.gamma() > 0.0)
        return lambda1_ball_estimate(m, 0.98 * m.r_max());
    return lambda_star(m);
}

}  // namespace hypheat
