#include "hypheat/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "hypheat/detail/ode.hpp"

namespace hypheat {

namespace {

constexpr double kTableSpacing = 0.005;
constexpr double kSeriesCut = 0.05;  // below this radius the Taylor start is used

void check_dim(int n) {
    if (n < 2) throw std::invalid_argument("manifold dimension must be >= 2");
    if (n > 64) throw std::invalid_argument("manifold dimension is unreasonably large");
}

}  // namespace

ManifoldModel::ManifoldModel(int n, WarpKind kind, double kappa, double c_hat,
                             double gamma, double r_max)
    : n_(n), kind_(kind), kappa_(kappa), c_hat_(c_hat), gamma_(gamma), r_max_(r_max) {
    check_dim(n);
    if (r_max <= 0.0 || r_max > 400.0)
        throw std::invalid_argument("r_max must lie in (0, 400]");
}

ManifoldModel ManifoldModel::euclidean(int n, double r_max) {
    return ManifoldModel(n, WarpKind::euclidean, 0.0, 0.0, 0.0, r_max);
}

ManifoldModel ManifoldModel::hyperbolic(int n, double r_max) {
    return ManifoldModel(n, WarpKind::hyperbolic, 1.0, 0.0, 0.0, r_max);
}

ManifoldModel ManifoldModel::scaled_hyperbolic(int n, double kappa, double r_max) {
    if (kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
    return ManifoldModel(n, WarpKind::scaled_hyperbolic, kappa, 0.0, 0.0, r_max);
}

ManifoldModel ManifoldModel::power_decay(int n, double c_hat, double gamma, double r_max) {
    if (c_hat <= 0.0) throw std::invalid_argument("c_hat must be positive");
    if (gamma < 0.0) throw std::invalid_argument("gamma must be non-negative");
    ManifoldModel m(n, WarpKind::power_decay, std::sqrt(2.0 * c_hat), c_hat, gamma, r_max);
    m.build_warp_table();
    return m;
}

double ManifoldModel::curvature_G(double r) const {
    switch (kind_) {
        case WarpKind::euclidean: return 0.0;
        case WarpKind::hyperbolic: return 1.0;
        case WarpKind::scaled_hyperbolic: return kappa_ * kappa_;
        case WarpKind::power_decay:
            return c_hat_ * (1.0 + std::pow(std::max(r, 0.0), gamma_));
    }
    return 0.0;
}

void ManifoldModel::build_warp_table() {
    // psi'' = G(r) psi is regular at the pole, so we integrate (psi, psi')
    // straight from r = 0, landing exactly on the table nodes.
    auto rhs = [this](double r, const detail::OdeState<2>& y, detail::OdeState<2>& d) {
        d[0] = y[1];
        d[1] = curvature_G(r) * y[0];
    };
    auto table = std::make_shared<WarpTable>();
    table->dr = kTableSpacing;
    const std::size_t count = (std::size_t)std::llround(r_max_ / kTableSpacing) + 1;
    table->psi.reserve(count);
    table->dpsi.reserve(count);
    detail::OdeState<2> y{0.0, 1.0};
    detail::OdeOptions opts;
    opts.rtol = 1e-12;
    opts.atol = 1e-14;
    opts.dt_init = kTableSpacing / 4;
    table->psi.push_back(y[0]);
    table->dpsi.push_back(y[1]);
    for (std::size_t i = 1; i < count; ++i) {
        const double r0 = (double)(i - 1) * kTableSpacing;
        const double r1 = (double)i * kTableSpacing;
        y = detail::integrate<2>(rhs, y, r0, r1, opts);
        if (!std::isfinite(y[0]) || y[0] > 1e280)
            throw std::domain_error("power_decay warp overflows before r_max; reduce r_max");
        table->psi.push_back(y[0]);
        table->dpsi.push_back(y[1]);
    }
    table_ = std::move(table);
}

double ManifoldModel::warp(double r) const {
    if (r < 0.0) throw std::domain_error("warp: negative radius");
    if (r > r_max_ + 1e-9) throw std::domain_error("warp: radius beyond r_max");
    switch (kind_) {
        case WarpKind::euclidean: return r;
        case WarpKind::hyperbolic: return std::sinh(r);
        case WarpKind::scaled_hyperbolic: return std::sinh(kappa_ * r) / kappa_;
        case WarpKind::power_decay: break;
    }
    if (r < kSeriesCut) {
        // psi = r + C r^3/6 + C r^{3+g}/((3+g)(2+g)) + O(r^5)
        const double c = c_hat_, g = gamma_;
        return r + c * r * r * r / 6.0 +
               c * std::pow(r, 3.0 + g) / ((3.0 + g) * (2.0 + g));
    }
    const auto& t = *table_;
    const double x = r / t.dr;
    std::size_t i = std::min((std::size_t)x, t.psi.size() - 2);
    const double r0 = (double)i * t.dr, r1 = r0 + t.dr;
    // Quintic Hermite: psi'' = G psi is known at both endpoints.
    const double h = t.dr, s = (r - r0) / h;
    const double p0 = t.psi[i], p1 = t.psi[i + 1];
    const double d0 = t.dpsi[i] * h, d1 = t.dpsi[i + 1] * h;
    const double a0 = curvature_G(r0) * p0 * h * h, a1 = curvature_G(r1) * p1 * h * h;
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
    const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
    const double H2 = 0.5 * (s2 - 3 * s3 + 3 * s4 - s5);
    const double H3 = 10 * s3 - 15 * s4 + 6 * s5;
    const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
    const double H5 = 0.5 * (s3 - 2 * s4 + s5);
    return H0 * p0 + H1 * d0 + H2 * a0 + H3 * p1 + H4 * d1 + H5 * a1;
}

double ManifoldModel::warp_deriv(double r) const {
    if (r < 0.0) throw std::domain_error("warp_deriv: negative radius");
    if (r > r_max_ + 1e-9) throw std::domain_error("warp_deriv: radius beyond r_max");
    switch (kind_) {
        case WarpKind::euclidean: return 1.0;
        case WarpKind::hyperbolic: return std::cosh(r);
        case WarpKind::scaled_hyperbolic: return std::cosh(kappa_ * r);
        case WarpKind::power_decay: break;
    }
    if (r < kSeriesCut) {
        const double c = c_hat_, g = gamma_;
        return 1.0 + c * r * r / 2.0 + c * std::pow(r, 2.0 + g) / (2.0 + g);
    }
    const auto& t = *table_;
    const double x = r / t.dr;
    std::size_t i = std::min((std::size_t)x, t.psi.size() - 2);
    const double r0 = (double)i * t.dr, r1 = r0 + t.dr;
    const double h = t.dr, s = (r - r0) / h;
    // Cubic Hermite on psi' using psi'' = G psi at the endpoints.
    const double p0 = t.dpsi[i], p1 = t.dpsi[i + 1];
    const double d0 = curvature_G(r0) * t.psi[i] * h, d1 = curvature_G(r1) * t.psi[i + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * d0 +
           (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * d1;
}

double ManifoldModel::volume_weight(double r) const {
    return std::pow(warp(r), n_ - 1);
}

double ManifoldModel::radial_drift(double r) const {
    if (r <= 0.0) throw std::domain_error("radial_drift: pole at r = 0");
    const double nm1 = n_ - 1;
    switch (kind_) {
        case WarpKind::euclidean: return nm1 / r;
        case WarpKind::hyperbolic: return nm1 / std::tanh(r);
        case WarpKind::scaled_hyperbolic: return nm1 * kappa_ / std::tanh(kappa_ * r);
        case WarpKind::power_decay: break;
    }
    if (r < kSeriesCut) {
        // psi'/psi = 1/r + G(0) r/3 + O(r^{1+g})
        return nm1 * (1.0 / r + curvature_G(0.0) * r / 3.0);
    }
    return nm1 * warp_deriv(r) / warp(r);
}

double ManifoldModel::pair_distance(double r, double rho, double cos_theta) const {
    if (r < 0.0 || rho < 0.0) throw std::domain_error("pair_distance: negative radius");
    cos_theta = std::clamp(cos_theta, -1.0, 1.0);
    switch (kind_) {
        case WarpKind::euclidean:
            return std::sqrt(std::max(0.0, (r - rho) * (r - rho) +
                                               2.0 * r * rho * (1.0 - cos_theta)));
        case WarpKind::hyperbolic:
        case WarpKind::scaled_hyperbolic: {
            const double k = (kind_ == WarpKind::hyperbolic) ? 1.0 : kappa_;
            // cosh(kd) - 1 = (cosh(k(r-rho)) - 1) + sinh(kr) sinh(krho) (1-cos),
            // a sum of non-negative terms, so no cancellation for nearby points.
            const double x = (std::cosh(k * (r - rho)) - 1.0) +
                             std::sinh(k * r) * std::sinh(k * rho) * (1.0 - cos_theta);
            return std::log1p(x + std::sqrt(x * (x + 2.0))) / k;
        }
        case WarpKind::power_decay:
            throw std::domain_error("pair_distance: no closed form for power_decay");
    }
    return 0.0;
}

double lambda1_hyperbolic(int n) {
    check_dim(n);
    return (n - 1) * (n - 1) / 4.0;
}

double lambda_star(const ManifoldModel& m, std::optional<double> lambda1_estimate) {
    const double nm1 = m.dim() - 1;
    switch (m.kind()) {
        case WarpKind::euclidean: return 0.0;
        case WarpKind::hyperbolic: return nm1 * nm1 / 4.0;
        case WarpKind::scaled_hyperbolic: return nm1 * nm1 * m.kappa() * m.kappa() / 4.0;
        case WarpKind::power_decay:
            if (m.gamma() == 0.0) return nm1 * nm1 * m.kappa() * m.kappa() / 4.0;
            if (lambda1_estimate) {
                if (*lambda1_estimate <= 0.0)
                    throw std::invalid_argument("lambda_star: estimate must be positive");
                return *lambda1_estimate;
            }
            throw std::invalid_argument(
                "lambda_star: power_decay with gamma > 0 needs a principal-eigenvalue "
                "estimate (see spectral::lambda1_ball_estimate)");
    }
    return 0.0;
}

double ball_to_geodesic(double ball_norm) {
    if (ball_norm < 0.0 || ball_norm >= 1.0)
        throw std::domain_error("ball_to_geodesic: |x| must lie in [0, 1)");
    return std::log1p(ball_norm) - std::log1p(-ball_norm);
}

double ball_volume_factor(double ball_norm, int n) {
    check_dim(n);
    if (ball_norm < 0.0 || ball_norm >= 1.0)
        throw std::domain_error("ball_volume_factor: |x| must lie in [0, 1)");
    return std::pow(2.0 / (1.0 - ball_norm * ball_norm), n);
}

double sphere_measure(int n) {
    if (n < 1) throw std::invalid_argument("sphere_measure: n must be >= 1");
    return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

}  // namespace hypheat
