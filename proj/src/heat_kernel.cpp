#include "hypheat/heat_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hypheat/detail/linalg.hpp"
#include "hypheat/detail/quadrature.hpp"

namespace hypheat {

namespace {

// ln(r / sinh r), stable for all r >= 0.
double log_r_over_sinh(double r) {
    if (r < 1e-4) return -r * r / 6.0;
    return std::log(r) - r - std::log1p(-std::exp(-2.0 * r)) + std::log(2.0);
}

void check_rt(double r, double t, const char* who) {
    if (!(t > 0.0)) throw std::domain_error(std::string(who) + ": time must be positive");
    if (r < 0.0) throw std::domain_error(std::string(who) + ": negative radius");
}

// Linear diffusion evolution with step-doubling control, capturing the state
// at the requested (ascending) times.
std::vector<std::vector<double>> evolve_linear(const DiscreteLaplacian& lap,
                                               std::vector<double> u,
                                               const std::vector<double>& times, double rtol) {
    std::vector<std::vector<double>> captured;
    double t = 0.0, dt = 1e-6;
    std::size_t idx = 0;
    std::vector<double> big, small;
    long guard = 0;
    while (idx < times.size()) {
        if (++guard > 50'000'000) throw std::runtime_error("linear evolution stalled");
        const double target = times[idx];
        if (t >= target * (1.0 - 1e-12)) {
            captured.push_back(u);
            ++idx;
            continue;
        }
        bool landing = false;
        double h = dt;
        if (t + h >= target) {
            h = target - t;
            landing = true;
        }
        big = u;
        diffusion_step(lap, h, big);
        small = u;
        diffusion_step(lap, 0.5 * h, small);
        diffusion_step(lap, 0.5 * h, small);

        double sup = 0.0;
        for (double v : small) sup = std::max(sup, std::fabs(v));
        double err = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double sc = rtol * (std::max(std::fabs(u[i]), std::fabs(small[i])) + 1e-6 * sup);
            err = std::max(err, std::fabs(big[i] - small[i]) / sc);
        }
        if (!std::isfinite(err)) err = 1e12;

        if (err <= 1.0) {
            u.swap(small);
            t = landing ? target : t + h;
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
            dt = h * std::clamp(grow, 0.2, 5.0);
        } else {
            dt = h * std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.9);
            if (dt < 1e-14 * std::max(1.0, t))
                throw std::runtime_error("linear evolution step collapse");
        }
    }
    return captured;
}

}  // namespace

double log_kernel_proxy(int n, double r, double t) {
    check_rt(r, t, "log_kernel_proxy");
    if (n < 2) throw std::invalid_argument("log_kernel_proxy: dimension must be >= 2");
    const double nm1 = n - 1;
    return -0.5 * n * std::log(4.0 * M_PI * t) - 0.25 * nm1 * nm1 * t - 0.5 * nm1 * r -
           0.25 * r * r / t + 0.5 * (n - 3) * std::log1p(r + t) + std::log1p(r);
}

double kernel_proxy(int n, double r, double t) { return std::exp(log_kernel_proxy(n, r, t)); }

double log_kernel_h3(double r, double t) {
    check_rt(r, t, "log_kernel_h3");
    return -1.5 * std::log(4.0 * M_PI * t) - t - 0.25 * r * r / t + log_r_over_sinh(r);
}

double kernel_h3(double r, double t) { return std::exp(log_kernel_h3(r, t)); }

double KernelProfile::at(double r) const {
    const auto& x = grid->nodes();
    if (r <= 0.0) return k[0];
    if (r >= grid->radius()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t j = std::size_t(it - x.begin());
    const double w = (r - x[j - 1]) / (x[j] - x[j - 1]);
    const double v0 = k[j - 1];
    const double v1 = j < k.size() ? k[j] : 0.0;
    if (v0 > 0.0 && v1 > 0.0) return std::exp((1.0 - w) * std::log(v0) + w * std::log(v1));
    return (1.0 - w) * v0 + w * v1;
}

double KernelProfile::mass() const { return grid->mass(k); }

NumericalKernel::NumericalKernel(const ManifoldModel& m, double R, int n_cells,
                                 std::vector<double> times, KernelBuildOptions opt) {
    if (times.empty()) throw std::invalid_argument("NumericalKernel: no times requested");
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    if (times.front() <= 0.0)
        throw std::invalid_argument("NumericalKernel: times must be positive");

    auto [coarse, lap_c] = discretize(m, R, n_cells);
    auto fine = std::make_shared<RadialGrid>(coarse->refined());
    const DiscreteLaplacian lap_f = discretize(fine);

    const double s = opt.bump_width > 0.0 ? opt.bump_width : 4.0 * coarse->nodes()[1];
    if (times.front() < 10.0 * s * s)
        throw std::invalid_argument(
            "NumericalKernel: earliest time cannot resolve the initial spike; "
            "refine the mesh or start later");

    auto spike = [&](const RadialGrid& g) {
        std::vector<double> u(g.unknowns());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double r = g.nodes()[i];
            u[i] = std::exp(-0.5 * (r / s) * (r / s));
        }
        const double mass = g.mass(u);
        for (double& v : u) v /= mass;
        return u;
    };

    const auto snap_c = evolve_linear(lap_c, spike(*coarse), times, opt.rtol);
    const auto snap_f = evolve_linear(lap_f, spike(*fine), times, opt.rtol);

    grid_ = coarse;
    profiles_.resize(times.size());
    for (std::size_t q = 0; q < times.size(); ++q) {
        KernelProfile& p = profiles_[q];
        p.t = times[q];
        p.grid = coarse;
        p.k.resize(coarse->unknowns());
        for (std::size_t i = 0; i < p.k.size(); ++i)
            p.k[i] = std::max(0.0, (4.0 * snap_f[q][2 * i] - snap_c[q][i]) / 3.0);
        const double mass = p.mass();
        if (mass > 1.0)
            for (double& v : p.k) v /= mass;
    }
}

const KernelProfile& NumericalKernel::profile(double t) const {
    for (const auto& p : profiles_)
        if (std::fabs(p.t - t) <= 1e-9 * std::max(1.0, t)) return p;
    throw std::invalid_argument("NumericalKernel: no profile at t = " + std::to_string(t));
}

BoundCalibration calibrate_bounds(const NumericalKernel& kern,
                                  const std::vector<double>& r_samples,
                                  const std::vector<double>& t_samples, double failure_spread) {
    const ManifoldModel& m = kern.grid()->manifold();
    if (m.kind() != WarpKind::hyperbolic)
        throw std::invalid_argument("calibrate_bounds: comparison profile is for the "
                                    "constant-curvature model only");
    if (r_samples.empty() || t_samples.empty())
        throw std::invalid_argument("calibrate_bounds: empty sample set");
    for (double r : r_samples)
        if (r < 0.0 || r > 0.8 * kern.grid()->radius())
            throw std::invalid_argument("calibrate_bounds: sample radius too close to the "
                                        "absorbing boundary");

    BoundCalibration cal;
    cal.a_bound = std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        for (double r : r_samples) {
            const double num = kern.value(r, t);
            if (!(num > 0.0))
                throw std::runtime_error("calibrate_bounds: vanishing kernel sample");
            const double ratio = num / kernel_proxy(m.dim(), r, t);
            cal.ratios.push_back(ratio);
            cal.a_bound = std::min(cal.a_bound, ratio);
            cal.b_bound = std::max(cal.b_bound, ratio);
        }
    }
    if (cal.spread() > failure_spread)
        throw std::runtime_error("calibrate_bounds: envelope spread " +
                                 std::to_string(cal.spread()) + " exceeds " +
                                 std::to_string(failure_spread));
    return cal;
}

double log_rate(const std::vector<std::pair<double, double>>& diag_samples) {
    if (diag_samples.size() < 3)
        throw std::invalid_argument("log_rate: need at least three samples");
    for (std::size_t i = 0; i < diag_samples.size(); ++i) {
        if (!(diag_samples[i].second > 0.0))
            throw std::invalid_argument("log_rate: samples must be positive");
        if (i > 0 && diag_samples[i].first <= diag_samples[i - 1].first)
            throw std::invalid_argument("log_rate: times must be ascending");
    }
    const double t_max = diag_samples.back().first;
    if (t_max < 20.0)
        throw std::invalid_argument("log_rate: rate identification needs samples past t = 20");

    std::vector<double> ones, logt, ts, y;
    for (const auto& [t, kv] : diag_samples) {
        if (t < 0.5 * t_max) continue;
        ones.push_back(1.0);
        logt.push_back(std::log(t));
        ts.push_back(t);
        y.push_back(std::log(kv));
    }
    if (ts.size() < 3) {
        ones.clear(), logt.clear(), ts.clear(), y.clear();
        for (const auto& [t, kv] : diag_samples) {
            ones.push_back(1.0);
            logt.push_back(std::log(t));
            ts.push_back(t);
            y.push_back(std::log(kv));
        }
    }
    const auto coef = detail::least_squares({ones, logt, ts}, y);
    return -coef[2];
}

void SemigroupMatrix::apply(const std::vector<double>& u, std::vector<double>& out,
                            ExecPolicy pol) const {
    const std::size_t n = grid->unknowns();
    if (u.size() != n) throw std::invalid_argument("SemigroupMatrix::apply: size mismatch");
    const auto& vol = grid->cell_volumes();
    out.assign(n, 0.0);
    if (pol == ExecPolicy::parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < (long)n; ++i) {
            double s = 0.0;
            const double* row = w.data() + std::size_t(i) * n;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * vol[j] * u[j];
            out[i] = s;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            const double* row = w.data() + i * n;
            for (std::size_t j = 0; j < n; ++j) s += row[j] * vol[j] * u[j];
            out[i] = s;
        }
    }
}

SemigroupMatrix build_semigroup_matrix(GridPtr grid, double t,
                                       const std::function<double(double)>& radial_kernel,
                                       ExecPolicy pol) {
    const ManifoldModel& m = grid->manifold();
    const int n_dim = m.dim();
    const std::size_t n = grid->unknowns();
    const auto& x = grid->nodes();
    const auto& vol = grid->cell_volumes();

    // Composite Gauss-Legendre rule adapted per pair.  The integrand peaks at
    // theta = 0 and decays as the pair distance climbs off its minimum
    // |r - rho|; at large radii the peak is exponentially narrow in the
    // angle, far below what any fixed rule on [0, pi] resolves.  theta_p
    // marks an e^{-2} drop of a heat profile at time t and theta_w an e^{-40}
    // drop: one core panel covers [0, theta_p], angle-doubling panels ladder
    // across the decay up to theta_w, and a single closing panel absorbs the
    // negligible remainder.
    constexpr int kCoreOrder = 12;
    constexpr int kOctaveOrder = 8;
    constexpr int kMaxOctaves = 48;
    std::vector<double> cx, cw, ox, ow;
    detail::gauss_legendre(kCoreOrder, cx, cw);
    detail::gauss_legendre(kOctaveOrder, ox, ow);
    const double dir = sphere_measure(n_dim - 1);
    const double t_scale = std::max(t, 1e-12);
    const bool flat = m.kind() == WarpKind::euclidean;
    const double k = (m.kind() == WarpKind::scaled_hyperbolic) ? m.kappa() : 1.0;

    // ln sinh(x) without overflow for any positive x.
    auto log_sinh = [](double x) {
        if (x < 1e-4) return std::log(x) + x * x / 6.0;
        return x + std::log1p(-std::exp(-2.0 * x)) - std::log(2.0);
    };
    std::vector<double> lsh(n);
    if (!flat)
        for (std::size_t i = 0; i < n; ++i) lsh[i] = x[i] > 0.0 ? log_sinh(k * x[i]) : 0.0;

    // theta at which the pair distance reaches |r - rho| + W, where W makes
    // (d^2 - delta^2) / (4t) equal the requested log-drop.
    auto theta_at_drop = [&](std::size_t i, std::size_t j, double ln_drop) {
        const double r = x[i], rho = x[j];
        if (r <= 0.0 || rho <= 0.0) return M_PI;
        const double delta = std::fabs(r - rho);
        const double W = std::sqrt(delta * delta + 4.0 * ln_drop * t_scale) - delta;
        double sigma;  // 1 - cos(theta)
        if (flat) {
            sigma = (2.0 * delta * W + W * W) / (2.0 * r * rho);
        } else {
            // cosh(k(delta+W)) - cosh(k delta) = 2 sinh(s_p) sinh(s_m)
            const double s_p = 0.5 * k * (2.0 * delta + W), s_m = 0.5 * k * W;
            const double ln_sigma =
                std::log(2.0) + log_sinh(s_p) + log_sinh(s_m) - lsh[i] - lsh[j];
            sigma = ln_sigma >= std::log(2.0) ? 2.0 : std::exp(ln_sigma);
        }
        if (sigma >= 2.0) return M_PI;
        return 2.0 * std::asin(std::sqrt(std::max(sigma, 1e-300) / 2.0));
    };

    SemigroupMatrix mat;
    mat.grid = grid;
    mat.t = t;
    mat.w.assign(n * n, 0.0);

    // The pair distance is symmetric in the two radii, so fill the lower
    // triangle and mirror.
    auto fill_row = [&](long i) {
        double* row = mat.w.data() + std::size_t(i) * n;
        for (long j = 0; j <= i; ++j) {
            const double th_p = theta_at_drop(std::size_t(i), std::size_t(j), 2.0);
            const double th_w = theta_at_drop(std::size_t(i), std::size_t(j), 40.0);
            double acc = 0.0;
            auto panel = [&](double lo, double hi, const std::vector<double>& px,
                             const std::vector<double>& pw) {
                if (!(hi > lo)) return;
                const double c = 0.5 * (hi - lo);
                for (std::size_t g = 0; g < px.size(); ++g) {
                    const double th = lo + c * (px[g] + 1.0);
                    acc += c * pw[g] * std::pow(std::sin(th), n_dim - 2) *
                           radial_kernel(m.pair_distance(x[i], x[j], std::cos(th)));
                }
            };
            panel(0.0, th_p, cx, cw);
            double lo = th_p;
            for (int o = 0; o < kMaxOctaves && lo < th_w && lo < M_PI; ++o) {
                const double hi = std::min(2.0 * lo, M_PI);
                panel(lo, hi, ox, ow);
                lo = hi;
            }
            if (lo < M_PI) panel(lo, M_PI, cx, cw);
            row[j] = dir * acc;
        }
    };
    if (pol == ExecPolicy::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (long i = 0; i < (long)n; ++i) fill_row(i);
    } else {
        for (long i = 0; i < (long)n; ++i) fill_row(i);
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) mat.w[i * n + j] = mat.w[j * n + i];

    // Two shrink-only passes keep every row and column sub-stochastic without
    // ever increasing a weight.
    for (std::size_t i = 0; i < n; ++i) {
        double rm = 0.0;
        for (std::size_t j = 0; j < n; ++j) rm += mat.w[i * n + j] * vol[j];
        if (rm > 1.0)
            for (std::size_t j = 0; j < n; ++j) mat.w[i * n + j] /= rm;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double cm = 0.0;
        for (std::size_t i = 0; i < n; ++i) cm += mat.w[i * n + j] * vol[i];
        if (cm > 1.0)
            for (std::size_t i = 0; i < n; ++i) mat.w[i * n + j] /= cm;
    }
    return mat;
}

SemigroupMatrix build_semigroup_matrix(GridPtr grid, const KernelProfile& prof, ExecPolicy pol) {
    SemigroupMatrix mat =
        build_semigroup_matrix(std::move(grid), prof.t, [&](double d) { return prof.at(d); }, pol);
    return mat;
}

RadialField semigroup_apply(const SemigroupMatrix& mat, const RadialField& u0, ExecPolicy pol) {
    if (mat.grid != u0.grid &&
        (mat.grid->cells() != u0.grid->cells() ||
         std::fabs(mat.grid->radius() - u0.grid->radius()) > 1e-12))
        throw std::invalid_argument("semigroup_apply: field lives on a different grid");
    RadialField out;
    out.grid = mat.grid;
    mat.apply(u0.v, out.v, pol);
    return out;
}

double mild_residual(const Trajectory& traj, const Reaction& f, double t_check, int quad_levels,
                     ExecPolicy pol) {
    const auto& u_check = traj.field_at(t_check);
    const GridPtr grid = traj.grid;
    constexpr double kTauMin = 0.05;

    // Snapshot times up to t_check, thinned to the requested quadrature size.
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        if (traj.times[i] <= t_check * (1.0 + 1e-12)) idx.push_back(i);
    if (idx.size() < 3) throw std::invalid_argument("mild_residual: too few snapshots");
    std::vector<std::size_t> keep;
    const std::size_t want = std::max<std::size_t>(3, std::size_t(quad_levels) + 1);
    if (idx.size() <= want) {
        keep = idx;
    } else {
        for (std::size_t q = 0; q < want; ++q)
            keep.push_back(idx[(q * (idx.size() - 1)) / (want - 1)]);
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    }

    std::vector<double> needed;
    for (std::size_t q : keep) {
        const double tau = t_check - traj.times[q];
        if (tau >= kTauMin) needed.push_back(tau);
    }
    needed.push_back(t_check);
    NumericalKernel kern(grid->manifold(), grid->radius(), grid->cells(), needed);

    const std::size_t n = grid->unknowns();
    auto propagate = [&](double tau, const std::vector<double>& v) {
        if (tau < kTauMin) return v;  // the flow is within quadrature error of identity
        const SemigroupMatrix mat = build_semigroup_matrix(grid, kern.profile(tau), pol);
        std::vector<double> out;
        mat.apply(v, out, pol);
        return out;
    };

    // Memory integrand at the kept snapshots.
    std::vector<std::vector<double>> g(keep.size());
    std::vector<double> s_nodes(keep.size());
    for (std::size_t q = 0; q < keep.size(); ++q) {
        const double s = traj.times[keep[q]];
        s_nodes[q] = s;
        std::vector<double> fs(n);
        const auto& us = traj.fields[keep[q]];
        for (std::size_t i = 0; i < n; ++i) fs[i] = f(us[i], s);
        g[q] = propagate(t_check - s, fs);
    }

    std::vector<double> predicted = propagate(t_check, traj.fields.front());
    for (std::size_t q = 0; q + 1 < keep.size(); ++q) {
        const double h = s_nodes[q + 1] - s_nodes[q];
        for (std::size_t i = 0; i < n; ++i)
            predicted[i] += 0.5 * h * (g[q][i] + g[q + 1][i]);
    }

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num = std::max(num, std::fabs(u_check[i] - predicted[i]));
        den = std::max(den, std::fabs(u_check[i]));
    }
    if (den == 0.0) throw std::invalid_argument("mild_residual: zero state at t_check");
    return num / den;
}

}  // namespace hypheat
