#include "hypheat/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hypheat/detail/ode.hpp"
#include "hypheat/heat_kernel.hpp"

namespace hypheat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Principal branch of w e^w = y for y >= 0, by Newton from ln(1+y).
double lambert_w0(double y) {
    if (y < 0.0) throw std::domain_error("lambert_w0: negative argument");
    if (y == 0.0) return 0.0;
    double w = std::log1p(y);
    for (int i = 0; i < 60; ++i) {
        const double ew = std::exp(w);
        const double step = (w * ew - y) / (ew * (1.0 + w));
        w -= step;
        if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(w))) break;
    }
    return w;
}

}  // namespace

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::global_small_data: return "Global";
        case Regime::blow_up_all_data: return "BlowUp";
        case Regime::borderline_unknown: return "BorderlineUnknown";
    }
    return "BorderlineUnknown";
}

Regime ThresholdTypeII::classify(double mu) const {
    const bool global = global_inclusive ? mu <= global_below : mu < global_below;
    if (global) return Regime::global_small_data;
    if (mu > blowup_above) return Regime::blow_up_all_data;
    return Regime::borderline_unknown;
}

std::string ThresholdTypeII::certificate(double mu) const {
    switch (classify(mu)) {
        case Regime::global_small_data:
            return global_inclusive ? "mu <= p*lambda1" : "mu < p*lambda_star";
        case Regime::blow_up_all_data:
            return global_inclusive ? "mu > p*lambda1" : "mu > p*lambda1 upper estimate";
        case Regime::borderline_unknown:
            return "mu inside the uncertified spectral gap";
    }
    return "";
}

ThresholdTypeII threshold_type2(const ManifoldModel& m, double p,
                                std::optional<double> lambda1_upper) {
    if (!(p > 0.0)) throw std::invalid_argument("threshold_type2: p must be positive");
    ThresholdTypeII th;
    const bool unbounded_curvature = m.kind() == WarpKind::power_decay && m.gamma() > 0.0;
    if (m.kind() == WarpKind::euclidean || unbounded_curvature) {
        // Outside the certified family: no spectral floor (flat case) or the
        // bounded-curvature hypothesis fails. Neither side fires.
        th.global_below = -kInf;
        th.blowup_above = kInf;
        th.global_inclusive = false;
        return th;
    }
    if (m.kind() == WarpKind::hyperbolic) {
        const double l1 = lambda1_hyperbolic(m.dim());
        th.global_below = p * l1;
        th.blowup_above = p * l1;
        th.global_inclusive = true;  // equality still decays on the sharp space
        return th;
    }
    th.global_below = p * lambda_star(m);
    th.blowup_above = lambda1_upper ? p * *lambda1_upper : kInf;
    th.global_inclusive = false;
    return th;
}

double AmplitudePath::at(double time) const {
    if (t.empty()) throw std::logic_error("AmplitudePath: empty");
    if (time <= t.front()) return a.front();
    if (time >= t.back()) return a.back();
    auto it = std::upper_bound(t.begin(), t.end(), time);
    const std::size_t j = std::size_t(it - t.begin());
    const double w = (time - t[j - 1]) / (t[j] - t[j - 1]);
    return (1.0 - w) * a[j - 1] + w * a[j];
}

AmplitudePath amplitude_ode(const TypeTwoSpec& spec, double C, double horizon, double escape) {
    if (C < 0.0) throw std::invalid_argument("amplitude_ode: C must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("amplitude_ode: horizon must be positive");
    if (!(escape > 1.0)) throw std::invalid_argument("amplitude_ode: escape level too low");

    AmplitudePath path;
    path.t.push_back(0.0);
    path.a.push_back(1.0);
    path.a_sup = 1.0;
    if (C == 0.0) {  // zero reaction: the majorant never moves
        path.t.push_back(horizon);
        path.a.push_back(1.0);
        return path;
    }

    const double mu = spec.mu, beta = spec.beta, p = spec.p;
    auto rhs = [&](double t, const detail::OdeState<1>& y, detail::OdeState<1>& d) {
        const double a = std::max(y[0], 0.0);
        double growth = 0.0;
        if (a > 0.0) {
            const double x = beta * std::pow(C * a, p);
            const double log_budget = mu * t + std::log(a) + (x > 40.0 ? x : 0.0);
            if (log_budget > 690.0)
                growth = 1e300;
            else
                growth = std::min(std::exp(mu * t) * a * std::expm1(x), 1e300);
        }
        d[0] = growth;
    };

    detail::OdeOptions opts;
    opts.rtol = 1e-10;
    opts.atol = 1e-14;
    opts.dt_init = 1e-6;
    detail::Rk45Stepper<1, decltype(rhs)> st(rhs, opts);
    st.clip_at(horizon);

    detail::OdeState<1> y{1.0}, dy;
    rhs(0.0, y, dy);
    double t = 0.0;
    long guard = 0;
    while (t < horizon) {
        if (y[0] >= escape || beta * std::pow(C * y[0], p) >= 650.0) {
            path.escaped = true;
            path.t_escape = t;
            return path;
        }
        bool ok;
        try {
            ok = st.try_advance(t, y, dy);
        } catch (const std::runtime_error&) {
            // Step size underflow: the amplitude escapes faster than any
            // representable step.
            path.escaped = true;
            path.t_escape = t;
            return path;
        }
        if (ok) {
            path.t.push_back(t);
            path.a.push_back(y[0]);
            path.a_sup = std::max(path.a_sup, y[0]);
        }
        if (++guard > 5'000'000) throw std::runtime_error("amplitude_ode: step budget exhausted");
    }
    return path;
}

double certified_amplitude_type2(double lambda, double mu, double beta, double p, double C) {
    if (!(lambda > 0.0) || !(beta > 0.0) || !(p > 0.0) || !(C > 0.0))
        throw std::invalid_argument("certified_amplitude_type2: parameters must be positive");
    if (mu < 0.0) throw std::invalid_argument("certified_amplitude_type2: mu must be >= 0");
    const double margin = p * lambda - mu;
    if (margin <= 0.0) return 0.0;
    const double X = lambert_w0(margin);
    return std::pow(X / beta, 1.0 / p) / (C * M_E);
}

double critical_alpha_weight(double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("critical_alpha_weight: alpha > 0 required");
    return std::pow(alpha, 1.0 / (1.0 + alpha)) * (1.0 + 1.0 / alpha);
}

namespace {

// sup over t >= 0 of gamma t^sigma - rate*t, for sigma in [0, 1) and rate > 0.
double envelope_sup(double gamma, double sigma, double rate) {
    if (sigma == 0.0) return gamma;
    const double t_peak = std::pow(sigma * gamma / rate, 1.0 / (1.0 - sigma));
    return gamma * (1.0 - sigma) * std::pow(t_peak, sigma);
}

}  // namespace

TypeICertificate certify_type1(double lambda, double alpha, double q, double eps_splice,
                               double sup_phi, std::optional<double> delta_opt) {
    if (!(lambda > 0.0)) throw std::invalid_argument("certify_type1: lambda must be positive");
    if (!(alpha > 0.0) || q < 0.0) throw std::invalid_argument("certify_type1: bad exponents");
    if (!(eps_splice > 0.0) || eps_splice >= 1.0)
        throw std::invalid_argument("certify_type1: splice level must lie in (0, 1)");
    if (!(sup_phi > 0.0)) throw std::invalid_argument("certify_type1: sup_phi must be positive");

    TypeICertificate cert;
    cert.sigma = q / alpha;

    if (cert.sigma > 1.0) return cert;  // the envelope is unbounded at every delta

    if (cert.sigma == 1.0) {
        const double d = delta_opt ? *delta_opt : std::pow(alpha, -alpha / (1.0 + alpha));
        if (!(d > 0.0) || d >= lambda) return cert;
        const double g = std::pow(d, -1.0 / alpha);
        if (d + g > lambda) return cert;  // linear envelope grows without bound
        cert.valid = true;
        cert.delta = d;
        cert.gamma = g;
        cert.exponent_sup = 0.0;
        cert.theta_max = eps_splice / sup_phi;
        return cert;
    }

    const double d = delta_opt ? *delta_opt : lambda / (1.0 + q);
    if (!(d > 0.0) || d >= lambda) return cert;
    const double gamma = std::pow(d, -1.0 / alpha);
    const double V = envelope_sup(gamma, cert.sigma, lambda - d);
    cert.valid = true;
    cert.delta = d;
    cert.gamma = gamma;
    cert.exponent_sup = V;
    cert.theta_max = eps_splice * std::exp(-V) / sup_phi;
    return cert;
}

BarrierLifetime check_type1_barrier(double lambda, double alpha, double q, double eps_splice,
                                    double sup_phi, double theta, double delta) {
    if (!(delta > 0.0) || delta >= lambda)
        throw std::invalid_argument("check_type1_barrier: delta must lie in (0, lambda)");
    if (!(theta > 0.0) || theta * sup_phi >= eps_splice)
        throw std::invalid_argument("check_type1_barrier: theta*sup_phi must start below eps");
    if (!(alpha > 0.0) || q < 0.0)
        throw std::invalid_argument("check_type1_barrier: bad exponents");

    const double sigma = q / alpha;
    const double gamma = std::pow(delta, -1.0 / alpha);
    const double rate = lambda - delta;
    const double B = std::log(theta * sup_phi / eps_splice);  // negative at t = 0
    auto excess = [&](double t) { return B + gamma * std::pow(t, sigma) - rate * t; };

    BarrierLifetime life;
    if (sigma < 1.0) {
        const double V = envelope_sup(gamma, sigma, rate);
        life.exponent_sup = V;
        if (B + V < 0.0) {
            life.global = true;
            life.horizon = kInf;
            return life;
        }
        if (sigma == 0.0) {  // constant-excess peak sits at t = 0
            life.horizon = 0.0;
            return life;
        }
        double lo = 0.0;
        double hi = std::pow(sigma * gamma / rate, 1.0 / (1.0 - sigma));
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            (excess(mid) < 0.0 ? lo : hi) = mid;
        }
        life.horizon = hi;
        return life;
    }
    if (sigma == 1.0) {
        const double slope = gamma - rate;
        if (slope <= 0.0) {
            life.global = true;
            life.horizon = kInf;
            life.exponent_sup = 0.0;
            return life;
        }
        life.exponent_sup = kInf;
        life.horizon = -B / slope;
        return life;
    }
    // sigma > 1: the envelope always escapes; bracket the first crossing.
    life.exponent_sup = kInf;
    double hi = 1.0;
    int doublings = 0;
    while (excess(hi) < 0.0) {
        hi *= 2.0;
        if (++doublings > 400) throw std::runtime_error("check_type1_barrier: no crossing found");
    }
    double lo = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) < 0.0 ? lo : hi) = mid;
    }
    life.horizon = hi;
    return life;
}

Type1Verdict threshold_type1(const ManifoldModel& m, double alpha, double q,
                             std::optional<double> lambda1_upper,
                             std::optional<double> lambda_star_known) {
    if (!(alpha > 0.0) || !(q >= 0.0))
        throw std::invalid_argument("threshold_type1: bad exponents");
    if (m.kind() == WarpKind::euclidean)
        return {Regime::borderline_unknown, "no positive spectral floor"};
    const double ls = lambda_star_known ? *lambda_star_known : lambda_star_numeric(m);

    if (q < alpha) {
        if (ls > 0.0) return {Regime::global_small_data, "q < alpha with lambda_star > 0"};
        return {Regime::borderline_unknown, "q < alpha but no spectral floor"};
    }
    if (q > alpha) return {Regime::blow_up_all_data, "q > alpha"};

    // Balanced exponents: global when the spectral floor carries the barrier,
    // blow-up when the top of the spectrum is provably below 1.
    if (critical_alpha_weight(alpha) <= ls)
        return {Regime::global_small_data, "min(delta + delta^{-1/alpha}) <= lambda_star"};
    double l1 = kInf;
    if (m.kind() == WarpKind::hyperbolic)
        l1 = lambda1_hyperbolic(m.dim());
    else if (lambda1_upper)
        l1 = *lambda1_upper;
    if (std::pow(l1, alpha + 1.0) < 1.0)
        return {Regime::blow_up_all_data, "lambda1^{alpha+1} < 1"};
    return {Regime::borderline_unknown, "balanced exponents inside the open gap"};
}

double Type1Barrier::value(double r, double t) const {
    return theta * std::exp(-(lambda - delta) * t) * phi(r);
}

double Type1Barrier::defect(const TypeOneSpec& spec, double r, double t) const {
    const double v = value(r, t);
    return delta * v - eval_f(spec, v, t);
}

double Type1Barrier::first_failure(const TypeOneSpec& spec, const std::vector<double>& t_samples,
                                   const std::vector<double>& r_samples) const {
    for (double t : t_samples)
        for (double r : r_samples)
            if (defect(spec, r, t) < 0.0) return t;
    return kInf;
}

PhiAudit phi_functional_audit(const Trajectory& traj, const TypeTwoSpec& spec,
                              const PhiAuditOptions& opt) {
    if (opt.t_ref.empty()) throw std::invalid_argument("phi_functional_audit: no horizons");
    const GridPtr grid = traj.grid;
    const double T_big = *std::max_element(opt.t_ref.begin(), opt.t_ref.end());
    if (T_big > traj.horizon * (1.0 + 1e-12))
        throw std::invalid_argument("phi_functional_audit: horizon shorter than references");

    // Snapshots feeding the growth segments, kept a safe margin before T.
    constexpr double kTauMargin = 0.3;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
        if (traj.times[i] <= T_big - kTauMargin) idx.push_back(i);
    if (idx.size() < 4) throw std::invalid_argument("phi_functional_audit: too few snapshots");
    std::vector<std::size_t> keep;
    const std::size_t want = 16;
    if (idx.size() <= want) {
        keep = idx;
    } else {
        for (std::size_t s = 0; s < want; ++s)
            keep.push_back(idx[(s * (idx.size() - 1)) / (want - 1)]);
        keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    }

    std::vector<double> kernel_times = opt.t_ref;
    for (std::size_t s : keep) kernel_times.push_back(T_big - traj.times[s]);
    NumericalKernel kern(grid->manifold(), grid->radius(), grid->cells(), kernel_times);

    auto weighted_average = [&](const std::vector<double>& u, double tau) {
        const KernelProfile& prof = kern.profile(tau);
        std::vector<double> prod(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) prod[i] = prof.k[i] * u[i];
        return grid->mass(prod);
    };

    PhiAudit audit;

    // On-diagonal compensation across the reference horizons.
    double cmin = kInf, cmax = 0.0, clog = 0.0;
    for (double T : opt.t_ref) {
        const double phi0 = weighted_average(traj.fields.front(), T);
        const double c = phi0 * std::pow(T, 1.5) * std::exp(opt.lambda * T);
        audit.c_samples.push_back(c);
        cmin = std::min(cmin, c);
        cmax = std::max(cmax, c);
        clog += std::log(c);
    }
    audit.c_fit = std::exp(clog / double(opt.t_ref.size()));
    audit.c_spread = cmax / cmin - 1.0;

    // Direct convexity: averaging the reaction beats reacting to the average.
    audit.convexity_worst = 0.0;
    std::vector<double> phi_vals(keep.size()), s_nodes(keep.size());
    std::vector<double> gu(grid->unknowns());
    for (std::size_t s = 0; s < keep.size(); ++s) {
        const double tau = T_big - traj.times[keep[s]];
        s_nodes[s] = traj.times[keep[s]];
        phi_vals[s] = weighted_average(traj.fields[keep[s]], tau);
        for (std::size_t i = 0; i < gu.size(); ++i)
            gu[i] = eval_f(spec, traj.fields[keep[s]][i], 0.0);
        const double lhs = weighted_average(gu, tau);
        const double rhs = eval_f(spec, phi_vals[s], 0.0);
        const double scale = std::max({lhs, rhs, 1e-300});
        audit.convexity_worst = std::min(audit.convexity_worst, (lhs - rhs) / scale);
    }

    // Discrete growth: the weighted average must grow at least as fast as the
    // reaction of its own value.
    audit.jensen_worst = 0.0;
    for (std::size_t s = 0; s + 1 < keep.size(); ++s) {
        const double dt = s_nodes[s + 1] - s_nodes[s];
        if (dt <= 0.0) continue;
        const double dphi = (phi_vals[s + 1] - phi_vals[s]) / dt;
        const double mid_phi = 0.5 * (phi_vals[s] + phi_vals[s + 1]);
        const double mid_t = 0.5 * (s_nodes[s] + s_nodes[s + 1]);
        const double f_mid = eval_f(spec, mid_phi, mid_t);
        const double scale = std::max(mid_phi / T_big, 1e-300);
        audit.jensen_worst = std::min(audit.jensen_worst, (dphi - f_mid) / scale);
    }

    // Partial-sum chain at the largest horizon: every term of the iterated
    // bound must stay below one while the solution exists.
    const double phi00 = weighted_average(traj.fields.front(), T_big);
    const double time_factor = spec.mu == 0.0 ? T_big : std::expm1(spec.mu * T_big) / spec.mu;
    audit.chain_lhs = 0.0;
    if (phi00 > 0.0) {
        const double lp = std::log(spec.p) + std::log(time_factor);
        const double lb = std::log(spec.beta);
        const double lphi = std::log(phi00);
        for (int k = 1; k <= opt.max_chain_terms; ++k) {
            const double lt = lp + k * lb - std::lgamma(double(k)) + spec.p * k * lphi;
            audit.chain_lhs = std::max(audit.chain_lhs, std::exp(lt));
        }
    }
    audit.chain_ok = audit.chain_lhs <= 1.0 + opt.chain_tol;
    return audit;
}

}  // namespace hypheat
