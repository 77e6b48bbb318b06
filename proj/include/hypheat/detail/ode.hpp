#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace hypheat::detail {

// Adaptive Dormand-Prince 5(4) integrator for the small ODE systems that show
// up here (warp factors, radial eigenfunctions, scalar comparison equations).
// The embedded pair gives the error estimate; FSAL saves one evaluation per
// accepted step.  Dense values between accepted steps come from cubic Hermite
// interpolation of (y, y') at the step endpoints, which is consistent with the
// tolerances we run at (1e-10 and tighter with node-to-node stepping).

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double dt_init = 1e-4;
    double dt_max = 0.0;        // 0 = unlimited
    long max_steps = 2'000'000;
};

template <std::size_t N>
using OdeState = std::array<double, N>;

template <std::size_t N, typename Rhs>
class Rk45Stepper {
public:
    Rk45Stepper(Rhs rhs, OdeOptions opts) : rhs_(std::move(rhs)), opts_(opts) {}

    // One controlled step from (t, y), dy = rhs(t, y) already evaluated.
    // On acceptance updates t, y, dy in place and returns true.  On rejection
    // shrinks the internal dt and returns false; the caller simply retries.
    bool try_advance(double& t, OdeState<N>& y, OdeState<N>& dy) {
        if (dt_ <= 0.0) dt_ = opts_.dt_init;
        if (opts_.dt_max > 0.0 && dt_ > opts_.dt_max) dt_ = opts_.dt_max;
        const double dt_natural = dt_;
        if (clip_ > 0.0 && t + dt_ > clip_) dt_ = clip_ - t;
        const bool clipped = dt_ < dt_natural;

        const double h = dt_;
        OdeState<N> k2, k3, k4, k5, k6, k7, ytmp, y5;
        auto stage = [&](double frac, const auto&... terms) {
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                ((acc += terms.first * terms.second[i]), ...);
                ytmp[i] = y[i] + h * acc;
            }
            (void)frac;
        };
        using P = std::pair<double, const OdeState<N>&>;

        stage(0.2, P{1.0 / 5, dy});
        rhs_(t + h / 5, ytmp, k2);
        stage(0.3, P{3.0 / 40, dy}, P{9.0 / 40, k2});
        rhs_(t + 3 * h / 10, ytmp, k3);
        stage(0.8, P{44.0 / 45, dy}, P{-56.0 / 15, k2}, P{32.0 / 9, k3});
        rhs_(t + 4 * h / 5, ytmp, k4);
        stage(8.0 / 9, P{19372.0 / 6561, dy}, P{-25360.0 / 2187, k2},
              P{64448.0 / 6561, k3}, P{-212.0 / 729, k4});
        rhs_(t + 8 * h / 9, ytmp, k5);
        stage(1.0, P{9017.0 / 3168, dy}, P{-355.0 / 33, k2},
              P{46732.0 / 5247, k3}, P{49.0 / 176, k4}, P{-5103.0 / 18656, k5});
        rhs_(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + h * (35.0 / 384 * dy[i] + 500.0 / 1113 * k3[i] +
                                125.0 / 192 * k4[i] - 2187.0 / 6784 * k5[i] +
                                11.0 / 84 * k6[i]);
        rhs_(t + h, y5, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e4 = y[i] + h * (5179.0 / 57600 * dy[i] + 7571.0 / 16695 * k3[i] +
                                          393.0 / 640 * k4[i] - 92097.0 / 339200 * k5[i] +
                                          187.0 / 2100 * k6[i] + 1.0 / 40 * k7[i]);
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
            const double e = (y5[i] - e4) / sc;
            err = std::max(err, std::abs(e));
        }
        if (!std::isfinite(err)) err = 1e10;

        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        if (err <= 1.0) {
            t += h;
            y = y5;
            dy = k7;   // FSAL
            // A step truncated to hit a requested output point must not shrink
            // the controller's notion of the workable step size.
            dt_ = clipped ? dt_natural : h * std::clamp(grow, 0.2, 5.0);
            return true;
        }
        dt_ = h * std::clamp(grow, 0.1, 0.9);
        if (dt_ < 1e-15 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("ode step size underflow at t=" + std::to_string(t));
        return false;
    }

    void clip_at(double t_end) { clip_ = t_end; }
    double dt() const { return dt_; }

private:
    Rhs rhs_;
    OdeOptions opts_;
    double dt_ = 0.0;
    double clip_ = 0.0;
};

// Integrate y' = rhs(t, y) from t0 to t1.  The observer is called after every
// accepted step as obs(t_prev, y_prev, dy_prev, t, y, dy); pass nullptr-like
// no-op when only the endpoint matters.
template <std::size_t N, typename Rhs, typename Obs>
OdeState<N> integrate(Rhs rhs, OdeState<N> y, double t0, double t1,
                      const OdeOptions& opts, Obs obs) {
    if (t1 == t0) return y;
    if (t1 < t0) throw std::invalid_argument("ode: t1 < t0");
    Rk45Stepper<N, Rhs> st(rhs, opts);
    st.clip_at(t1);
    OdeState<N> dy;
    rhs(t0, y, dy);
    double t = t0;
    long steps = 0;
    while (t < t1) {
        const double tp = t;
        const OdeState<N> yp = y, dyp = dy;
        if (st.try_advance(t, y, dy)) obs(tp, yp, dyp, t, y, dy);
        if (++steps > opts.max_steps)
            throw std::runtime_error("ode: step budget exhausted");
    }
    return y;
}

template <std::size_t N, typename Rhs>
OdeState<N> integrate(Rhs rhs, OdeState<N> y, double t0, double t1,
                      const OdeOptions& opts = {}) {
    return integrate<N>(rhs, y, t0, t1, opts,
                        [](double, const OdeState<N>&, const OdeState<N>&,
                           double, const OdeState<N>&, const OdeState<N>&) {});
}

// Cubic Hermite evaluation on one accepted step, for dense output.
template <std::size_t N>
OdeState<N> hermite_eval(double t0, const OdeState<N>& y0, const OdeState<N>& d0,
                         double t1, const OdeState<N>& y1, const OdeState<N>& d1,
                         double t) {
    const double h = t1 - t0;
    const double s = (t - t0) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    OdeState<N> out;
    for (std::size_t i = 0; i < N; ++i)
        out[i] = h00 * y0[i] + h * h10 * d0[i] + h01 * y1[i] + h * h11 * d1[i];
    return out;
}

}  // namespace hypheat::detail
