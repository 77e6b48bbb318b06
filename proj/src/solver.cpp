#include "hypheat/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hypheat/detail/linalg.hpp"
#include "hypheat/nonlinearity.hpp"

namespace hypheat {

namespace {

double sup_norm(const std::vector<double>& u) {
    double s = 0.0;
    for (double a : u) s = std::max(s, std::fabs(a));
    return s;
}

bool all_finite(const std::vector<double>& u) {
    for (double a : u)
        if (!std::isfinite(a)) return false;
    return true;
}

// Steps below this cannot move the clock reliably in double precision.
double time_floor(double t) { return 1e-14 * std::max(1.0, t); }

// Uncontrolled terminal steps allowed once the error controller gives up.
constexpr long kDiveBudget = 2000;

// Explicit midpoint, nodewise, on u' = f(u, t).  Keeps u >= 0 when f >= 0.
bool reaction_half(std::vector<double>& u, const Reaction& f, double t0, double h) {
    for (double& s : u) {
        const double k1 = f(s, t0);
        const double mid = s + 0.5 * h * k1;
        if (!std::isfinite(mid)) return false;
        s += h * f(mid, t0 + 0.5 * h);
        if (!std::isfinite(s)) return false;
    }
    return true;
}

struct CompositeStepper {
    const DiscreteLaplacian& lap;
    const Reaction& f;
    bool with_diffusion;
    double pos_tol;

    // The implicit diffusion stages are not monotone for large dt: a sharp
    // profile can undershoot slightly below zero, where the reaction is not
    // defined.  Harmless undershoot is clamped; anything larger rejects the
    // step so the error controller retries with a smaller dt.
    bool restore_positivity(std::vector<double>& u) const {
        double mn = 0.0, mx = 0.0;
        for (double v : u) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        if (mn >= 0.0) return true;
        if (mn < -pos_tol * std::max(mx, 1e-300)) return false;
        for (double& v : u) v = std::max(v, 0.0);
        return true;
    }

    bool step(std::vector<double>& u, double t, double dt) const {
        if (!reaction_half(u, f, t, 0.5 * dt)) return false;
        if (with_diffusion) {
            diffusion_step(lap, dt, u);
            if (!restore_positivity(u)) return false;
        }
        if (!reaction_half(u, f, t + 0.5 * dt, 0.5 * dt)) return false;
        return all_finite(u);
    }

    // Terminal-dive step: the reaction is evaluated once per node, before any
    // growth, so a growth-capped dt yields a growth-capped update even when f
    // is steeply convex (a midpoint stage would re-evaluate f after a partial
    // climb and amplify the update without bound).
    bool dive(std::vector<double>& u, double t, double dt) const {
        for (double& s : u) s += dt * f(s, t);
        if (with_diffusion) diffusion_step(lap, dt, u);
        return all_finite(u);
    }
};

// Records with sup above max_sup/10, starting at the last upward crossing.
std::pair<std::size_t, std::size_t> last_decade(const std::vector<StepRecord>& rec) {
    double top = 0.0;
    for (const auto& r : rec) top = std::max(top, r.sup);
    if (top <= 0.0) return {rec.size(), rec.size()};
    std::size_t lo = 0;
    for (std::size_t i = rec.size(); i-- > 0;) {
        if (rec[i].sup < top / 10.0) {
            lo = i + 1;
            break;
        }
    }
    return {lo, rec.size()};
}

bool superlinear_growth(const std::vector<StepRecord>& rec) {
    const auto [lo, hi] = last_decade(rec);
    if (hi - lo < 6) return false;
    double top = 0.0;
    for (std::size_t i = lo; i < hi; ++i) top = std::max(top, rec[i].sup);
    const double mid_sup = top / std::sqrt(10.0);
    std::size_t mid = lo;
    while (mid < hi && rec[mid].sup < mid_sup) ++mid;
    if (mid - lo < 2 || hi - mid < 2) return false;
    if (rec[mid].sup <= rec[lo].sup || rec[hi - 1].sup <= rec[mid].sup) return false;
    // Exponential rate over each half-decade; superlinear means the upper half
    // grows more than 1.5x faster.  Compare cross-multiplied so that an upper
    // half traversed faster than the clock can resolve (elapsed time zero)
    // counts as (infinitely) superlinear instead of producing inf/inf.
    const double g1 = std::log(rec[mid].sup / rec[lo].sup);
    const double g2 = std::log(rec[hi - 1].sup / rec[mid].sup);
    const double dt1 = rec[mid].t - rec[lo].t;
    const double dt2 = rec[hi - 1].t - rec[mid].t;
    if (dt2 <= 0.0) return true;
    return g2 * dt1 > 1.5 * g1 * dt2;
}

}  // namespace

const std::vector<double>& Trajectory::field_at(double t) const {
    for (std::size_t i = 0; i < times.size(); ++i)
        if (std::fabs(times[i] - t) <= 1e-9 * std::max(1.0, std::fabs(t))) return fields[i];
    throw std::invalid_argument("Trajectory::field_at: no snapshot at t = " + std::to_string(t));
}

Trajectory evolve(const DiscreteLaplacian& lap, std::vector<double> u0, const Reaction& f,
                  double horizon, const SolverControls& c) {
    const GridPtr grid = lap.grid;
    if (u0.size() != grid->unknowns())
        throw std::invalid_argument("evolve: initial data does not match the grid");
    if (!(horizon > 0.0)) throw std::invalid_argument("evolve: horizon must be positive");
    if (!(c.rtol > 0.0)) throw std::invalid_argument("evolve: rtol must be positive");
    for (double v : u0)
        if (!(v >= 0.0)) throw std::invalid_argument("evolve: initial data must be >= 0");

    Trajectory traj;
    traj.grid = grid;
    traj.horizon = horizon;
    traj.sup_initial = sup_norm(u0);

    const int S = std::max(2, c.snapshots);
    std::vector<double> snap_times(S);
    for (int k = 0; k < S; ++k) snap_times[k] = horizon * double(k) / double(S - 1);

    std::vector<double> u = std::move(u0), big, small;
    double t = 0.0, dt = c.dt_init;
    traj.times.push_back(0.0);
    traj.fields.push_back(u);
    traj.steps.push_back({0.0, traj.sup_initial, 0.0});
    std::size_t next_snap = 1;

    const double atol = c.atol_rel * traj.sup_initial;
    const CompositeStepper stepper{lap, f, !c.disable_diffusion, c.positivity_tol};
    StopReason stop = StopReason::step_budget;

    auto capture_if_due = [&]() {
        while (next_snap < snap_times.size() &&
               std::fabs(t - snap_times[next_snap]) <= 1e-9 * std::max(1.0, snap_times[next_snap])) {
            traj.times.push_back(snap_times[next_snap]);
            traj.fields.push_back(u);
            ++next_snap;
        }
    };

    long dive_steps = 0;
    for (long iter = 0; iter < c.max_steps; ++iter) {
        if (t >= horizon * (1.0 - 1e-12)) {
            stop = StopReason::horizon;
            break;
        }
        const double sup_now = sup_norm(u);

        double fmax = 0.0;
        for (double s : u) fmax = std::max(fmax, f(s, t));
        const double scale = std::max({sup_now, traj.sup_initial, 1e-12});
        const double cap = fmax > 0.0 ? c.growth_step_fraction * scale / fmax
                                      : std::numeric_limits<double>::infinity();

        double t_target = horizon;
        if (next_snap < snap_times.size()) t_target = snap_times[next_snap];
        if (t_target - t <= time_floor(t)) {
            t = t_target;  // gap beneath the clock resolution: arrive, no step
            capture_if_due();
            continue;
        }

        double h = std::min({dt, cap, c.dt_max});
        bool landing = false;
        if (t + h >= t_target) {
            h = t_target - t;
            landing = true;
        }

        if (h < time_floor(t)) {
            // The controller (or the growth cap) wants steps beneath the clock
            // resolution.  With a growing reaction this is the terminal regime:
            // accuracy is gone but the explosion itself is still observable.
            // Take uncontrolled growth-capped steps so the sup-norm climbs to
            // the ceiling instead of stalling a hair short of the asymptote.
            if (!(fmax > 0.0) || ++dive_steps > kDiveBudget) {
                stop = StopReason::step_collapse;
                break;
            }
            // Half the usual growth cap: ~10 records per sup decade, enough
            // for the acceleration test to see the climb's shape.
            const double hd = std::min(time_floor(t), 0.5 * cap);
            big = u;
            if (!stepper.dive(big, t, hd)) {
                stop = StopReason::step_collapse;
                break;
            }
            u.swap(big);
            for (double& v : u) v = std::max(v, 0.0);
            t += hd;  // may no longer move the clock; the climb is what counts
            const double sup_acc = sup_norm(u);
            traj.steps.push_back({t, sup_acc, hd});
            capture_if_due();
            if (sup_acc >= c.stop_sup) {
                stop = StopReason::sup_ceiling;
                break;
            }
            continue;
        }

        big = u;
        small = u;
        const bool ok = stepper.step(big, t, h) && stepper.step(small, t, 0.5 * h) &&
                        stepper.step(small, t + 0.5 * h, 0.5 * h);

        double err = 1e12;
        if (ok) {
            err = 0.0;
            double sup_ref = std::max(sup_now, sup_norm(small));
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double sc = atol +
                                  c.rtol * (std::max(std::fabs(u[i]), std::fabs(small[i])) +
                                            1e-6 * sup_ref);
                err = std::max(err, std::fabs(big[i] - small[i]) / sc);
            }
            if (!std::isfinite(err)) err = 1e12;
        }

        if (err <= 1.0) {
            u.swap(small);
            t = landing ? t_target : t + h;

            double mn = 0.0, sup_acc = 0.0;
            for (double v : u) {
                mn = std::min(mn, v);
                sup_acc = std::max(sup_acc, v);
            }
            if (mn < 0.0) {
                if (mn < -c.positivity_tol * std::max(sup_acc, 1e-300))
                    throw std::runtime_error("evolve: positivity violation at t = " +
                                             std::to_string(t));
                for (double& v : u) v = std::max(v, 0.0);
            }

            traj.steps.push_back({t, sup_acc, h});
            capture_if_due();
            if (sup_acc >= c.stop_sup) {
                stop = StopReason::sup_ceiling;
                break;
            }
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -1.0 / 3.0) : 5.0;
            dt = h * std::clamp(grow, 0.2, 5.0);
        } else {
            dt = h * std::clamp(0.9 * std::pow(err, -1.0 / 3.0), 0.1, 0.9);
        }
    }

    traj.t_final = t;
    traj.sup_final = sup_norm(u);
    traj.stop = stop;
    if (std::fabs(traj.times.back() - t) > 1e-9 * std::max(1.0, t)) {
        traj.times.push_back(t);
        traj.fields.push_back(u);
    }
    return traj;
}

double estimate_blowup_time(const Trajectory& traj) {
    const auto [lo, hi] = last_decade(traj.steps);
    if (hi - lo < 3) return traj.t_final;
    std::vector<double> ones, ts, inv;
    for (std::size_t i = lo; i < hi; ++i) {
        if (traj.steps[i].sup <= 0.0) continue;
        ones.push_back(1.0);
        ts.push_back(traj.steps[i].t);
        inv.push_back(1.0 / traj.steps[i].sup);
    }
    if (ts.size() < 3) return traj.t_final;
    // Terminal climbs can leave the clock frozen across the whole decade;
    // there is nothing to extrapolate then — the stall time is the estimate.
    if (ts.back() - ts.front() <= 1e-13 * std::max(1.0, traj.t_final)) return traj.t_final;
    // Centering keeps the normal matrix well conditioned when the fitted
    // window is a tiny sliver of time far from the origin.
    const double t_mid = 0.5 * (ts.front() + ts.back());
    for (double& t : ts) t -= t_mid;
    const auto coef = detail::least_squares({ones, ts}, inv);
    if (!(coef[1] < 0.0)) return traj.t_final;
    const double T = t_mid - coef[0] / coef[1];
    const double span = ts.back() - ts.front();
    return std::clamp(T, traj.t_final, traj.t_final + 10.0 * std::max(span, 1e-300));
}

Verdict detect_blowup(const Trajectory& traj, const SolverControls& c) {
    Verdict v;
    if (traj.steps.size() < 2) {
        v.reason = "no steps taken";
        return v;
    }
    if (traj.stop == StopReason::horizon) {
        if (traj.sup_final <= c.safe_factor * traj.sup_initial + 1e-300) {
            v.kind = VerdictKind::global_existence;
            v.t_end = traj.horizon;
            v.reason = "bounded through the horizon";
        } else {
            v.t_end = traj.horizon;
            v.reason = "grew past the safe factor by the horizon without a blow-up signature";
        }
        return v;
    }

    const bool magnitude = traj.sup_final >= c.sup_threshold;
    const bool collapse =
        traj.stop == StopReason::step_collapse || traj.steps.back().dt <= c.dt_collapse;
    const bool accelerating = superlinear_growth(traj.steps);
    if (magnitude && collapse && accelerating) {
        v.kind = VerdictKind::blow_up;
        v.t_end = estimate_blowup_time(traj);
        v.reason = "magnitude, step collapse and accelerating growth all present";
        return v;
    }
    v.t_end = traj.t_final;
    if (magnitude && !collapse) {
        v.reason = "resolution: sup threshold hit while steps stayed healthy";
    } else {
        v.reason = std::string("missing blow-up signals:") +
                   (magnitude ? "" : " magnitude") + (collapse ? "" : " step-collapse") +
                   (accelerating ? "" : " acceleration");
    }
    return v;
}

ExhaustionReport exhaustion_run(const ManifoldModel& m, const std::vector<double>& radii,
                                double cells_per_unit_radius,
                                const std::function<double(double)>& u0, const Reaction& f,
                                double horizon, const SolverControls& c) {
    if (radii.size() < 2) throw std::invalid_argument("exhaustion_run: need at least two radii");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (radii[i] <= radii[i - 1])
            throw std::invalid_argument("exhaustion_run: radii must be ascending");

    ExhaustionReport rep;
    std::vector<Trajectory> runs;
    for (double R : radii) {
        const int cells = std::max(8, (int)std::llround(cells_per_unit_radius * R));
        auto [grid, lap] = discretize(m, R, cells);
        std::vector<double> init(grid->unknowns());
        for (std::size_t i = 0; i < init.size(); ++i) init[i] = u0(grid->nodes()[i]);
        Trajectory traj = evolve(lap, std::move(init), f, horizon, c);
        ExhaustionLevel lev;
        lev.radius = R;
        lev.cells = cells;
        lev.sup_final = traj.sup_final;
        lev.verdict = detect_blowup(traj, c);
        rep.levels.push_back(std::move(lev));
        runs.push_back(std::move(traj));
    }

    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        const Trajectory& a = runs[k];
        const Trajectory& b = runs[k + 1];
        double inc = 0.0;
        const std::size_t shared = std::min(a.times.size(), b.times.size());
        for (std::size_t s = 0; s < shared; ++s) {
            if (std::fabs(a.times[s] - b.times[s]) > 1e-9 * std::max(1.0, a.times[s])) break;
            RadialField fb{b.grid, b.fields[s]};
            double sup_ab = 0.0;
            for (double v : a.fields[s]) sup_ab = std::max(sup_ab, v);
            for (double v : b.fields[s]) sup_ab = std::max(sup_ab, v);
            const double tol = 1e-3 * sup_ab + 1e-300;
            for (std::size_t i = 0; i < a.fields[s].size(); ++i) {
                const double va = a.fields[s][i];
                const double vb = fb(a.grid->nodes()[i]);
                if (vb < va - tol) rep.monotone = false;
                inc = std::max(inc, vb - va);
            }
        }
        rep.increments.push_back(inc);
    }
    for (std::size_t j = 0; j + 1 < rep.increments.size(); ++j)
        if (rep.increments[j + 1] > 1.05 * rep.increments[j] + 1e-15)
            rep.increments_decreasing = false;
    return rep;
}

}  // namespace hypheat
