#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hypheat/grid.hpp"

namespace hypheat {

// Pointwise reaction term f(s, t), assumed non-negative for s >= 0.
using Reaction = std::function<double(double, double)>;

struct SolverControls {
    double rtol = 1e-5;
    double atol_rel = 1e-9;   // absolute tolerance = atol_rel * sup(u0); 0 = pure relative
    double dt_init = 1e-5;
    double dt_max = 0.5;
    long max_steps = 5'000'000;
    int snapshots = 60;       // fields stored at evenly spaced times
    bool disable_diffusion = false;

    // Relative undershoot allowed out of the implicit stages before the run
    // is declared invalid; anything smaller is clipped to zero.
    double positivity_tol = 1e-10;

    // Blow-up bookkeeping.
    double sup_threshold = 1e6;   // magnitude signal
    double dt_collapse = 1e-10;   // step-size signal
    double stop_sup = 1e10;       // hard ceiling: halt and classify
    double safe_factor = 10.0;    // global verdict needs sup_final < factor * sup(u0)
    double growth_step_fraction = 0.5;  // dt <= fraction * sup(u) / max f(u)
};

enum class StopReason {
    horizon,        // integrated to the requested time
    sup_ceiling,    // solution magnitude hit stop_sup
    step_collapse,  // step size collapsed without the solution escaping
    step_budget,    // max_steps exhausted
};

struct StepRecord {
    double t, sup, dt;
};

struct Trajectory {
    GridPtr grid;
    std::vector<double> times;
    std::vector<std::vector<double>> fields;  // one per entry of times
    std::vector<StepRecord> steps;            // every accepted step
    double sup_initial = 0.0;
    double sup_final = 0.0;
    double t_final = 0.0;
    double horizon = 0.0;
    StopReason stop = StopReason::horizon;

    const std::vector<double>& field_at(double t) const;  // exact snapshot time
};

enum class VerdictKind { global_existence, blow_up, undetermined };

struct Verdict {
    VerdictKind kind = VerdictKind::undetermined;
    double t_end = 0.0;  // horizon for global runs, estimated singular time otherwise
    std::string reason;
};

// Operator-split evolution: half reaction (explicit midpoint), full diffusion
// (TR-BDF2), half reaction, with step-doubling error control on the composite
// step.  Non-negative data stays non-negative up to positivity_tol.
Trajectory evolve(const DiscreteLaplacian& lap, std::vector<double> u0, const Reaction& f,
                  double horizon, const SolverControls& c = {});

// Classifies a finished trajectory.  Blow-up requires all three signals:
// magnitude above sup_threshold, step collapse below dt_collapse, and
// accelerating growth of ln sup over the final decade.
Verdict detect_blowup(const Trajectory& traj, const SolverControls& c = {});

// Singular-time estimate from the reciprocal of the sup record over its last
// decade of growth; never earlier than the final computed time.
double estimate_blowup_time(const Trajectory& traj);

struct ExhaustionLevel {
    double radius = 0.0;
    int cells = 0;
    Verdict verdict;
    double sup_final = 0.0;
};

struct ExhaustionReport {
    std::vector<ExhaustionLevel> levels;
    // Largest pointwise increase between consecutive levels, per pair.
    std::vector<double> increments;
    bool monotone = true;               // levels never decrease beyond tolerance
    bool increments_decreasing = true;  // successive increments shrink
};

// Runs the same problem on an increasing sequence of ball radii and checks
// that the solutions increase toward the manifold solution.
ExhaustionReport exhaustion_run(const ManifoldModel& m, const std::vector<double>& radii,
                                double cells_per_unit_radius,
                                const std::function<double(double)>& u0, const Reaction& f,
                                double horizon, const SolverControls& c = {});

}  // namespace hypheat
