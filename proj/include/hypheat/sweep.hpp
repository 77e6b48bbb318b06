#pragma once

// Experiment orchestration: one configured run, or a cartesian sweep of
// parameter overrides with the numerical verdict cross-checked against the
// analytic regime at every point.

#include <string>
#include <utility>
#include <vector>

#include "hypheat/comparison.hpp"
#include "hypheat/config.hpp"
#include "hypheat/heat_kernel.hpp"
#include "hypheat/solver.hpp"

namespace hypheat {

struct SweepRecord {
    long point_id = 0;
    std::vector<std::pair<std::string, double>> params;  // axis name -> value
    VerdictKind verdict = VerdictKind::undetermined;
    std::string reason;
    Regime analytic = Regime::borderline_unknown;
    std::string certificate;
    bool agreement = true;  // kinds match, or the analytic side is uncertified
    bool in_band = false;   // within the declared band around the threshold
    double t_est = 0.0;     // singular-time estimate for blow-up verdicts
    double sup_final = 0.0;
    double runtime_s = 0.0;
};

struct RunOutput {
    SweepRecord record;
    Trajectory traj;
};

// Initial profile on the grid's interior nodes: theta times the normalized
// ground-state shape, or a displaced gaussian bump.
std::vector<double> initial_field(const RunConfig& cfg, const ManifoldModel& m,
                                  const RadialGrid& grid);

// Analytic regime of the configured reaction on the configured manifold.
// Fills the certificate text when requested.
Regime analytic_regime(const RunConfig& cfg, const ManifoldModel& m,
                       std::string* certificate = nullptr);

// Whether the configured parameters sit within the relative band around the
// analytic threshold, where numerical classification is not held to account.
bool near_threshold(const RunConfig& cfg, const ManifoldModel& m, double band);

RunOutput run_single(const RunConfig& cfg);

// Executes every point of cfg.sweep (required) and returns the records in
// point order. A throwing worker marks its point undetermined and the sweep
// continues. Records are identical under both execution policies.
std::vector<SweepRecord> run_sweep(const RunConfig& cfg,
                                   ExecPolicy pol = ExecPolicy::parallel);

// Names of the sweep axes, in declaration order.
std::vector<std::string> sweep_axis_names(const RunConfig& cfg);

// Total number of points in the cartesian product.
long sweep_point_count(const RunConfig& cfg);

// The parameter overrides of one point, decoded from its id (first axis
// slowest).
std::vector<std::pair<std::string, double>> sweep_point_params(const RunConfig& cfg, long id);

}  // namespace hypheat
