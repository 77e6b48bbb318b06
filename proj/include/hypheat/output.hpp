#pragma once

// Artifact writers: deterministic CSV tables and dependency-free SVG plots.

#include <string>
#include <utility>
#include <vector>

#include "hypheat/solver.hpp"
#include "hypheat/sweep.hpp"

namespace hypheat {

std::string verdict_name(VerdictKind k);  // Global | BlowUp | Undetermined

// Shortest round-trip decimal form of x (printf %.17g trimmed).
std::string csv_number(double x);

// Columns: point_id, <param names...>, verdict, t_est, sup_final, runtime_s,
// agreement. Every record must carry the same parameter names.
void write_summary_csv(const std::string& path, const std::vector<SweepRecord>& records);

// Long-form table t, r, u covering every stored snapshot, boundary included.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

// Sup-norm history on a logarithmic axis.
void write_sup_svg(const std::string& path, const Trajectory& traj);

// Verdict heatmap over two sweep axes with the analytic threshold polyline
// drawn on top (data coordinates).
void write_phase_svg(const std::string& path, const std::vector<SweepRecord>& records,
                     const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& threshold = {});

}  // namespace hypheat
