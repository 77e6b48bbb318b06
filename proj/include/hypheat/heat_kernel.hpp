#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "hypheat/grid.hpp"
#include "hypheat/solver.hpp"

namespace hypheat {

// Closed-form two-sided comparison profile for the radial heat kernel on
// constant-curvature space of dimension n: the true kernel lies between fixed
// positive multiples of this expression.
double log_kernel_proxy(int n, double r, double t);
double kernel_proxy(int n, double r, double t);

// Exact radial heat kernel in dimension 3 (hyperbolic), used as an oracle.
double log_kernel_h3(double r, double t);
double kernel_h3(double r, double t);

// Radial kernel slice K(o, r) at one time, on the unknown nodes of a grid.
struct KernelProfile {
    double t = 0.0;
    GridPtr grid;
    std::vector<double> k;

    double at(double r) const;  // log-linear interpolation, 0 beyond the ball
    double mass() const;        // integral over the ball, sphere factor included
};

struct KernelBuildOptions {
    double bump_width = 0.0;  // initial spike width; 0 = four pole spacings
    double rtol = 1e-7;       // time accuracy of the linear evolution
};

// Kernel profiles obtained by evolving a narrow normalized spike under the
// linear flow on nested meshes and Richardson-combining the two resolutions.
class NumericalKernel {
public:
    NumericalKernel(const ManifoldModel& m, double R, int n_cells, std::vector<double> times,
                    KernelBuildOptions opt = {});

    GridPtr grid() const { return grid_; }
    const std::vector<KernelProfile>& profiles() const { return profiles_; }
    const KernelProfile& profile(double t) const;
    double value(double r, double t) const { return profile(t).at(r); }

private:
    GridPtr grid_;
    std::vector<KernelProfile> profiles_;
};

// Envelope constants for the pointwise ratio (numerical kernel) / (proxy).
struct BoundCalibration {
    double a_bound = 0.0;          // smallest observed ratio
    double b_bound = 0.0;          // largest observed ratio
    std::vector<double> ratios;    // row-major over (t_samples, r_samples)
    double spread() const { return b_bound / a_bound; }
};

BoundCalibration calibrate_bounds(const NumericalKernel& kern,
                                  const std::vector<double>& r_samples,
                                  const std::vector<double>& t_samples,
                                  double failure_spread = 1e3);

// Asymptotic decay rate of on-diagonal samples (t_j, K(o,o,t_j)): fits
// ln K ~ c + b ln t - rate * t over the latest half of the samples, which
// absorbs the universal polynomial-in-t prefactor.
double log_rate(const std::vector<std::pair<double, double>>& diag_samples);

enum class ExecPolicy { serial, parallel };

// Dense matrix of direction-integrated kernel weights between grid nodes:
// w(i,j) = int K(d(r_i, r_j, theta)) s(theta) dtheta.  Application includes
// the radial volume factors, so apply == integral against the kernel.
struct SemigroupMatrix {
    GridPtr grid;
    double t = 0.0;
    std::vector<double> w;  // row-major, unknowns x unknowns

    void apply(const std::vector<double>& u, std::vector<double>& out,
               ExecPolicy pol = ExecPolicy::parallel) const;
};

SemigroupMatrix build_semigroup_matrix(GridPtr grid, double t,
                                       const std::function<double(double)>& radial_kernel,
                                       ExecPolicy pol = ExecPolicy::parallel);
SemigroupMatrix build_semigroup_matrix(GridPtr grid, const KernelProfile& prof,
                                       ExecPolicy pol = ExecPolicy::parallel);

RadialField semigroup_apply(const SemigroupMatrix& mat, const RadialField& u0,
                            ExecPolicy pol = ExecPolicy::parallel);

// Relative sup-norm defect of the integral (mild) formulation at time t_check,
// using the trajectory's snapshots for the memory integral.
double mild_residual(const Trajectory& traj, const Reaction& f, double t_check,
                     int quad_levels = 12, ExecPolicy pol = ExecPolicy::parallel);

}  // namespace hypheat
