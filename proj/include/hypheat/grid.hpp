#pragma once

#include <memory>
#include <vector>

#include "hypheat/geometry.hpp"

namespace hypheat {

// Radial mesh on [0, R].  Nodes come from a fixed smooth map of the unit
// interval, r(xi) = R((1-a) xi + a xi^3) with a = 0.6, which clusters nodes
// about 5x more densely at the pole and makes a doubled mesh contain every
// coarse node exactly -- the property the Richardson steps rely on.
class RadialGrid {
public:
    RadialGrid(const ManifoldModel& m, double R, int n_cells);

    const ManifoldModel& manifold() const { return m_; }
    double radius() const { return R_; }
    int cells() const { return n_; }

    // All nodes r_0 = 0 < ... < r_n = R.  The last node carries the Dirichlet
    // boundary and is excluded from the unknowns.
    const std::vector<double>& nodes() const { return nodes_; }
    std::size_t unknowns() const { return nodes_.size() - 1; }

    // Control volumes int psi^{n-1} dr around each unknown (no sphere factor).
    const std::vector<double>& cell_volumes() const { return vol_; }

    // Integral of u dv over the ball, sphere measure included.
    double mass(const std::vector<double>& u) const;

    double max_spacing() const { return max_spacing_; }
    double min_spacing() const { return min_spacing_; }

    RadialGrid refined() const { return RadialGrid(m_, R_, 2 * n_); }

private:
    ManifoldModel m_;
    double R_;
    int n_;
    std::vector<double> nodes_;
    std::vector<double> vol_;
    double max_spacing_ = 0.0, min_spacing_ = 0.0;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

// Field values on the unknown nodes of a grid (boundary value is 0).
struct RadialField {
    GridPtr grid;
    std::vector<double> v;

    double operator()(double r) const;  // linear interpolation, 0 beyond R
    double sup() const;
};

RadialField make_field(GridPtr grid, const std::vector<double>& node_values);

// Tridiagonal flux-form discretization of the radial Laplacian
// u'' + (n-1) (psi'/psi) u' with a symmetry row at the pole and an absorbing
// boundary at R.  Off-diagonal entries are non-negative by construction, so
// the implicit stages are M-matrix solves and the flow preserves ordering.
struct DiscreteLaplacian {
    GridPtr grid;
    std::vector<double> lower, diag, upper;

    void apply(const std::vector<double>& u, std::vector<double>& out) const;
    // In-place solve of (I - c L) x = rhs.
    void solve_shifted(double c, std::vector<double>& rhs) const;
};

DiscreteLaplacian discretize(GridPtr grid);

// Convenience: build grid + operator, rejecting under-resolved meshes
// (spacing above 0.2).
std::pair<GridPtr, DiscreteLaplacian> discretize(const ManifoldModel& m, double R,
                                                 int n_cells);

// One L-stable second-order implicit diffusion step (TR-BDF2).
void diffusion_step(const DiscreteLaplacian& lap, double dt, std::vector<double>& u);

}  // namespace hypheat
