#include "hypheat/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hypheat/detail/linalg.hpp"

namespace hypheat {

namespace {

constexpr double kGradeStrength = 0.6;

double node_map(double R, double xi) {
    return R * ((1.0 - kGradeStrength) * xi + kGradeStrength * xi * xi * xi);
}

// int_a^b psi^{n-1} dr by two-point Gauss; exact for the Euclidean weights up
// to n = 4 and otherwise second order on the half-cells, which matches the
// stencil's own accuracy.
double volume_slab(const ManifoldModel& m, double a, double b) {
    static const double g = 0.5 / std::sqrt(3.0);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const double x1 = mid - 2.0 * half * g, x2 = mid + 2.0 * half * g;
    const int k = m.dim() - 1;
    return half * (std::pow(m.warp(x1), k) + std::pow(m.warp(x2), k));
}

}  // namespace

RadialGrid::RadialGrid(const ManifoldModel& m, double R, int n_cells) : m_(m), R_(R), n_(n_cells) {
    if (n_cells < 8) throw std::invalid_argument("RadialGrid: need at least 8 cells");
    if (!(R > 0.0) || R > m.r_max())
        throw std::invalid_argument("RadialGrid: radius outside the model's valid range");
    nodes_.resize(n_ + 1);
    for (int i = 0; i <= n_; ++i) nodes_[i] = node_map(R_, double(i) / double(n_));
    nodes_[0] = 0.0;
    nodes_[n_] = R_;

    min_spacing_ = R_;
    for (int i = 0; i < n_; ++i) {
        const double h = nodes_[i + 1] - nodes_[i];
        max_spacing_ = std::max(max_spacing_, h);
        min_spacing_ = std::min(min_spacing_, h);
    }

    vol_.resize(n_);
    double left = 0.0;
    for (int i = 0; i < n_; ++i) {
        const double right = 0.5 * (nodes_[i] + nodes_[i + 1]);
        vol_[i] = volume_slab(m_, left, nodes_[i]) + volume_slab(m_, nodes_[i], right);
        left = right;
    }
}

double RadialGrid::mass(const std::vector<double>& u) const {
    if (u.size() != vol_.size()) throw std::invalid_argument("mass: field/grid size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < vol_.size(); ++i) s += vol_[i] * u[i];
    return s * sphere_measure(m_.dim());
}

double RadialField::operator()(double r) const {
    const auto& x = grid->nodes();
    if (r <= 0.0) return v[0];
    if (r >= grid->radius()) return 0.0;
    auto it = std::upper_bound(x.begin(), x.end(), r);
    const std::size_t j = std::size_t(it - x.begin());  // x[j-1] <= r < x[j]
    const double w = (r - x[j - 1]) / (x[j] - x[j - 1]);
    const double right = j < v.size() ? v[j] : 0.0;
    return (1.0 - w) * v[j - 1] + w * right;
}

double RadialField::sup() const {
    double s = 0.0;
    for (double a : v) s = std::max(s, std::fabs(a));
    return s;
}

RadialField make_field(GridPtr grid, const std::vector<double>& node_values) {
    if (node_values.size() != grid->unknowns() && node_values.size() != grid->unknowns() + 1)
        throw std::invalid_argument("make_field: value count does not match grid");
    RadialField f{std::move(grid), node_values};
    f.v.resize(f.grid->unknowns());
    return f;
}

void DiscreteLaplacian::apply(const std::vector<double>& u, std::vector<double>& out) const {
    const std::size_t n = diag.size();
    if (u.size() != n) throw std::invalid_argument("DiscreteLaplacian::apply: size mismatch");
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * u[i];
        if (i > 0) s += lower[i] * u[i - 1];
        if (i + 1 < n) s += upper[i] * u[i + 1];
        out[i] = s;
    }
}

void DiscreteLaplacian::solve_shifted(double c, std::vector<double>& rhs) const {
    const std::size_t n = diag.size();
    static thread_local std::vector<double> lo, di, up;
    lo.resize(n);
    di.resize(n);
    up.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        lo[i] = -c * lower[i];
        di[i] = 1.0 - c * diag[i];
        up[i] = -c * upper[i];
    }
    detail::solve_tridiagonal(lo, di, up, rhs);
}

DiscreteLaplacian discretize(GridPtr grid) {
    const auto& m = grid->manifold();
    const auto& x = grid->nodes();
    const auto& vol = grid->cell_volumes();
    const std::size_t n = grid->unknowns();
    const int k = m.dim() - 1;

    DiscreteLaplacian lap;
    lap.grid = grid;
    lap.lower.assign(n, 0.0);
    lap.diag.assign(n, 0.0);
    lap.upper.assign(n, 0.0);

    // Flux through the face between nodes i and i+1:
    // psi(mid)^{n-1} (u_{i+1} - u_i) / h.  Dividing by the control volume
    // gives a conservative operator whose off-diagonals are >= 0.
    double w_left = 0.0;  // face at the pole carries no flux
    for (std::size_t i = 0; i < n; ++i) {
        const double h_r = x[i + 1] - x[i];
        const double mid_r = 0.5 * (x[i] + x[i + 1]);
        const double w_right = std::pow(m.warp(mid_r), k) / h_r;
        lap.lower[i] = w_left / vol[i];
        const double out_r = w_right / vol[i];
        lap.diag[i] = -(lap.lower[i] + out_r);
        // The outermost unknown couples to the Dirichlet boundary node, whose
        // value is 0: keep the outflow on the diagonal, drop the band entry.
        lap.upper[i] = (i + 1 < n) ? out_r : 0.0;
        w_left = w_right;
    }
    return lap;
}

std::pair<GridPtr, DiscreteLaplacian> discretize(const ManifoldModel& m, double R, int n_cells) {
    auto grid = std::make_shared<RadialGrid>(m, R, n_cells);
    if (grid->max_spacing() > 0.2)
        throw std::invalid_argument(
            "discretize: node spacing above 0.2; increase the cell count");
    return {grid, discretize(grid)};
}

void diffusion_step(const DiscreteLaplacian& lap, double dt, std::vector<double>& u) {
    // TR-BDF2 with the standard 2 - sqrt(2) split point: a trapezoidal stage
    // to t + g*dt followed by BDF2 closure.  L-stable, second order, two
    // tridiagonal solves.
    static const double g = 2.0 - std::sqrt(2.0);
    const std::size_t n = u.size();
    static thread_local std::vector<double> lu, mid;
    lap.apply(u, lu);
    mid.resize(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = u[i] + 0.5 * g * dt * lu[i];
    lap.solve_shifted(0.5 * g * dt, mid);
    const double c2 = (1.0 - g) / (2.0 - g);
    const double c1 = 1.0 / (g * (2.0 - g));
    const double cb = c2 * dt;
    for (std::size_t i = 0; i < n; ++i) u[i] = c1 * mid[i] - (c1 - 1.0) * u[i];
    lap.solve_shifted(cb, u);
}

}  // namespace hypheat
