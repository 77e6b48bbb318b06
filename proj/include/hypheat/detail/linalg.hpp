#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hypheat::detail {

// Thomas algorithm for tridiagonal systems.  All the implicit diffusion
// stages produce strictly diagonally dominant matrices, so no pivoting.
// Bands: lower[i] multiplies x[i-1], diag[i] x[i], upper[i] x[i+1].
inline void solve_tridiagonal(const std::vector<double>& lower,
                              const std::vector<double>& diag,
                              const std::vector<double>& upper,
                              std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    if (n == 0) return;
    static thread_local std::vector<double> c, d;
    c.assign(n, 0.0);
    d.assign(n, 0.0);
    double beta = diag[0];
    if (beta == 0.0) throw std::runtime_error("tridiagonal: zero pivot");
    c[0] = upper[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = diag[i] - lower[i] * c[i - 1];
        if (beta == 0.0) throw std::runtime_error("tridiagonal: zero pivot");
        c[i] = upper[i] / beta;
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / beta;
    }
    rhs[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        rhs[i] = d[i] - c[i] * rhs[i + 1];
}

// Least-squares fit of y ~ sum_j coeff_j * basis_j(x) for a handful of basis
// functions, via normal equations in long double.  The fits here are tiny
// (2-3 regressors, tens of points), so this is plenty.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                         const std::vector<double>& y) {
    const std::size_t m = cols.size();
    const std::size_t n = y.size();
    for (const auto& c : cols)
        if (c.size() != n) throw std::invalid_argument("least_squares: ragged columns");
    std::vector<long double> a(m * m, 0.0L), b(m, 0.0L);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t k = 0; k < n; ++k)
                a[i * m + j] += (long double)cols[i][k] * cols[j][k];
        for (std::size_t k = 0; k < n; ++k) b[i] += (long double)cols[i][k] * y[k];
    }
    // Gaussian elimination with partial pivoting.
    std::vector<std::size_t> piv(m);
    for (std::size_t i = 0; i < m; ++i) piv[i] = i;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(a[piv[r] * m + col]) > std::fabs(a[piv[best] * m + col])) best = r;
        std::swap(piv[col], piv[best]);
        const long double p = a[piv[col] * m + col];
        if (p == 0.0L) throw std::runtime_error("least_squares: singular normal matrix");
        for (std::size_t r = col + 1; r < m; ++r) {
            const long double f = a[piv[r] * m + col] / p;
            for (std::size_t c2 = col; c2 < m; ++c2) a[piv[r] * m + c2] -= f * a[piv[col] * m + c2];
            b[piv[r]] -= f * b[piv[col]];
        }
    }
    std::vector<double> x(m, 0.0);
    for (std::size_t i = m; i-- > 0;) {
        long double acc = b[piv[i]];
        for (std::size_t j = i + 1; j < m; ++j) acc -= a[piv[i] * m + j] * x[j];
        x[i] = (double)(acc / a[piv[i] * m + i]);
    }
    return x;
}

}  // namespace hypheat::detail
