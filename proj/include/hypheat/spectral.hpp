#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hypheat/geometry.hpp"

namespace hypheat {

// Requested spectral parameter admits no positive radial profile on the
// sampled range (the profile crosses zero).
struct eigenvalue_too_large : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A candidate profile fails -Lap(phi) >= lambda * phi somewhere.
struct not_a_supersolution : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Radial profile phi with -Lap(phi) = lambda * phi, phi(0) = 1, phi'(0) = 0,
// sampled on the radii it was solved on.
struct GroundState {
    double lambda = 0.0;
    std::vector<double> r;
    std::vector<double> phi;
    std::vector<double> dphi;

    double operator()(double radius) const;  // Hermite interpolation between samples
    double sup() const;                      // max over the samples
};

// Integrates the radial eigenequation phi'' + drift * phi' + lambda * phi = 0
// outward over the given radii (ascending, starting at 0).  Throws
// eigenvalue_too_large if the profile loses positivity.
GroundState solve_ground_state(const ManifoldModel& m, double lambda,
                               const std::vector<double>& radii);

// Constants pinning the profile between multiples of (1+r) e^{-(n-1)r/2}.
struct EnvelopeFit {
    double c_low = 0.0, c_up = 0.0;
    double ratio() const { return c_up / c_low; }
};

EnvelopeFit fit_envelope(const ManifoldModel& m, const GroundState& gs, double r_lo = 0.5,
                         double r_hi = 20.0);

// Pointwise -Lap(phi) - lambda * phi on uniformly spaced samples via
// fourth-order finite differences.  Values below -tol raise
// not_a_supersolution; otherwise the residual field is returned.
std::vector<double> supersolution_residual(const ManifoldModel& m,
                                           const std::vector<double>& radii,
                                           const std::vector<double>& phi, double lambda,
                                           double tol = 1e-8);

// Residual check for a freshly solved profile at spacing h on [h, r_hi].
double ground_state_residual_sup(const ManifoldModel& m, double lambda, double r_hi,
                                 double h = 0.005);

// Principal Dirichlet eigenvalue of the centred ball of radius R, by
// shooting + bisection on the first zero of the radial profile.
double lambda1_ball_estimate(const ManifoldModel& m, double R, double tol = 1e-10);

// Spectral floor used by the comparison thresholds: the closed form where one
// exists, otherwise a Dirichlet ball estimate on almost the whole table range.
double lambda_star_numeric(const ManifoldModel& m);

}  // namespace hypheat
