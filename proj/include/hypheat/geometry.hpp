#pragma once

#include <memory>
#include <optional>
#include <vector>

namespace hypheat {

// Rotationally symmetric model geometries: metric dr^2 + psi(r)^2 dw^2 on
// [0, r_max) x S^{n-1}.  The warp psi determines everything we need: the
// radial drift (n-1) psi'/psi of the Laplacian, the volume weight psi^{n-1},
// and the spectral floor used by the threshold predicates.
enum class WarpKind {
    euclidean,          // psi = r
    hyperbolic,         // psi = sinh r        (curvature -1)
    scaled_hyperbolic,  // psi = sinh(kr)/k    (curvature -k^2)
    power_decay,        // psi'' = C(1+r^g) psi, psi(0)=0, psi'(0)=1
};

class ManifoldModel {
public:
    static ManifoldModel euclidean(int n, double r_max = 40.0);
    static ManifoldModel hyperbolic(int n, double r_max = 40.0);
    static ManifoldModel scaled_hyperbolic(int n, double kappa, double r_max = 40.0);
    static ManifoldModel power_decay(int n, double c_hat, double gamma, double r_max = 40.0);

    int dim() const { return n_; }
    WarpKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    double gamma() const { return gamma_; }
    double c_hat() const { return c_hat_; }
    double r_max() const { return r_max_; }

    double warp(double r) const;         // psi(r)
    double warp_deriv(double r) const;   // psi'(r)
    double volume_weight(double r) const;  // psi(r)^{n-1}

    // (n-1) psi'(r)/psi(r); diverges like (n-1)/r at the pole, so r must be > 0.
    double radial_drift(double r) const;

    // Radial curvature profile -K_rr(r); constant for the closed-form kinds.
    double curvature_G(double r) const;

    // Geodesic distance between points at radii r and rho subtending angle
    // theta at the pole.  Only the constant-curvature kinds admit a closed
    // form; power_decay throws.
    double pair_distance(double r, double rho, double cos_theta) const;

private:
    ManifoldModel(int n, WarpKind kind, double kappa, double c_hat, double gamma,
                  double r_max);
    void build_warp_table();

    int n_;
    WarpKind kind_;
    double kappa_ = 1.0;
    double c_hat_ = 0.0;
    double gamma_ = 0.0;
    double r_max_;

    // Dense (psi, psi') table for power_decay, uniform spacing.
    struct WarpTable {
        double dr = 0.0;
        std::vector<double> psi, dpsi;
    };
    std::shared_ptr<const WarpTable> table_;
};

// Principal frequency of hyperbolic space: (n-1)^2/4.
double lambda1_hyperbolic(int n);

// Spectral floor lambda_* of the model.  Closed forms: 0 for euclidean,
// (n-1)^2/4 for hyperbolic, (n-1)^2 k^2/4 for scaled_hyperbolic and for
// power_decay with gamma = 0 (kappa^2 = 2 c_hat there).  For power_decay with
// gamma > 0 the floor equals the principal eigenvalue itself, which has no
// closed form; callers must supply a numerical estimate (the spectral module
// provides one) or this throws.
double lambda_star(const ManifoldModel& m,
                   std::optional<double> lambda1_estimate = std::nullopt);

// Poincare ball radius |x| < 1 to geodesic distance: ln((1+|x|)/(1-|x|)).
double ball_to_geodesic(double ball_norm);

// Conformal volume factor (2/(1-|x|^2))^n of the ball model.
double ball_volume_factor(double ball_norm, int n);

// Surface measure of the unit sphere S^{n-1}.
double sphere_measure(int n);

}  // namespace hypheat
