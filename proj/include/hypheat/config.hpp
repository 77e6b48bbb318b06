#pragma once

// Strict JSON run configuration: every key is checked, unknown keys are
// rejected with a pointer and line number, and a parsed config serializes
// back without losing any value.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hypheat/geometry.hpp"
#include "hypheat/nonlinearity.hpp"
#include "hypheat/solver.hpp"

namespace hypheat {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ManifoldSpec {
    std::string kind = "hyperbolic";  // euclidean | hyperbolic | scaled_hyperbolic | power_decay
    int dim = 2;
    double kappa = 1.0;   // scaled_hyperbolic only
    double c_hat = 1.0;   // power_decay only
    double gamma = 0.0;   // power_decay only
    double r_max = 40.0;

    ManifoldModel build() const;
};

enum class ReactionFamily { none, type1, type2 };

struct ReactionSpec {
    ReactionFamily family = ReactionFamily::none;
    // logarithm-weight family t^q g(s)
    double alpha = 1.0;
    double q = 1.0;
    double kappa_quad = 1.0;
    // exponential-weight family e^{mu t} s (e^{beta s^p} - 1)
    double mu = 0.0;
    double beta = 1.0;
    double p = 1.0;

    Reaction build() const;      // zero function for family none
    TypeOneSpec type1() const;   // throws unless family == type1
    TypeTwoSpec type2() const;   // throws unless family == type2
};

struct InitialSpec {
    std::string shape = "ground_state_scaled";  // or "bump"
    double theta = 0.01;  // sup of the initial data; 0 means identically zero
    double center = 2.0;  // bump only
    double width = 0.5;   // bump only
};

struct GridSpec {
    double radius = 20.0;
    int cells = 800;
};

struct KernelAuditSpec {
    // Sample radii/times for the two-sided envelope check.
    std::vector<double> radii = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> times = {0.1, 0.5, 1.0, 2.0, 5.0};
    // On-diagonal samples for the long-time decay-rate fit.
    std::vector<double> rate_times = {10, 15, 20, 25, 30, 35, 40};
    double spread_max = 50.0;
    double rate_tol = 0.05;
};

struct AxisSpec {
    std::string name;  // mu | beta | p | alpha | q | theta
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<AxisSpec> axes;
    double band = 0.2;  // relative distance from the analytic threshold exempt
                        // from the agreement requirement
    int threads = 0;    // 0 = library default
};

struct RunConfig {
    ManifoldSpec manifold;
    ReactionSpec reaction;
    InitialSpec initial;
    GridSpec grid;
    double horizon = 10.0;
    SolverControls controls;
    unsigned long seed = 0;
    std::optional<SweepSpec> sweep;
    std::optional<KernelAuditSpec> kernel_audit;
    std::optional<double> eigen_lambda;
};

RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_config(const std::string& path);

// Emits only the keys meaningful for the chosen kind/family/shape, so the
// output reparses to an equal config.
std::string serialize_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace hypheat
