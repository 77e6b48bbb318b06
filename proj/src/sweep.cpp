#include "hypheat/sweep.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace hypheat {

namespace {

// Decay rate for the ground-state initial shape. For the unbounded-curvature
// family the profile is taken just under the ball eigenvalue of the
// computational domain, so it stays positive on all of it.
double shape_lambda(const ManifoldModel& m, double R) {
    if (m.kind() == WarpKind::power_decay && m.gamma() > 0.0)
        return 0.999 * lambda1_ball_estimate(m, R);
    return lambda_star(m);
}

// Upper estimate of the spectral bottom for the model kinds whose exact value
// the predicates treat as unknown.
std::optional<double> model_lambda1_upper(const ManifoldModel& m) {
    if (m.kind() == WarpKind::scaled_hyperbolic ||
        (m.kind() == WarpKind::power_decay && m.gamma() == 0.0))
        return lambda1_ball_estimate(m, 0.98 * m.r_max());
    return std::nullopt;
}

std::optional<double> cached_lambda_star(const ManifoldModel& m) {
    if (m.kind() == WarpKind::euclidean) return std::nullopt;
    return lambda_star_numeric(m);
}

Regime regime_for(const ReactionSpec& r, const ManifoldModel& m,
                  const std::optional<double>& lambda1_upper,
                  const std::optional<double>& lambda_star_known, std::string* certificate) {
    switch (r.family) {
        case ReactionFamily::none: {
            if (certificate) *certificate = "no reaction";
            return Regime::borderline_unknown;
        }
        case ReactionFamily::type1: {
            const Type1Verdict v =
                threshold_type1(m, r.alpha, r.q, lambda1_upper, lambda_star_known);
            if (certificate) *certificate = v.certificate;
            return v.kind;
        }
        case ReactionFamily::type2: {
            const ThresholdTypeII th = threshold_type2(m, r.p, lambda1_upper);
            if (certificate) *certificate = th.certificate(r.mu);
            return th.classify(r.mu);
        }
    }
    return Regime::borderline_unknown;
}

bool near_edge(double x, double edge, double band) {
    return std::isfinite(edge) && std::fabs(x - edge) <= band * edge;
}

bool band_for(const ReactionSpec& r, const ManifoldModel& m,
              const std::optional<double>& lambda1_upper, double band) {
    switch (r.family) {
        case ReactionFamily::none: return false;
        case ReactionFamily::type1:
            // Exponent distance measured relative to the balanced line q = alpha.
            return std::fabs(r.q - r.alpha) <= band * (1.0 + r.alpha);
        case ReactionFamily::type2: {
            const ThresholdTypeII th = threshold_type2(m, r.p, lambda1_upper);
            return near_edge(r.mu, th.global_below, band) ||
                   near_edge(r.mu, th.blowup_above, band);
        }
    }
    return false;
}

bool kinds_agree(VerdictKind num, Regime ana) {
    if (ana == Regime::borderline_unknown) return true;
    if (num == VerdictKind::global_existence) return ana == Regime::global_small_data;
    if (num == VerdictKind::blow_up) return ana == Regime::blow_up_all_data;
    return false;
}

std::vector<std::pair<std::string, double>> echo_params(const RunConfig& cfg) {
    std::vector<std::pair<std::string, double>> out;
    switch (cfg.reaction.family) {
        case ReactionFamily::none: break;
        case ReactionFamily::type1:
            out.emplace_back("alpha", cfg.reaction.alpha);
            out.emplace_back("q", cfg.reaction.q);
            break;
        case ReactionFamily::type2:
            out.emplace_back("mu", cfg.reaction.mu);
            out.emplace_back("beta", cfg.reaction.beta);
            out.emplace_back("p", cfg.reaction.p);
            break;
    }
    out.emplace_back("theta", cfg.initial.theta);
    return out;
}

void apply_override(RunConfig& cfg, const std::string& name, double value) {
    if (name == "mu")
        cfg.reaction.mu = value;
    else if (name == "beta")
        cfg.reaction.beta = value;
    else if (name == "p")
        cfg.reaction.p = value;
    else if (name == "alpha")
        cfg.reaction.alpha = value;
    else if (name == "q")
        cfg.reaction.q = value;
    else if (name == "theta")
        cfg.initial.theta = value;
    else
        throw std::invalid_argument("unknown sweep axis \"" + name + "\"");
}

// Everything a sweep point needs that does not depend on the overrides.
struct Shared {
    ManifoldModel m;
    GridPtr grid;
    DiscreteLaplacian lap;
    std::vector<double> shape;  // unit-sup initial profile
    std::optional<double> lambda1_upper;
    std::optional<double> lambda_star_known;
};

std::vector<double> shape_field(const InitialSpec& in, const ManifoldModel& m,
                                const RadialGrid& grid) {
    const std::vector<double>& nodes = grid.nodes();
    const std::size_t n = grid.unknowns();
    std::vector<double> shape(n, 0.0);
    if (in.shape == "ground_state_scaled") {
        const GroundState gs = solve_ground_state(m, shape_lambda(m, grid.radius()), nodes);
        const double s = gs.sup();
        for (std::size_t i = 0; i < n; ++i) shape[i] = std::max(gs.phi[i] / s, 0.0);
    } else if (in.shape == "bump") {
        for (std::size_t i = 0; i < n; ++i) {
            const double z = (nodes[i] - in.center) / in.width;
            shape[i] = std::exp(-z * z);
        }
    } else {
        throw std::invalid_argument("unknown initial shape \"" + in.shape + "\"");
    }
    return shape;
}

SweepRecord classify_point(const Shared& sh, const RunConfig& cfg, long id,
                           std::vector<std::pair<std::string, double>> params, double band,
                           Trajectory* keep_traj) {
    SweepRecord rec;
    rec.point_id = id;
    rec.params = std::move(params);
    rec.analytic =
        regime_for(cfg.reaction, sh.m, sh.lambda1_upper, sh.lambda_star_known, &rec.certificate);
    rec.in_band = band_for(cfg.reaction, sh.m, sh.lambda1_upper, band);

    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::vector<double> u0 = sh.shape;
        for (double& v : u0) v *= cfg.initial.theta;
        const Reaction f = cfg.reaction.build();
        Trajectory traj = evolve(sh.lap, std::move(u0), f, cfg.horizon, cfg.controls);
        const Verdict v = detect_blowup(traj, cfg.controls);
        rec.verdict = v.kind;
        rec.reason = v.reason;
        rec.sup_final = traj.sup_final;
        rec.t_est = v.kind == VerdictKind::blow_up ? v.t_end : 0.0;
        if (keep_traj) *keep_traj = std::move(traj);
    } catch (const std::exception& e) {
        rec.verdict = VerdictKind::undetermined;
        rec.reason = std::string("crash: ") + e.what();
        rec.sup_final = 0.0;
        rec.t_est = 0.0;
    }
    rec.agreement = kinds_agree(rec.verdict, rec.analytic);
    rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

std::vector<double> initial_field(const RunConfig& cfg, const ManifoldModel& m,
                                  const RadialGrid& grid) {
    std::vector<double> shape = shape_field(cfg.initial, m, grid);
    for (double& v : shape) v *= cfg.initial.theta;
    return shape;
}

Regime analytic_regime(const RunConfig& cfg, const ManifoldModel& m, std::string* certificate) {
    return regime_for(cfg.reaction, m, model_lambda1_upper(m), cached_lambda_star(m),
                      certificate);
}

bool near_threshold(const RunConfig& cfg, const ManifoldModel& m, double band) {
    return band_for(cfg.reaction, m, model_lambda1_upper(m), band);
}

RunOutput run_single(const RunConfig& cfg) {
    Shared sh{cfg.manifold.build(), nullptr, {}, {}, {}, {}};
    auto [grid, lap] = discretize(sh.m, cfg.grid.radius, cfg.grid.cells);
    sh.grid = grid;
    sh.lap = std::move(lap);
    sh.shape = shape_field(cfg.initial, sh.m, *sh.grid);
    sh.lambda1_upper = model_lambda1_upper(sh.m);
    sh.lambda_star_known = cached_lambda_star(sh.m);

    RunOutput out;
    const double band = cfg.sweep ? cfg.sweep->band : 0.2;
    out.record = classify_point(sh, cfg, 0, echo_params(cfg), band, &out.traj);
    if (out.record.verdict == VerdictKind::undetermined && out.traj.times.empty())
        throw std::runtime_error("run failed: " + out.record.reason);
    return out;
}

std::vector<std::string> sweep_axis_names(const RunConfig& cfg) {
    if (!cfg.sweep) throw std::invalid_argument("config has no sweep section");
    std::vector<std::string> names;
    for (const auto& ax : cfg.sweep->axes) names.push_back(ax.name);
    return names;
}

long sweep_point_count(const RunConfig& cfg) {
    if (!cfg.sweep) throw std::invalid_argument("config has no sweep section");
    long n = 1;
    for (const auto& ax : cfg.sweep->axes) n *= long(ax.values.size());
    return n;
}

std::vector<std::pair<std::string, double>> sweep_point_params(const RunConfig& cfg, long id) {
    if (!cfg.sweep) throw std::invalid_argument("config has no sweep section");
    const auto& axes = cfg.sweep->axes;
    std::vector<std::pair<std::string, double>> params(axes.size());
    long rest = id;
    for (std::size_t a = axes.size(); a-- > 0;) {
        const long size = long(axes[a].values.size());
        params[a] = {axes[a].name, axes[a].values[std::size_t(rest % size)]};
        rest /= size;
    }
    if (rest != 0) throw std::out_of_range("sweep point id out of range");
    return params;
}

std::vector<SweepRecord> run_sweep(const RunConfig& cfg, ExecPolicy pol) {
    if (!cfg.sweep) throw std::invalid_argument("config has no sweep section");
    const long total = sweep_point_count(cfg);

    Shared sh{cfg.manifold.build(), nullptr, {}, {}, {}, {}};
    auto [grid, lap] = discretize(sh.m, cfg.grid.radius, cfg.grid.cells);
    sh.grid = grid;
    sh.lap = std::move(lap);
    sh.shape = shape_field(cfg.initial, sh.m, *sh.grid);
    sh.lambda1_upper = model_lambda1_upper(sh.m);
    sh.lambda_star_known = cached_lambda_star(sh.m);

    std::vector<SweepRecord> records(static_cast<std::size_t>(total));
    const double band = cfg.sweep->band;
    const int nt = cfg.sweep->threads > 0 ? cfg.sweep->threads : omp_get_max_threads();
    const bool par = pol == ExecPolicy::parallel;

#pragma omp parallel for schedule(dynamic) num_threads(nt) if (par)
    for (long id = 0; id < total; ++id) {
        RunConfig point = cfg;
        auto params = sweep_point_params(cfg, id);
        for (const auto& [name, value] : params) apply_override(point, name, value);
        records[std::size_t(id)] =
            classify_point(sh, point, id, std::move(params), band, nullptr);
    }
    return records;
}

}  // namespace hypheat
