#include "hypheat/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hypheat {

namespace {

using json = nlohmann::json;

// Raw text kept alongside the parsed tree so messages can cite a line.
struct Ctx {
    const std::string* text;
    const std::string* origin;

    int line_of(const std::vector<std::string>& path) const {
        std::size_t pos = 0;
        for (const auto& comp : path) {
            if (!comp.empty() && comp.front() == '#') continue;  // array index
            const std::string needle = "\"" + comp + "\"";
            const std::size_t found = text->find(needle, pos);
            if (found == std::string::npos) return -1;
            pos = found + needle.size();
        }
        return int(std::count(text->begin(), text->begin() + long(pos), '\n')) + 1;
    }

    [[noreturn]] void fail(std::vector<std::string> path, const std::string& msg) const {
        std::string ptr;
        for (const auto& c : path) ptr += "/" + c;
        if (ptr.empty()) ptr = "/";
        std::ostringstream os;
        os << *origin << ": config error at " << ptr;
        const int ln = line_of(path);
        if (ln > 0) os << " (line " << ln << ")";
        os << ": " << msg;
        throw ConfigError(os.str());
    }
};

std::vector<std::string> operator+(std::vector<std::string> path, const std::string& key) {
    path.push_back(key);
    return path;
}

void check_object(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
                  std::initializer_list<const char*> allowed) {
    if (!j.is_object()) ctx.fail(path, "expected an object");
    for (const auto& item : j.items()) {
        if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
                return item.key() == a;
            }) == allowed.end())
            ctx.fail(path + item.key(), "unknown key \"" + item.key() + "\"");
    }
}

double get_double(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
                  const std::string& key, std::optional<double> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        ctx.fail(path + key, "missing required number");
    }
    const json& v = j.at(key);
    if (!v.is_number()) ctx.fail(path + key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) ctx.fail(path + key, "must be finite");
    return x;
}

long get_int(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
             const std::string& key, std::optional<long> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        ctx.fail(path + key, "missing required integer");
    }
    const json& v = j.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        ctx.fail(path + key, "expected an integer");
    return v.get<long>();
}

std::string get_string(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
                       const std::string& key, std::optional<std::string> fallback = {}) {
    if (!j.contains(key)) {
        if (fallback) return *fallback;
        ctx.fail(path + key, "missing required string");
    }
    const json& v = j.at(key);
    if (!v.is_string()) ctx.fail(path + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_array(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
                              const std::string& key) {
    const json& v = j.at(key);
    if (!v.is_array() || v.empty()) ctx.fail(path + key, "expected a non-empty array");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number()) ctx.fail(path + key, "array entries must be numbers");
        const double x = e.get<double>();
        if (!std::isfinite(x)) ctx.fail(path + key, "array entries must be finite");
        out.push_back(x);
    }
    return out;
}

ManifoldSpec parse_manifold(const Ctx& ctx, const json& j, const std::vector<std::string>& path) {
    ManifoldSpec m;
    if (!j.is_object()) ctx.fail(path, "expected an object");
    m.kind = get_string(ctx, j, path, "kind");
    if (m.kind == "euclidean" || m.kind == "hyperbolic") {
        check_object(ctx, j, path, {"kind", "dim", "r_max"});
    } else if (m.kind == "scaled_hyperbolic") {
        check_object(ctx, j, path, {"kind", "dim", "r_max", "kappa"});
        m.kappa = get_double(ctx, j, path, "kappa");
        if (!(m.kappa > 0.0)) ctx.fail(path + "kappa", "must be > 0");
    } else if (m.kind == "power_decay") {
        check_object(ctx, j, path, {"kind", "dim", "r_max", "c_hat", "gamma"});
        m.c_hat = get_double(ctx, j, path, "c_hat");
        m.gamma = get_double(ctx, j, path, "gamma", 0.0);
        if (!(m.c_hat > 0.0)) ctx.fail(path + "c_hat", "must be > 0");
        if (m.gamma < 0.0) ctx.fail(path + "gamma", "must be >= 0");
    } else {
        ctx.fail(path + "kind", "unknown manifold kind \"" + m.kind + "\"");
    }
    m.dim = int(get_int(ctx, j, path, "dim"));
    if (m.dim < 2 || m.dim > 12) ctx.fail(path + "dim", "must lie in [2, 12]");
    m.r_max = get_double(ctx, j, path, "r_max", 40.0);
    if (!(m.r_max > 0.0)) ctx.fail(path + "r_max", "must be > 0");
    return m;
}

ReactionSpec parse_reaction(const Ctx& ctx, const json& j, const std::vector<std::string>& path) {
    ReactionSpec r;
    const std::string family = get_string(ctx, j, path, "family");
    if (family == "none") {
        check_object(ctx, j, path, {"family"});
        r.family = ReactionFamily::none;
    } else if (family == "type1") {
        check_object(ctx, j, path, {"family", "alpha", "q", "kappa_quad"});
        r.family = ReactionFamily::type1;
        r.alpha = get_double(ctx, j, path, "alpha");
        r.q = get_double(ctx, j, path, "q");
        r.kappa_quad = get_double(ctx, j, path, "kappa_quad", 1.0);
        if (!(r.alpha > 0.0)) ctx.fail(path + "alpha", "must be > 0");
        if (r.q < 0.0) ctx.fail(path + "q", "must be >= 0");
        if (!(r.kappa_quad > 0.0)) ctx.fail(path + "kappa_quad", "must be > 0");
    } else if (family == "type2") {
        check_object(ctx, j, path, {"family", "mu", "beta", "p"});
        r.family = ReactionFamily::type2;
        r.mu = get_double(ctx, j, path, "mu");
        r.beta = get_double(ctx, j, path, "beta", 1.0);
        r.p = get_double(ctx, j, path, "p");
        if (r.mu < 0.0) ctx.fail(path + "mu", "must be >= 0");
        if (!(r.beta > 0.0)) ctx.fail(path + "beta", "must be > 0");
        if (!(r.p > 0.0)) ctx.fail(path + "p", "must be > 0");
    } else {
        ctx.fail(path + "family", "unknown reaction family \"" + family + "\"");
    }
    return r;
}

InitialSpec parse_initial(const Ctx& ctx, const json& j, const std::vector<std::string>& path) {
    InitialSpec in;
    in.shape = get_string(ctx, j, path, "shape", std::string("ground_state_scaled"));
    if (in.shape == "ground_state_scaled") {
        check_object(ctx, j, path, {"shape", "theta"});
    } else if (in.shape == "bump") {
        check_object(ctx, j, path, {"shape", "theta", "center", "width"});
        in.center = get_double(ctx, j, path, "center");
        in.width = get_double(ctx, j, path, "width");
        if (!(in.center >= 0.0)) ctx.fail(path + "center", "must be >= 0");
        if (!(in.width > 0.0)) ctx.fail(path + "width", "must be > 0");
    } else {
        ctx.fail(path + "shape", "unknown initial shape \"" + in.shape + "\"");
    }
    in.theta = get_double(ctx, j, path, "theta");
    if (!(in.theta >= 0.0)) ctx.fail(path + "theta", "must be >= 0");
    return in;
}

SolverControls parse_detector(const Ctx& ctx, const json& j,
                              const std::vector<std::string>& path) {
    SolverControls c;
    check_object(ctx, j, path,
                 {"rtol", "atol_rel", "dt_init", "dt_max", "max_steps", "snapshots",
                  "positivity_tol", "sup_threshold", "dt_collapse", "stop_sup", "safe_factor",
                  "growth_step_fraction", "disable_diffusion"});
    c.rtol = get_double(ctx, j, path, "rtol", c.rtol);
    c.atol_rel = get_double(ctx, j, path, "atol_rel", c.atol_rel);
    c.dt_init = get_double(ctx, j, path, "dt_init", c.dt_init);
    c.dt_max = get_double(ctx, j, path, "dt_max", c.dt_max);
    c.max_steps = get_int(ctx, j, path, "max_steps", c.max_steps);
    c.snapshots = int(get_int(ctx, j, path, "snapshots", c.snapshots));
    c.positivity_tol = get_double(ctx, j, path, "positivity_tol", c.positivity_tol);
    c.sup_threshold = get_double(ctx, j, path, "sup_threshold", c.sup_threshold);
    c.dt_collapse = get_double(ctx, j, path, "dt_collapse", c.dt_collapse);
    c.stop_sup = get_double(ctx, j, path, "stop_sup", c.stop_sup);
    c.safe_factor = get_double(ctx, j, path, "safe_factor", c.safe_factor);
    c.growth_step_fraction =
        get_double(ctx, j, path, "growth_step_fraction", c.growth_step_fraction);
    if (j.contains("disable_diffusion")) {
        if (!j.at("disable_diffusion").is_boolean())
            ctx.fail(path + "disable_diffusion", "expected a boolean");
        c.disable_diffusion = j.at("disable_diffusion").get<bool>();
    }
    if (!(c.rtol > 0.0)) ctx.fail(path + "rtol", "must be > 0");
    if (c.atol_rel < 0.0) ctx.fail(path + "atol_rel", "must be >= 0");
    if (!(c.dt_init > 0.0)) ctx.fail(path + "dt_init", "must be > 0");
    if (!(c.dt_max > 0.0)) ctx.fail(path + "dt_max", "must be > 0");
    if (c.max_steps < 1) ctx.fail(path + "max_steps", "must be >= 1");
    if (c.snapshots < 2) ctx.fail(path + "snapshots", "must be >= 2");
    if (c.positivity_tol < 0.0) ctx.fail(path + "positivity_tol", "must be >= 0");
    if (!(c.sup_threshold > 0.0)) ctx.fail(path + "sup_threshold", "must be > 0");
    if (!(c.dt_collapse > 0.0)) ctx.fail(path + "dt_collapse", "must be > 0");
    if (!(c.stop_sup >= c.sup_threshold)) ctx.fail(path + "stop_sup", "must be >= sup_threshold");
    if (!(c.safe_factor >= 1.0)) ctx.fail(path + "safe_factor", "must be >= 1");
    if (!(c.growth_step_fraction > 0.0)) ctx.fail(path + "growth_step_fraction", "must be > 0");
    return c;
}

SweepSpec parse_sweep(const Ctx& ctx, const json& j, const std::vector<std::string>& path,
                      const ReactionSpec& reaction) {
    SweepSpec sw;
    check_object(ctx, j, path, {"axes", "band", "threads"});
    if (!j.contains("axes") || !j.at("axes").is_array() || j.at("axes").empty())
        ctx.fail(path + "axes", "expected a non-empty array of axes");
    static const std::set<std::string> kType1Axes = {"alpha", "q"};
    static const std::set<std::string> kType2Axes = {"mu", "beta", "p"};
    std::set<std::string> seen;
    std::size_t points = 1;
    for (std::size_t i = 0; i < j.at("axes").size(); ++i) {
        const json& ja = j.at("axes")[i];
        const auto apath = path + "axes" + ("#" + std::to_string(i));
        AxisSpec ax;
        ax.name = get_string(ctx, ja, apath, "name");
        if (ax.name != "theta" && !kType1Axes.count(ax.name) && !kType2Axes.count(ax.name))
            ctx.fail(apath + "name", "unknown axis \"" + ax.name + "\"");
        if (kType1Axes.count(ax.name) && reaction.family != ReactionFamily::type1)
            ctx.fail(apath + "name", "axis \"" + ax.name + "\" needs a type1 reaction");
        if (kType2Axes.count(ax.name) && reaction.family != ReactionFamily::type2)
            ctx.fail(apath + "name", "axis \"" + ax.name + "\" needs a type2 reaction");
        if (!seen.insert(ax.name).second) ctx.fail(apath + "name", "duplicate axis");
        if (ja.contains("values")) {
            check_object(ctx, ja, apath, {"name", "values"});
            ax.values = get_array(ctx, ja, apath, "values");
        } else {
            check_object(ctx, ja, apath, {"name", "min", "max", "count"});
            const double lo = get_double(ctx, ja, apath, "min");
            const double hi = get_double(ctx, ja, apath, "max");
            const long count = get_int(ctx, ja, apath, "count");
            if (count < 1 || count > 10000) ctx.fail(apath + "count", "must lie in [1, 10000]");
            if (!(hi >= lo)) ctx.fail(apath + "max", "must be >= min");
            if (count == 1) {
                ax.values.push_back(lo);
            } else {
                for (long k = 0; k < count; ++k)
                    ax.values.push_back(lo + (hi - lo) * double(k) / double(count - 1));
            }
        }
        points *= ax.values.size();
        if (points > 10000) ctx.fail(path + "axes", "sweep exceeds 10000 points");
        sw.axes.push_back(std::move(ax));
    }
    sw.band = get_double(ctx, j, path, "band", sw.band);
    if (sw.band < 0.0 || sw.band > 0.95) ctx.fail(path + "band", "must lie in [0, 0.95]");
    sw.threads = int(get_int(ctx, j, path, "threads", 0));
    if (sw.threads < 0) ctx.fail(path + "threads", "must be >= 0");
    return sw;
}

KernelAuditSpec parse_kernel_audit(const Ctx& ctx, const json& j,
                                   const std::vector<std::string>& path) {
    KernelAuditSpec ka;
    check_object(ctx, j, path, {"radii", "times", "rate_times", "spread_max", "rate_tol"});
    if (j.contains("radii")) ka.radii = get_array(ctx, j, path, "radii");
    if (j.contains("times")) ka.times = get_array(ctx, j, path, "times");
    if (j.contains("rate_times")) ka.rate_times = get_array(ctx, j, path, "rate_times");
    ka.spread_max = get_double(ctx, j, path, "spread_max", ka.spread_max);
    ka.rate_tol = get_double(ctx, j, path, "rate_tol", ka.rate_tol);
    for (double r : ka.radii)
        if (r < 0.0) ctx.fail(path + "radii", "must be >= 0");
    for (double t : ka.times)
        if (!(t > 0.0)) ctx.fail(path + "times", "must be > 0");
    for (double t : ka.rate_times)
        if (!(t > 0.0)) ctx.fail(path + "rate_times", "must be > 0");
    if (!(ka.spread_max > 1.0)) ctx.fail(path + "spread_max", "must be > 1");
    if (!(ka.rate_tol > 0.0)) ctx.fail(path + "rate_tol", "must be > 0");
    return ka;
}

}  // namespace

ManifoldModel ManifoldSpec::build() const {
    if (kind == "euclidean") return ManifoldModel::euclidean(dim, r_max);
    if (kind == "hyperbolic") return ManifoldModel::hyperbolic(dim, r_max);
    if (kind == "scaled_hyperbolic") return ManifoldModel::scaled_hyperbolic(dim, kappa, r_max);
    if (kind == "power_decay") return ManifoldModel::power_decay(dim, c_hat, gamma, r_max);
    throw ConfigError("unknown manifold kind \"" + kind + "\"");
}

Reaction ReactionSpec::build() const {
    switch (family) {
        case ReactionFamily::none:
            return [](double, double) { return 0.0; };
        case ReactionFamily::type1: {
            const TypeOneSpec s = type1();
            return [s](double v, double t) { return eval_f(s, v, t); };
        }
        case ReactionFamily::type2: {
            const TypeTwoSpec s = type2();
            return [s](double v, double t) { return eval_f(s, v, t); };
        }
    }
    throw ConfigError("unreachable reaction family");
}

TypeOneSpec ReactionSpec::type1() const {
    if (family != ReactionFamily::type1)
        throw ConfigError("reaction spec is not of the logarithm-weight family");
    return TypeOneSpec::make(alpha, q, kappa_quad);
}

TypeTwoSpec ReactionSpec::type2() const {
    if (family != ReactionFamily::type2)
        throw ConfigError("reaction spec is not of the exponential-weight family");
    return TypeTwoSpec::make(mu, beta, p);
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    Ctx ctx{&text, &origin};
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t at = std::min<std::size_t>(e.byte, text.size());
        const int line = int(std::count(text.begin(), text.begin() + long(at), '\n')) + 1;
        throw ConfigError(origin + ": JSON parse error (line " + std::to_string(line) +
                          "): " + e.what());
    }
    check_object(ctx, root, {},
                 {"manifold", "reaction", "initial", "grid", "horizon", "detector", "seed",
                  "sweep", "kernel_audit", "eigen"});
    if (!root.contains("manifold")) ctx.fail({"manifold"}, "missing required section");

    RunConfig cfg;
    cfg.manifold = parse_manifold(ctx, root.at("manifold"), {"manifold"});
    if (root.contains("reaction"))
        cfg.reaction = parse_reaction(ctx, root.at("reaction"), {"reaction"});
    if (root.contains("initial")) cfg.initial = parse_initial(ctx, root.at("initial"), {"initial"});
    if (root.contains("grid")) {
        const json& jg = root.at("grid");
        check_object(ctx, jg, {"grid"}, {"radius", "cells"});
        cfg.grid.radius = get_double(ctx, jg, {"grid"}, "radius", cfg.grid.radius);
        cfg.grid.cells = int(get_int(ctx, jg, {"grid"}, "cells", cfg.grid.cells));
        if (!(cfg.grid.radius > 0.0)) ctx.fail({"grid", "radius"}, "must be > 0");
        if (cfg.grid.radius > cfg.manifold.r_max)
            ctx.fail({"grid", "radius"}, "exceeds the manifold's tabulated r_max");
        if (cfg.grid.cells < 8 || cfg.grid.cells > 100000)
            ctx.fail({"grid", "cells"}, "must lie in [8, 100000]");
    }
    if (root.contains("horizon")) {
        cfg.horizon = get_double(ctx, root, {}, "horizon");
        if (!(cfg.horizon > 0.0)) ctx.fail({"horizon"}, "must be > 0");
    }
    if (root.contains("detector"))
        cfg.controls = parse_detector(ctx, root.at("detector"), {"detector"});
    if (root.contains("seed")) {
        const long s = get_int(ctx, root, {}, "seed");
        if (s < 0) ctx.fail({"seed"}, "must be >= 0");
        cfg.seed = static_cast<unsigned long>(s);
    }
    if (root.contains("sweep"))
        cfg.sweep = parse_sweep(ctx, root.at("sweep"), {"sweep"}, cfg.reaction);
    if (root.contains("kernel_audit"))
        cfg.kernel_audit = parse_kernel_audit(ctx, root.at("kernel_audit"), {"kernel_audit"});
    if (root.contains("eigen")) {
        const json& je = root.at("eigen");
        check_object(ctx, je, {"eigen"}, {"lambda"});
        const double l = get_double(ctx, je, {"eigen"}, "lambda");
        if (!(l > 0.0)) ctx.fail({"eigen", "lambda"}, "must be > 0");
        cfg.eigen_lambda = l;
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string serialize_config(const RunConfig& cfg) {
    json root;
    json jm;
    jm["kind"] = cfg.manifold.kind;
    jm["dim"] = cfg.manifold.dim;
    jm["r_max"] = cfg.manifold.r_max;
    if (cfg.manifold.kind == "scaled_hyperbolic") jm["kappa"] = cfg.manifold.kappa;
    if (cfg.manifold.kind == "power_decay") {
        jm["c_hat"] = cfg.manifold.c_hat;
        jm["gamma"] = cfg.manifold.gamma;
    }
    root["manifold"] = jm;

    json jr;
    switch (cfg.reaction.family) {
        case ReactionFamily::none: jr["family"] = "none"; break;
        case ReactionFamily::type1:
            jr["family"] = "type1";
            jr["alpha"] = cfg.reaction.alpha;
            jr["q"] = cfg.reaction.q;
            jr["kappa_quad"] = cfg.reaction.kappa_quad;
            break;
        case ReactionFamily::type2:
            jr["family"] = "type2";
            jr["mu"] = cfg.reaction.mu;
            jr["beta"] = cfg.reaction.beta;
            jr["p"] = cfg.reaction.p;
            break;
    }
    root["reaction"] = jr;

    json ji;
    ji["shape"] = cfg.initial.shape;
    ji["theta"] = cfg.initial.theta;
    if (cfg.initial.shape == "bump") {
        ji["center"] = cfg.initial.center;
        ji["width"] = cfg.initial.width;
    }
    root["initial"] = ji;

    root["grid"] = {{"radius", cfg.grid.radius}, {"cells", cfg.grid.cells}};
    root["horizon"] = cfg.horizon;

    const SolverControls& c = cfg.controls;
    root["detector"] = {{"rtol", c.rtol},
                        {"atol_rel", c.atol_rel},
                        {"dt_init", c.dt_init},
                        {"dt_max", c.dt_max},
                        {"max_steps", c.max_steps},
                        {"snapshots", c.snapshots},
                        {"positivity_tol", c.positivity_tol},
                        {"sup_threshold", c.sup_threshold},
                        {"dt_collapse", c.dt_collapse},
                        {"stop_sup", c.stop_sup},
                        {"safe_factor", c.safe_factor},
                        {"growth_step_fraction", c.growth_step_fraction},
                        {"disable_diffusion", c.disable_diffusion}};
    root["seed"] = cfg.seed;

    if (cfg.sweep) {
        json js;
        js["axes"] = json::array();
        for (const auto& ax : cfg.sweep->axes)
            js["axes"].push_back({{"name", ax.name}, {"values", ax.values}});
        js["band"] = cfg.sweep->band;
        js["threads"] = cfg.sweep->threads;
        root["sweep"] = js;
    }
    if (cfg.kernel_audit) {
        const KernelAuditSpec& ka = *cfg.kernel_audit;
        root["kernel_audit"] = {{"radii", ka.radii},
                                {"times", ka.times},
                                {"rate_times", ka.rate_times},
                                {"spread_max", ka.spread_max},
                                {"rate_tol", ka.rate_tol}};
    }
    if (cfg.eigen_lambda) root["eigen"] = {{"lambda", *cfg.eigen_lambda}};
    return root.dump(2) + "\n";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
    return serialize_config(a) == serialize_config(b);
}

}  // namespace hypheat
