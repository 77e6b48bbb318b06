#include "hypheat/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hypheat {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string fmt(double x, const char* spec = "%.17g") {
    char buf[40];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

const char* verdict_color(VerdictKind k) {
    switch (k) {
        case VerdictKind::global_existence: return "#4477aa";
        case VerdictKind::blow_up: return "#cc4444";
        case VerdictKind::undetermined: return "#999999";
    }
    return "#999999";
}

// Cell boundaries of a 1-d lattice: midpoints, with the end cells mirrored.
std::vector<double> cell_edges(const std::vector<double>& centers) {
    const std::size_t n = centers.size();
    std::vector<double> edges(n + 1);
    if (n == 1) {
        const double h = centers[0] != 0.0 ? 0.05 * std::fabs(centers[0]) : 0.5;
        edges[0] = centers[0] - h;
        edges[1] = centers[0] + h;
        return edges;
    }
    for (std::size_t i = 1; i < n; ++i) edges[i] = 0.5 * (centers[i - 1] + centers[i]);
    edges[0] = centers[0] - (edges[1] - centers[0]);
    edges[n] = centers[n - 1] + (centers[n - 1] - edges[n - 1]);
    return edges;
}

}  // namespace

std::string verdict_name(VerdictKind k) {
    switch (k) {
        case VerdictKind::global_existence: return "Global";
        case VerdictKind::blow_up: return "BlowUp";
        case VerdictKind::undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::string csv_number(double x) {
    // Shortest representation that parses back to the same double.
    for (int prec = 15; prec <= 17; ++prec) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return fmt(x);
}

void write_summary_csv(const std::string& path, const std::vector<SweepRecord>& records) {
    std::ofstream out = open_out(path);
    out << "point_id";
    if (!records.empty())
        for (const auto& [name, value] : records.front().params) out << "," << name;
    out << ",verdict,t_est,sup_final,runtime_s,agreement\n";
    for (const SweepRecord& rec : records) {
        out << rec.point_id;
        for (const auto& [name, value] : rec.params) out << "," << csv_number(value);
        out << "," << verdict_name(rec.verdict) << "," << csv_number(rec.t_est) << ","
            << csv_number(rec.sup_final) << "," << csv_number(rec.runtime_s) << ","
            << (rec.agreement ? "true" : "false") << "\n";
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
    std::ofstream out = open_out(path);
    out << "t,r,u\n";
    const std::vector<double>& nodes = traj.grid->nodes();
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        const std::vector<double>& u = traj.fields[s];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double v = i < u.size() ? u[i] : 0.0;  // Dirichlet boundary
            out << csv_number(traj.times[s]) << "," << csv_number(nodes[i]) << ","
                << csv_number(v) << "\n";
        }
    }
}

void write_sup_svg(const std::string& path, const Trajectory& traj) {
    if (traj.steps.empty()) throw std::invalid_argument("write_sup_svg: empty trajectory");
    const double W = 640, H = 420, L = 70, R = 20, T = 25, B = 45;

    // Thin the step record to a displayable polyline.
    std::vector<std::pair<double, double>> pts;
    const std::size_t stride = std::max<std::size_t>(1, traj.steps.size() / 1500);
    for (std::size_t i = 0; i < traj.steps.size(); i += stride)
        pts.emplace_back(traj.steps[i].t, std::max(traj.steps[i].sup, 1e-300));
    if (pts.back().first != traj.steps.back().t)
        pts.emplace_back(traj.steps.back().t, std::max(traj.steps.back().sup, 1e-300));

    double t_lo = pts.front().first, t_hi = pts.back().first;
    if (t_hi <= t_lo) t_hi = t_lo + 1.0;
    double y_lo = 1e300, y_hi = -1e300;
    for (auto& [t, s] : pts) {
        y_lo = std::min(y_lo, std::log10(s));
        y_hi = std::max(y_hi, std::log10(s));
    }
    if (y_hi - y_lo < 0.5) {
        y_lo -= 0.25;
        y_hi += 0.25;
    }
    auto px = [&](double t) { return L + (t - t_lo) / (t_hi - t_lo) * (W - L - R); };
    auto py = [&](double lg) { return H - B - (lg - y_lo) / (y_hi - y_lo) * (H - T - B); };

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
        << H - T - B << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<polyline fill=\"none\" stroke=\"#4477aa\" stroke-width=\"1.5\" points=\"";
    for (auto& [t, s] : pts) out << fmt(px(t), "%.2f") << "," << fmt(py(std::log10(s)), "%.2f") << " ";
    out << "\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double t = t_lo + (t_hi - t_lo) * k / 4.0;
        out << "<text x=\"" << fmt(px(t), "%.1f") << "\" y=\"" << H - B + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(t, "%.4g") << "</text>\n";
        const double lg = y_lo + (y_hi - y_lo) * k / 4.0;
        out << "<text x=\"" << L - 8 << "\" y=\"" << fmt(py(lg) + 4, "%.1f")
            << "\" font-size=\"11\" text-anchor=\"end\">1e" << fmt(lg, "%.3g") << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8
        << "\" font-size=\"12\" text-anchor=\"middle\">t</text>\n";
    out << "<text x=\"16\" y=\"" << (T + H - B) / 2
        << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\">sup u</text>\n";
    out << "</svg>\n";
}

void write_phase_svg(const std::string& path, const std::vector<SweepRecord>& records,
                     const std::string& x_name, const std::string& y_name,
                     const std::vector<std::pair<double, double>>& threshold) {
    if (records.empty()) throw std::invalid_argument("write_phase_svg: no records");
    auto param = [&](const SweepRecord& r, const std::string& key) {
        for (const auto& [name, value] : r.params)
            if (name == key) return value;
        throw std::invalid_argument("write_phase_svg: record lacks axis \"" + key + "\"");
    };

    std::vector<double> xs, ys;
    for (const SweepRecord& r : records) {
        xs.push_back(param(r, x_name));
        ys.push_back(param(r, y_name));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    const std::vector<double> ex = cell_edges(xs), ey = cell_edges(ys);

    const double W = 640, H = 560, L = 80, R = 25, T = 30, B = 60;
    auto px = [&](double x) {
        return L + (x - ex.front()) / (ex.back() - ex.front()) * (W - L - R);
    };
    auto py = [&](double y) {
        return H - B - (y - ey.front()) / (ey.back() - ey.front()) * (H - T - B);
    };
    std::map<double, std::size_t> xi, yi;
    for (std::size_t i = 0; i < xs.size(); ++i) xi[xs[i]] = i;
    for (std::size_t i = 0; i < ys.size(); ++i) yi[ys[i]] = i;

    std::ofstream out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<clipPath id=\"plot\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\""
        << W - L - R << "\" height=\"" << H - T - B << "\"/></clipPath>\n";
    for (const SweepRecord& r : records) {
        const std::size_t i = xi.at(param(r, x_name));
        const std::size_t j = yi.at(param(r, y_name));
        const double x0 = px(ex[i]), x1 = px(ex[i + 1]);
        const double y0 = py(ey[j + 1]), y1 = py(ey[j]);
        out << "<rect x=\"" << fmt(x0, "%.2f") << "\" y=\"" << fmt(y0, "%.2f") << "\" width=\""
            << fmt(x1 - x0, "%.2f") << "\" height=\"" << fmt(y1 - y0, "%.2f") << "\" fill=\""
            << verdict_color(r.verdict) << "\"";
        if (r.in_band) out << " fill-opacity=\"0.55\"";
        out << "/>\n";
    }
    if (threshold.size() >= 2) {
        out << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"black\" "
               "stroke-width=\"2\" stroke-dasharray=\"7 4\" points=\"";
        for (const auto& [x, y] : threshold)
            out << fmt(px(x), "%.2f") << "," << fmt(py(y), "%.2f") << " ";
        out << "\"/>\n";
    }
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\""
        << H - T - B << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (double x : xs)
        out << "<text x=\"" << fmt(px(x), "%.1f") << "\" y=\"" << H - B + 18
            << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(x, "%.3g") << "</text>\n";
    for (double y : ys)
        out << "<text x=\"" << L - 6 << "\" y=\"" << fmt(py(y) + 3, "%.1f")
            << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(y, "%.3g") << "</text>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 14
        << "\" font-size=\"13\" text-anchor=\"middle\">" << x_name << "</text>\n";
    out << "<text x=\"20\" y=\"" << (T + H - B) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << (T + H - B) / 2 << ")\">" << y_name << "</text>\n";
    const char* legend[3] = {"Global", "BlowUp", "Undetermined"};
    const VerdictKind kinds[3] = {VerdictKind::global_existence, VerdictKind::blow_up,
                                  VerdictKind::undetermined};
    for (int k = 0; k < 3; ++k) {
        const double lx = L + 8 + 150 * k;
        out << "<rect x=\"" << lx << "\" y=\"8\" width=\"12\" height=\"12\" fill=\""
            << verdict_color(kinds[k]) << "\"/>\n";
        out << "<text x=\"" << lx + 17 << "\" y=\"18\" font-size=\"11\">" << legend[k]
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace hypheat
