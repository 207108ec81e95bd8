#pragma once

// Epidemic diagrams over the (beta1, beta2) plane: per-cell theory and
// empirical classification, the three theory boundaries, and CSV / SVG
// exporters. Output is independent of the worker count.

#include <sis/analysis.hpp>
#include <sis/error.hpp>
#include <sis/format.hpp>
#include <sis/log.hpp>
#include <sis/model.hpp>
#include <sis/parallel.hpp>
#include <sis/sim.hpp>

#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace sis {

/// `count` cells of equal width over [lo, hi], sampled at their centers.
/// A single cell over a degenerate range lo == hi samples lo.
struct GridAxis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t count = 2;

    double center(std::size_t i) const {
        return lo + (static_cast<double>(i) + 0.5) * (hi - lo) / static_cast<double>(count);
    }
};

struct GridSpec {
    GridAxis beta1;
    GridAxis beta2;
};

inline void validate(const GridSpec& g) {
    for (const GridAxis* ax : {&g.beta1, &g.beta2}) {
        if (ax->count < 1) throw Error(ErrorKind::PreconditionViolated, "grid count must be >= 1");
        if (!(ax->lo < ax->hi) && !(ax->lo == ax->hi && ax->count == 1))
            throw Error(ErrorKind::PreconditionViolated, "grid range needs lo < hi");
    }
}

enum class SweepMode { Theory, Empirical, Both };

struct DiagramCell {
    double beta1 = 0.0;
    double beta2 = 0.0;
    std::optional<DomainClassification> theory;
    std::optional<EmpiricalDomain> empirical;
    std::string note; ///< diagnostic when the cell could not be evaluated
};

struct BoundaryPoint {
    double beta1;
    double beta2;
};

struct Diagram {
    GridSpec grid;
    SweepMode mode = SweepMode::Theory;
    /// Row-major by beta1: cell (i1, i2) sits at index i1 * beta2.count + i2.
    std::vector<DiagramCell> cells;
    std::optional<double> green; ///< beta1 = 1 / rho(Gamma^-1 A)
    std::vector<BoundaryPoint> blue; ///< bistable threshold beta2_hat(beta1)
    std::vector<BoundaryPoint> red;  ///< disease-free boundary
};

struct SweepOptions {
    std::size_t workers = 1;
    EmpiricalOptions empirical;
};

/// beta1 over [0, 2 / rho(Gamma^-1 A)], beta2 over [0, 2 beta2_hat(0)].
inline GridSpec default_grid(const SimplicialSis& tmpl, std::size_t n1 = 60, std::size_t n2 = 60) {
    const double rho = contact_spectral_radius(tmpl);
    GridSpec g;
    g.beta1 = {0.0, rho > 0.0 ? 2.0 / rho : 1.0, n1};
    const auto hat0 = beta2_bistable_threshold(tmpl, 0.0);
    g.beta2 = {0.0, hat0 && *hat0 > 0.0 ? 2.0 * *hat0 : 1.0, n2};
    return g;
}

/// Classifies every grid cell for the template's structure (its own rates
/// are ignored). Cell failures become Undecided / theory-less cells with a
/// note; the sweep itself never aborts on them.
inline Diagram sweep(const SimplicialSis& tmpl, const GridSpec& grid, const IntegratorConfig& cfg, SweepMode mode,
                     const SweepOptions& opt = {}) {
    validate(grid);
    detail::validate_config(cfg);
    Diagram d;
    d.grid = grid;
    d.mode = mode;
    const std::size_t n1 = grid.beta1.count, n2 = grid.beta2.count;
    d.cells.resize(n1 * n2);
    const bool want_theory = mode != SweepMode::Empirical;
    const bool want_empirical = mode != SweepMode::Theory;

    parallel_for(d.cells.size(), opt.workers, [&](std::size_t idx) {
        DiagramCell& cell = d.cells[idx];
        cell.beta1 = grid.beta1.center(idx / n2);
        cell.beta2 = grid.beta2.center(idx % n2);
        try {
            const SimplicialSis m = tmpl.with_rates(cell.beta1, cell.beta2);
            if (want_theory) cell.theory = classify_theory(m);
            if (want_empirical) cell.empirical = classify_empirical(m, cfg, {}, opt.empirical).domain;
        } catch (const Error& e) {
            cell.note = e.what();
            if (want_empirical && !cell.empirical) cell.empirical = EmpiricalDomain::Undecided;
        }
    });
    for (const auto& cell : d.cells)
        if (!cell.note.empty())
            log::warn("cell beta1=" + format_g17(cell.beta1) + " beta2=" + format_g17(cell.beta2) + ": " + cell.note);

    const double rho = contact_spectral_radius(tmpl);
    if (rho > 0.0) d.green = 1.0 / rho;
    for (std::size_t i1 = 0; i1 < n1; ++i1) {
        const double b1 = grid.beta1.center(i1);
        if (!(b1 * rho < 1.0)) continue;
        if (const auto hat = beta2_bistable_threshold(tmpl, b1)) d.blue.push_back({b1, *hat});
        if (const auto red = disease_free_boundary_beta2(tmpl, b1)) d.red.push_back({b1, *red});
    }
    return d;
}

inline void export_csv(const Diagram& d, std::ostream& os) {
    os << "beta1,beta2,theory,empirical,rho_df,bistable_margin\n";
    for (const auto& c : d.cells) {
        os << format_g17(c.beta1) << ',' << format_g17(c.beta2) << ',';
        if (c.theory)
            os << to_string(c.theory->domain);
        else
            os << (d.mode == SweepMode::Empirical ? "n/a" : "indeterminate");
        os << ',' << (c.empirical ? to_string(*c.empirical) : std::string_view("n/a")) << ',';
        if (c.theory)
            os << format_g17(c.theory->disease_free_lhs) << ',' << format_g17(c.theory->bistable_margin);
        else
            os << "nan,nan";
        os << '\n';
    }
    os << "# boundary green\nbeta1\n";
    if (d.green) os << format_g17(*d.green) << '\n';
    os << "# boundary blue\nbeta1,beta2\n";
    for (const auto& p : d.blue) os << format_g17(p.beta1) << ',' << format_g17(p.beta2) << '\n';
    os << "# boundary red\nbeta1,beta2\n";
    for (const auto& p : d.red) os << format_g17(p.beta1) << ',' << format_g17(p.beta2) << '\n';
}

namespace detail {

template <class Writer>
void write_file(const std::string& path, Writer&& writer) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    writer(out);
    out.flush();
    if (!out) throw Error(ErrorKind::IoFailure, "write to " + path + " failed");
}

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

} // namespace detail

inline void export_csv(const Diagram& d, const std::string& path) {
    detail::write_file(path, [&](std::ostream& os) { export_csv(d, os); });
}

/// Shade constants: light gray / gray / black for disease-free / bistable /
/// endemic, white for anything undecided.
inline constexpr const char* kShadeDiseaseFree = "#d3d3d3";
inline constexpr const char* kShadeBistable = "#808080";
inline constexpr const char* kShadeEndemic = "#000000";
inline constexpr const char* kShadeUndecided = "#ffffff";

/// Heatmap of the empirical class (theory class when no empirical run) with
/// the green, blue and red boundaries overlaid.
inline void export_svg(const Diagram& d, std::ostream& os) {
    constexpr double margin = 60.0, plot = 480.0;
    const auto& g = d.grid;
    const double x_lo = g.beta1.lo, x_hi = g.beta1.hi == g.beta1.lo ? g.beta1.lo + 1.0 : g.beta1.hi;
    const double y_lo = g.beta2.lo, y_hi = g.beta2.hi == g.beta2.lo ? g.beta2.lo + 1.0 : g.beta2.hi;
    const auto px = [&](double b1) { return margin + (b1 - x_lo) / (x_hi - x_lo) * plot; };
    const auto py = [&](double b2) { return margin + plot - (b2 - y_lo) / (y_hi - y_lo) * plot; };
    const double cw = plot / static_cast<double>(g.beta1.count), ch = plot / static_cast<double>(g.beta2.count);
    using detail::fixed3;

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed3(2 * margin + plot) << "\" height=\""
       << fixed3(2 * margin + plot) << "\">\n";
    os << "<defs><clipPath id=\"plot\"><rect x=\"" << fixed3(margin) << "\" y=\"" << fixed3(margin) << "\" width=\""
       << fixed3(plot) << "\" height=\"" << fixed3(plot) << "\"/></clipPath></defs>\n";
    os << "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (std::size_t idx = 0; idx < d.cells.size(); ++idx) {
        const auto& c = d.cells[idx];
        const char* fill = kShadeUndecided;
        if (c.empirical) {
            switch (*c.empirical) {
            case EmpiricalDomain::DiseaseFree: fill = kShadeDiseaseFree; break;
            case EmpiricalDomain::Bistable: fill = kShadeBistable; break;
            case EmpiricalDomain::Endemic: fill = kShadeEndemic; break;
            case EmpiricalDomain::Undecided: break;
            }
        } else if (c.theory) {
            switch (c.theory->domain) {
            case Domain::DiseaseFree: fill = kShadeDiseaseFree; break;
            case Domain::Bistable: fill = kShadeBistable; break;
            case Domain::Endemic: fill = kShadeEndemic; break;
            case Domain::Indeterminate: break;
            }
        }
        const std::size_t i1 = idx / g.beta2.count, i2 = idx % g.beta2.count;
        os << "<rect x=\"" << fixed3(margin + static_cast<double>(i1) * cw) << "\" y=\""
           << fixed3(margin + plot - static_cast<double>(i2 + 1) * ch) << "\" width=\"" << fixed3(cw)
           << "\" height=\"" << fixed3(ch) << "\" fill=\"" << fill << "\"/>\n";
    }
    os << "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"2\">\n";
    if (d.green)
        os << "<line x1=\"" << fixed3(px(*d.green)) << "\" y1=\"" << fixed3(margin) << "\" x2=\""
           << fixed3(px(*d.green)) << "\" y2=\"" << fixed3(margin + plot) << "\" stroke=\"green\"/>\n";
    const auto curve = [&](const std::vector<BoundaryPoint>& pts, const char* color) {
        if (pts.empty()) return;
        os << "<polyline stroke=\"" << color << "\" points=\"";
        for (std::size_t k = 0; k < pts.size(); ++k)
            os << (k ? " " : "") << fixed3(px(pts[k].beta1)) << ',' << fixed3(py(pts[k].beta2));
        os << "\"/>\n";
    };
    curve(d.blue, "blue");
    curve(d.red, "red");
    os << "</g>\n";
    os << "<rect x=\"" << fixed3(margin) << "\" y=\"" << fixed3(margin) << "\" width=\"" << fixed3(plot)
       << "\" height=\"" << fixed3(plot) << "\" fill=\"none\" stroke=\"#404040\"/>\n";
    os << "<text x=\"" << fixed3(margin + plot / 2) << "\" y=\"" << fixed3(margin + plot + 40)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">beta1</text>\n";
    os << "<text x=\"20\" y=\"" << fixed3(margin + plot / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\" transform=\"rotate(-90 20 "
       << fixed3(margin + plot / 2) << ")\">beta2</text>\n";
    os << "<text x=\"" << fixed3(margin) << "\" y=\"" << fixed3(margin + plot + 20)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << format_g17(x_lo) << "</text>\n";
    os << "<text x=\"" << fixed3(margin + plot) << "\" y=\"" << fixed3(margin + plot + 20)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << format_g17(x_hi) << "</text>\n";
    os << "<text x=\"" << fixed3(margin - 6) << "\" y=\"" << fixed3(margin + plot)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << format_g17(y_lo) << "</text>\n";
    os << "<text x=\"" << fixed3(margin - 6) << "\" y=\"" << fixed3(margin + 12)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << format_g17(y_hi) << "</text>\n";
    os << "</svg>\n";
}

inline void export_svg(const Diagram& d, const std::string& path) {
    detail::write_file(path, [&](std::ostream& os) { export_svg(d, os); });
}

} // namespace sis
