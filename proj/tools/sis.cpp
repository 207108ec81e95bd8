// sis: command-line front end.
//
//   sis classify    --model m.json [--beta1 b] [--beta2 b] [--json out.json]
//   sis classify    --gamma g --beta1 b --beta2 b            (scalar model)
//   sis scalar      --gamma g --beta1 b --beta2 b
//   sis equilibrium --model m.json [--tol t] [--max-iter k] [--trace out.csv]
//   sis simulate    --model m.json --x0 ones [--dt h] [--t-end T] [--out traj.csv] [--monitor lyapunov]
//   sis sweep       --model m.json [--grid 0:1:40,0:2:40] [--mode both] [--workers 8] --out d.csv [--svg d.svg]
//   sis gen         --n 5 --density 0.5 --seed 42 [--out m.json]
//
// Exit codes: 0 ok, 1 other failure, 2 invalid input, 3 no endemic
// equilibrium to compute, 4 trajectory left the unit box.

#include <sis/sis.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace sis;

constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNoEquilibrium = 3;
constexpr int kExitDomainEscape = 4;

struct ExitRequest {
    int code;
    std::string message;
};

int exit_code_for(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::NegativeEntry:
    case ErrorKind::NotIrreducible:
    case ErrorKind::NotMetzler:
    case ErrorKind::NonpositiveRate:
    case ErrorKind::NonpositiveWeight:
    case ErrorKind::InvalidShape:
    case ErrorKind::OutOfDomain:
    case ErrorKind::PreconditionViolated:
    case ErrorKind::ParseError: return kExitInvalid;
    case ErrorKind::DomainEscape: return kExitDomainEscape;
    default: return kExitFailure;
    }
}

// key: value report lines
class Report {
public:
    void add(const std::string& key, const std::string& value) {
        lines_.emplace_back(key, value);
        json_[key] = value;
    }
    void add(const std::string& key, double v) {
        lines_.emplace_back(key, format_g17(v));
        if (std::isfinite(v))
            json_[key] = v;
        else
            json_[key] = nullptr;
    }
    void add(const std::string& key, const std::optional<double>& v, const std::string& absent = "none") {
        if (v)
            add(key, *v);
        else {
            lines_.emplace_back(key, absent);
            json_[key] = nullptr;
        }
    }
    void print(std::ostream& os) const {
        for (const auto& [k, v] : lines_) os << k << ": " << v << '\n';
    }
    void write_json(const std::string& path) const {
        detail::write_file(path, [&](std::ostream& os) { os << json_.dump(2) << '\n'; });
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
    nlohmann::json json_ = nlohmann::json::object();
};

std::string join(std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_g17(v[i]);
    return s;
}

struct RateFlags {
    std::optional<double> beta1;
    std::optional<double> beta2;
};

struct ModelFlags {
    std::string model;
    RateFlags rates;
};

void add_rate_flags(CLI::App* cmd, RateFlags& r) {
    cmd->add_option("--beta1", r.beta1, "pairwise infection rate (overrides the file)");
    cmd->add_option("--beta2", r.beta2, "higher-order infection rate (overrides the file)");
}

ScalarSis scalar_from_flags(double gamma, const RateFlags& r) {
    if (!r.beta1) throw Error(ErrorKind::ParseError, "--beta1 is required for the scalar model");
    if (!r.beta2) throw Error(ErrorKind::ParseError, "--beta2 is required for the scalar model");
    return validate(ScalarSis{gamma, *r.beta1, *r.beta2});
}

StateVector parse_x0(const std::string& spec, std::size_t n) {
    if (spec == "zeros") return StateVector(n, 0.0);
    if (spec == "ones") return StateVector(n, 1.0);
    if (spec == "half") return StateVector(n, 0.5);
    StateVector x;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            x.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw Error(ErrorKind::ParseError, "x0: cannot parse '" + item + "'");
        }
    }
    if (x.size() == 1 && n > 1) x.assign(n, x.front());
    return detail::to_unit_box(x, n, "x0");
}

GridSpec parse_grid(const std::string& spec) {
    const auto axis = [](const std::string& s, const char* name) {
        GridAxis ax;
        char tail = 0;
        unsigned long long count = 0;
        if (std::sscanf(s.c_str(), "%lf:%lf:%llu%c", &ax.lo, &ax.hi, &count, &tail) != 3)
            throw Error(ErrorKind::ParseError, std::string("grid: ") + name + " axis must read lo:hi:n, got '" + s + "'");
        ax.count = static_cast<std::size_t>(count);
        return ax;
    };
    const auto comma = spec.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, "grid: expected b1lo:b1hi:n1,b2lo:b2hi:n2");
    GridSpec g{axis(spec.substr(0, comma), "beta1"), axis(spec.substr(comma + 1), "beta2")};
    validate(g);
    return g;
}

template <class Fn>
void with_output(const std::string& path, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        std::cout.flush();
    } else {
        detail::write_file(path, fn);
    }
}

// ---------------------------------------------------------------------------

void report_scalar(const ScalarSis& m, Report& r) {
    const ScalarDiagnostics d = scalar_classify(m);
    r.add("domain", std::string(to_string(d.domain)));
    r.add("reproduction_number", m.beta1 / m.gamma);
    r.add("v_c", d.v_c);
    r.add("nu_minus", d.nu_minus);
    r.add("nu_plus", d.nu_plus);
}

int cmd_classify(const ModelFlags& f, double gamma, const std::string& json_out) {
    Report r;
    if (f.model.empty()) {
        report_scalar(scalar_from_flags(gamma, f.rates), r);
    } else {
        const ModelDocument doc = read_model_file(f.model);
        if (doc.has_orders) {
            const HigherOrderSis m = to_higher_order(doc, f.rates.beta1, f.rates.beta2);
            const DomainClassification c = classify_theory_higher(m);
            r.add("domain", std::string(to_string(c.domain)));
            r.add("reproduction_number", c.reproduction_number);
            r.add("rho_df", c.disease_free_lhs);
            r.add("bistable_margin", c.bistable_margin);
            r.add("beta2_hat", std::optional<double>{}, "n/a");
        } else {
            const SimplicialSis m = to_simplicial(doc, f.rates.beta1, f.rates.beta2);
            const DomainClassification c = classify_theory(m);
            r.add("domain", std::string(to_string(c.domain)));
            r.add("reproduction_number", c.reproduction_number);
            r.add("rho_df", c.disease_free_lhs);
            r.add("bistable_margin", c.bistable_margin);
            if (c.reproduction_number < 1.0)
                r.add("beta2_hat", beta2_bistable_threshold(m));
            else
                r.add("beta2_hat", std::optional<double>{}, "n/a");
        }
    }
    r.print(std::cout);
    if (!json_out.empty()) r.write_json(json_out);
    return 0;
}

int cmd_scalar(double gamma, const RateFlags& rates, const std::string& json_out) {
    Report r;
    report_scalar(scalar_from_flags(gamma, rates), r);
    r.print(std::cout);
    if (!json_out.empty()) r.write_json(json_out);
    return 0;
}

struct EquilibriumFlags {
    double tol = 1e-12;
    std::size_t max_iter = 1000000;
    std::string trace;
    std::size_t certify = 0;
    std::uint64_t seed = 0;
};

int cmd_equilibrium(const ModelFlags& f, const EquilibriumFlags& e) {
    const ModelDocument doc = read_model_file(f.model);
    const SimplicialSis m = to_simplicial(doc, f.rates.beta1, f.rates.beta2);
    const DomainClassification c = classify_theory(m);
    if (c.domain != Domain::Bistable && c.domain != Domain::Endemic)
        throw ExitRequest{kExitNoEquilibrium, "model classifies as " + std::string(to_string(c.domain)) +
                                                  "; no endemic equilibrium is guaranteed"};
    IterateOptions opt;
    opt.tol = e.tol;
    opt.max_iter = e.max_iter;
    opt.record_trace = !e.trace.empty();
    const auto [res, trace] = endemic_iterate(m, c.domain, opt);

    Report r;
    r.add("domain", std::string(to_string(c.domain)));
    r.add("converged", res.converged ? "true" : "false");
    r.add("iterations", std::to_string(res.iterations));
    r.add("residual", res.residual);
    r.add("stability", std::string(to_string(res.stability)));
    r.add("xstar", join(res.xstar));
    if (e.certify > 0) {
        const double alpha = default_certificate_alpha(m, res.xstar);
        const ContractionCertificate cert = contraction_certificate(m, res.xstar, alpha, e.certify, e.seed);
        r.add("certificate", cert.certified() ? "certified" : "not-certified");
        r.add("certificate_points", std::to_string(cert.points_tested));
        r.add("certificate_worst_mu", cert.worst_mu);
    }
    r.print(std::cout);

    if (!e.trace.empty()) {
        detail::write_file(e.trace, [&](std::ostream& os) {
            os << "k,residual";
            for (std::size_t i = 0; i < m.size(); ++i) os << ",y" << i + 1;
            os << '\n';
            for (std::size_t k = 0; k < trace.residuals.size(); ++k)
                os << k + 1 << ',' << format_g17(trace.residuals[k]) << ',' << join(trace.iterates[k + 1]) << '\n';
        });
    }
    return res.converged ? 0 : kExitFailure;
}

struct SimulateFlags {
    std::string x0 = "ones";
    IntegratorConfig cfg;
    std::string out;
    std::string monitor;
    double gamma = 1.0;
};

int cmd_simulate(const ModelFlags& f, const SimulateFlags& s) {
    Trajectory tr;
    if (f.model.empty()) {
        const ScalarSis m = scalar_from_flags(s.gamma, f.rates);
        const StateVector x0 = parse_x0(s.x0, 1);
        tr = integrate(m, x0.front(), s.cfg);
    } else {
        const ModelDocument doc = read_model_file(f.model);
        if (doc.has_orders) {
            const HigherOrderSis m = to_higher_order(doc, f.rates.beta1, f.rates.beta2);
            tr = integrate(m, parse_x0(s.x0, m.size()), s.cfg);
        } else {
            const SimplicialSis m = to_simplicial(doc, f.rates.beta1, f.rates.beta2);
            tr = integrate(m, parse_x0(s.x0, m.size()), s.cfg);
            if (s.monitor == "lyapunov") tr.monitor = lyapunov_trace(m, tr).values;
        }
    }
    if (!s.monitor.empty() && tr.monitor.empty())
        throw Error(ErrorKind::ParseError, "--monitor lyapunov needs a simplicial model file");
    if (tr.clamped > 0)
        log::info(std::to_string(tr.clamped) + " coordinates clamped, max excursion " + format_g17(tr.max_excursion));
    with_output(s.out, [&](std::ostream& os) { write_trajectory_csv(tr, os); });
    return 0;
}

struct SweepFlags {
    std::string grid;
    std::string mode = "theory";
    std::size_t workers = 1;
    std::string out;
    std::string svg;
    IntegratorConfig cfg;
};

int cmd_sweep(const ModelFlags& f, const SweepFlags& s) {
    const ModelDocument doc = read_model_file(f.model);
    // rates are placeholders; every cell sets its own
    const SimplicialSis tmpl = to_simplicial(doc, 1.0, 1.0);
    const GridSpec grid = s.grid.empty() ? default_grid(tmpl) : parse_grid(s.grid);
    static const std::map<std::string, SweepMode> modes{
        {"theory", SweepMode::Theory}, {"empirical", SweepMode::Empirical}, {"both", SweepMode::Both}};
    SweepOptions opt;
    opt.workers = s.workers;
    const Diagram d = sweep(tmpl, grid, s.cfg, modes.at(s.mode), opt);

    with_output(s.out, [&](std::ostream& os) { export_csv(d, os); });
    if (!s.svg.empty()) export_svg(d, s.svg);
    if (!s.out.empty() && s.out != "-") {
        std::map<std::string, std::size_t> theory, empirical;
        for (const auto& c : d.cells) {
            if (c.theory) ++theory[std::string(to_string(c.theory->domain))];
            if (c.empirical) ++empirical[std::string(to_string(*c.empirical))];
        }
        std::cout << "cells: " << d.cells.size() << '\n';
        for (const auto& [k, v] : theory) std::cout << "theory_" << k << ": " << v << '\n';
        for (const auto& [k, v] : empirical) std::cout << "empirical_" << k << ": " << v << '\n';
    }
    return 0;
}

int cmd_gen(const GeneratorOptions& g, const std::string& out) {
    const SimplicialSis m = generate_random_model(g);
    with_output(out, [&](std::ostream& os) { os << dump_model_json(to_json(m)); });
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simplicial SIS epidemic models: classification, equilibria, simulation and diagrams"};
    app.require_subcommand(1);

    ModelFlags mf;
    double gamma = 1.0;
    std::string json_out;

    auto* classify = app.add_subcommand("classify", "theory classification of a model file (or scalar flags)");
    classify->add_option("--model", mf.model, "model JSON file");
    add_rate_flags(classify, mf.rates);
    classify->add_option("--gamma", gamma, "recovery rate when no model file is given");
    classify->add_option("--json", json_out, "also write the report as JSON");

    auto* scalar = app.add_subcommand("scalar", "scalar model diagnostics");
    add_rate_flags(scalar, mf.rates);
    scalar->add_option("--gamma", gamma, "recovery rate");
    scalar->add_option("--json", json_out, "also write the report as JSON");

    EquilibriumFlags ef;
    auto* equilibrium = app.add_subcommand("equilibrium", "endemic equilibrium by monotone iteration");
    equilibrium->add_option("--model", mf.model, "model JSON file")->required();
    add_rate_flags(equilibrium, mf.rates);
    equilibrium->add_option("--tol", ef.tol, "step tolerance")->check(CLI::PositiveNumber);
    equilibrium->add_option("--max-iter", ef.max_iter, "iteration cap")->check(CLI::PositiveNumber);
    equilibrium->add_option("--trace", ef.trace, "write the iteration trace as CSV");
    equilibrium->add_option("--certify", ef.certify, "sample count for a contraction certificate (0 = skip)");
    equilibrium->add_option("--seed", ef.seed, "seed for certificate sampling");

    SimulateFlags sf;
    auto* simulate = app.add_subcommand("simulate", "RK4 trajectory as CSV");
    simulate->add_option("--model", mf.model, "model JSON file (omit for the scalar model)");
    add_rate_flags(simulate, mf.rates);
    simulate->add_option("--gamma", sf.gamma, "recovery rate of the scalar model");
    simulate->add_option("--x0", sf.x0, "zeros | ones | half | comma-separated values");
    simulate->add_option("--dt", sf.cfg.dt, "step size")->check(CLI::PositiveNumber);
    simulate->add_option("--t-end", sf.cfg.t_end, "final time")->check(CLI::PositiveNumber);
    simulate->add_option("--stride", sf.cfg.record_stride, "record every k-th step")->check(CLI::PositiveNumber);
    simulate->add_option("--out", sf.out, "output CSV (default stdout)");
    simulate->add_option("--monitor", sf.monitor, "attach a monitor column")->check(CLI::IsMember({"lyapunov"}));

    SweepFlags wf;
    auto* sweep_cmd = app.add_subcommand("sweep", "epidemic diagram over the (beta1, beta2) plane");
    sweep_cmd->add_option("--model", mf.model, "model JSON file (rates ignored)")->required();
    sweep_cmd->add_option("--grid", wf.grid, "b1lo:b1hi:n1,b2lo:b2hi:n2");
    sweep_cmd->add_option("--mode", wf.mode, "theory | empirical | both")
        ->check(CLI::IsMember({"theory", "empirical", "both"}));
    sweep_cmd->add_option("--workers", wf.workers, "worker threads")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", wf.out, "diagram CSV (default stdout)");
    sweep_cmd->add_option("--svg", wf.svg, "diagram SVG");
    sweep_cmd->add_option("--dt", wf.cfg.dt, "step size for empirical cells")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--t-end", wf.cfg.t_end, "horizon for empirical cells")->check(CLI::PositiveNumber);

    GeneratorOptions gf;
    std::string gen_out;
    auto* gen = app.add_subcommand("gen", "seeded random binary model");
    gen->add_option("--n", gf.n, "group count")->check(CLI::Range(2, 100000));
    gen->add_option("--density", gf.density, "probability of a one entry")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gf.seed, "random seed");
    gen->add_option("--gamma", gf.gamma, "recovery rate of every group")->check(CLI::PositiveNumber);
    gen->add_option("--beta1", gf.beta1, "pairwise rate written to the file");
    gen->add_option("--beta2", gf.beta2, "higher-order rate written to the file");
    gen->add_option("--out", gen_out, "output JSON (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*classify) return cmd_classify(mf, gamma, json_out);
        if (*scalar) return cmd_scalar(gamma, mf.rates, json_out);
        if (*equilibrium) return cmd_equilibrium(mf, ef);
        if (*simulate) return cmd_simulate(mf, sf);
        if (*sweep_cmd) return cmd_sweep(mf, wf);
        if (*gen) return cmd_gen(gf, gen_out);
    } catch (const ExitRequest& e) {
        std::cerr << "sis: " << e.message << '\n';
        return e.code;
    } catch (const Error& e) {
        std::cerr << "sis: error: " << e.what() << '\n';
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "sis: error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
