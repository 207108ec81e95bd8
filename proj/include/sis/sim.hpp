#pragma once

// Fixed-step RK4 integration of the scalar, simplicial and higher-order
// models with unit-box monitoring, the disease-free Lyapunov monitor
// V(x) = v^T Gamma^-1 x, and empirical domain classification from probes.

#include <sis/analysis.hpp>
#include <sis/error.hpp>
#include <sis/format.hpp>
#include <sis/log.hpp>
#include <sis/model.hpp>
#include <sis/parallel.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <string_view>
#include <vector>

namespace sis {

struct IntegratorConfig {
    double dt = 0.01;
    double t_end = 500.0;
    double domain_tolerance = 1e-9;
    std::size_t record_stride = 1;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<StateVector> states;
    std::vector<double> monitor; ///< V(x) per recorded time; empty unless attached
    double max_excursion = 0.0;  ///< largest distance outside [0,1] before clamping
    std::size_t clamped = 0;     ///< number of clamped coordinates
};

namespace detail {

inline void validate_config(const IntegratorConfig& cfg) {
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0) || cfg.dt > cfg.t_end)
        throw Error(ErrorKind::PreconditionViolated, "need 0 < dt <= t_end");
    if (cfg.record_stride < 1) throw Error(ErrorKind::PreconditionViolated, "record_stride must be >= 1");
}

inline std::size_t step_count(const IntegratorConfig& cfg) {
    const double ratio = cfg.t_end / cfg.dt;
    const double rounded = std::round(ratio);
    return static_cast<std::size_t>(std::abs(ratio - rounded) < 1e-9 * std::max(1.0, ratio) ? rounded : std::ceil(ratio));
}

/// Classical RK4 on a model whose field is evaluated by vector_field_into.
template <class Model>
class Rk4Stepper {
public:
    explicit Rk4Stepper(const Model& m) : m_(m), n_(m.size()), k1_(n_), k2_(n_), k3_(n_), k4_(n_), tmp_(n_) {}

    void step(std::span<double> x, double h) {
        vector_field_into(m_, x, k1_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
        vector_field_into(m_, tmp_, k2_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
        vector_field_into(m_, tmp_, k3_);
        for (std::size_t i = 0; i < n_; ++i) tmp_[i] = x[i] + h * k3_[i];
        vector_field_into(m_, tmp_, k4_);
        for (std::size_t i = 0; i < n_; ++i) x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

    /// ||f(x)||_inf
    double speed(std::span<const double> x) {
        vector_field_into(m_, x, k1_);
        double s = 0.0;
        for (double v : k1_) s = std::max(s, std::abs(v));
        return s;
    }

private:
    const Model& m_;
    std::size_t n_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

// Checks the unit box after a step, clamps, and returns the excursion.
inline double enforce_box(std::span<double> x, double tol, double t, std::size_t& clamped) {
    double excursion = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double out = std::max(-x[i], x[i] - 1.0);
        if (out > 0.0) {
            if (out > tol || !std::isfinite(x[i]))
                throw Error(ErrorKind::DomainEscape, "x[" + std::to_string(i + 1) + "] = " + format_g17(x[i]) +
                                                         " at t = " + format_g17(t) + " (dt too large?)");
            excursion = std::max(excursion, out);
            x[i] = std::clamp(x[i], 0.0, 1.0);
            ++clamped;
        }
    }
    return excursion;
}

template <class Model>
Trajectory integrate_model(const Model& m, std::span<const double> x0, const IntegratorConfig& cfg) {
    validate_config(cfg);
    StateVector x = to_unit_box(x0, m.size(), "x0");
    Trajectory tr;
    tr.times.push_back(0.0);
    tr.states.push_back(x);
    Rk4Stepper<Model> rk(m);
    const std::size_t steps = step_count(cfg);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_prev = static_cast<double>(k - 1) * cfg.dt;
        const double t = k == steps ? cfg.t_end : static_cast<double>(k) * cfg.dt;
        rk.step(x, t - t_prev);
        tr.max_excursion = std::max(tr.max_excursion, enforce_box(x, cfg.domain_tolerance, t, tr.clamped));
        if (k % cfg.record_stride == 0 || k == steps) {
            tr.times.push_back(t);
            tr.states.push_back(x);
        }
    }
    return tr;
}

} // namespace detail

inline Trajectory integrate(const SimplicialSis& m, std::span<const double> x0, const IntegratorConfig& cfg = {}) {
    return detail::integrate_model(m, x0, cfg);
}
inline Trajectory integrate(const HigherOrderSis& m, std::span<const double> x0, const IntegratorConfig& cfg = {}) {
    return detail::integrate_model(m, x0, cfg);
}
inline Trajectory integrate(const ScalarSis& m, double y0, const IntegratorConfig& cfg = {}) {
    return detail::integrate_model(validate(m), std::span<const double>(&y0, 1), cfg);
}

// ---------------------------------------------------------------------------
// Lyapunov monitor

struct LyapunovTrace {
    std::vector<double> values; ///< V(x(t_k)) = v^T Gamma^-1 x(t_k)
    Vector weights;             ///< v_i / gamma_i
    double lambda = 0.0;        ///< rho of the disease-free comparison matrix
    double rate = 0.0;          ///< q = (lambda - 1) min_i gamma_i
    bool sound = false;         ///< disease-free condition holds, so V must decay
};

/// V with v the left Perron vector of beta1 Gamma^-1 A + beta2 Gamma^-1 (1^T B_i)_rows.
/// Outside the disease-free condition the trace is still computed and a
/// MonitorUnsound warning is logged.
inline LyapunovTrace lyapunov_trace(const SimplicialSis& m, const Trajectory& traj) {
    DenseMatrix comparison = detail::scaled_contacts(m.gamma(), m.A(), m.beta1());
    comparison += m.beta2() * detail::higher_order_bound(m);
    const EigenPair left = perron_eigenpair(comparison, Side::Left);
    LyapunovTrace lt;
    lt.lambda = left.value;
    lt.rate = (left.value - 1.0) * *std::min_element(m.gamma().begin(), m.gamma().end());
    lt.sound = left.value < 1.0;
    if (!lt.sound) log::warn("MonitorUnsound: disease-free condition fails (rho = " + format_g17(left.value) + ")");
    lt.weights.resize(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) lt.weights[i] = left.vector[i] / m.gamma(i);
    lt.values.reserve(traj.states.size());
    for (const auto& x : traj.states) {
        double v = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) v += lt.weights[i] * x[i];
        lt.values.push_back(v);
    }
    return lt;
}

/// CSV with header t,x1,...,xn[,V] and 17 significant digits.
inline void write_trajectory_csv(const Trajectory& tr, std::ostream& os) {
    const std::size_t n = tr.states.empty() ? 0 : tr.states.front().size();
    const bool with_v = !tr.monitor.empty();
    os << 't';
    for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
    if (with_v) os << ",V";
    os << '\n';
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
        os << format_g17(tr.times[k]);
        for (double v : tr.states[k]) os << ',' << format_g17(v);
        if (with_v) os << ',' << format_g17(tr.monitor[k]);
        os << '\n';
    }
}

// ---------------------------------------------------------------------------
// empirical classification

enum class EmpiricalDomain { DiseaseFree, Bistable, Endemic, Undecided };

inline std::string_view to_string(EmpiricalDomain d) {
    switch (d) {
    case EmpiricalDomain::DiseaseFree: return "disease-free";
    case EmpiricalDomain::Bistable: return "bistable";
    case EmpiricalDomain::Endemic: return "endemic";
    case EmpiricalDomain::Undecided: return "undecided";
    }
    return "undecided";
}

enum class ProbeOutcome { Extinct, Endemic, Undecided };

struct BasinProbe {
    StateVector initial;
    ProbeOutcome verdict = ProbeOutcome::Undecided;
    StateVector final_state; ///< the attractor estimate when Endemic
    double final_speed = 0.0;
};

struct EmpiricalOptions {
    double extinction_threshold = 1e-6; ///< sup-norm below which a probe is Extinct
    double match_tol = 1e-4;            ///< attractor agreement between probes
    double settle_tol = 1e-8;           ///< ||f|| at t_end for a nonzero state to count as an attractor
    double stop_speed = 1e-12;          ///< integration may stop early once ||f|| falls below this
    double epsilon = 1e-3;              ///< low default probe eps * 1
};

struct EmpiricalClassification {
    EmpiricalDomain domain = EmpiricalDomain::Undecided;
    std::vector<BasinProbe> probes;
};

/// Integrates one probe to t_end (or until the state is stationary to
/// `stop_speed`) and labels the endpoint.
template <class Model>
BasinProbe run_probe(const Model& m, std::span<const double> x0, const IntegratorConfig& cfg,
                     const EmpiricalOptions& opt = {}) {
    detail::validate_config(cfg);
    BasinProbe probe;
    probe.initial = detail::to_unit_box(x0, m.size(), "probe");
    StateVector x = probe.initial;
    detail::Rk4Stepper<Model> rk(m);
    std::size_t clamped = 0;
    const std::size_t steps = detail::step_count(cfg);
    for (std::size_t k = 1; k <= steps; ++k) {
        const double t_prev = static_cast<double>(k - 1) * cfg.dt;
        const double t = k == steps ? cfg.t_end : static_cast<double>(k) * cfg.dt;
        rk.step(x, t - t_prev);
        detail::enforce_box(x, cfg.domain_tolerance, t, clamped);
        if (k % 64 == 0 && rk.speed(x) <= opt.stop_speed) break;
    }
    probe.final_speed = rk.speed(x);
    probe.final_state = x;
    double sup = 0.0;
    for (double v : x) sup = std::max(sup, v);
    if (sup < opt.extinction_threshold)
        probe.verdict = ProbeOutcome::Extinct;
    else if (probe.final_speed <= opt.settle_tol)
        probe.verdict = ProbeOutcome::Endemic;
    else
        probe.verdict = ProbeOutcome::Undecided;
    return probe;
}

/// Default probes {eps 1, 1/2 1, 1}: first is the low probe, last the high one.
inline std::vector<StateVector> default_probes(std::size_t n, double epsilon = 1e-3) {
    return {StateVector(n, epsilon), StateVector(n, 0.5), StateVector(n, 1.0)};
}

/// DiseaseFree if every probe goes extinct; Endemic if the low probe reaches
/// a nonzero attractor that every other probe also reaches (within
/// match_tol); Bistable if the low probe goes extinct while the high probe
/// settles on a nonzero attractor; Undecided otherwise. `probes` are ordered
/// low to high; empty means the defaults.
template <class Model>
EmpiricalClassification classify_empirical(const Model& m, const IntegratorConfig& cfg,
                                           std::vector<StateVector> probes = {}, const EmpiricalOptions& opt = {},
                                           std::size_t workers = 1) {
    if (probes.empty()) probes = default_probes(m.size(), opt.epsilon);
    EmpiricalClassification out;
    out.probes.resize(probes.size());
    parallel_for(probes.size(), workers, [&](std::size_t p) { out.probes[p] = run_probe(m, probes[p], cfg, opt); });

    const auto& low = out.probes.front();
    const auto& high = out.probes.back();
    const bool all_extinct = std::all_of(out.probes.begin(), out.probes.end(),
                                         [](const BasinProbe& b) { return b.verdict == ProbeOutcome::Extinct; });
    if (all_extinct) {
        out.domain = EmpiricalDomain::DiseaseFree;
    } else if (low.verdict == ProbeOutcome::Endemic) {
        const bool same = std::all_of(out.probes.begin(), out.probes.end(), [&](const BasinProbe& b) {
            if (b.verdict != ProbeOutcome::Endemic) return false;
            for (std::size_t i = 0; i < b.final_state.size(); ++i)
                if (std::abs(b.final_state[i] - low.final_state[i]) > opt.match_tol) return false;
            return true;
        });
        out.domain = same ? EmpiricalDomain::Endemic : EmpiricalDomain::Undecided;
    } else if (low.verdict == ProbeOutcome::Extinct && high.verdict == ProbeOutcome::Endemic) {
        out.domain = EmpiricalDomain::Bistable;
    } else {
        out.domain = EmpiricalDomain::Undecided;
    }
    return out;
}

} // namespace sis
