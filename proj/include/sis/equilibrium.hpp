#pragma once

// Endemic equilibria of the simplicial model via the monotone fixed-point
// iteration y_{k+1} = H(y_k), H(y) = H+(Abar y + (y^T Bbar_i y)_i) with
// H+(z) = z / (1 + z), plus residual checks, Jacobian-based local stability
// and sampled contraction certificates for D(x, x*).

#include <sis/analysis.hpp>
#include <sis/error.hpp>
#include <sis/linalg.hpp>
#include <sis/model.hpp>
#include <sis/parallel.hpp>
#include <sis/random.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <variant>

namespace sis {

enum class Stability { ExponentiallyStable, Unstable, Marginal };

inline std::string_view to_string(Stability s) {
    switch (s) {
    case Stability::ExponentiallyStable: return "exponentially-stable";
    case Stability::Unstable: return "unstable";
    case Stability::Marginal: return "marginal";
    }
    return "marginal";
}

struct IterationTrace {
    std::vector<StateVector> iterates; ///< y_0, y_1, ...
    std::vector<double> residuals;     ///< ||y_{k+1} - y_k||_inf, one per step
};

struct EquilibriumResult {
    StateVector xstar;
    bool converged = false;
    std::size_t iterations = 0;
    double residual = 0.0; ///< ||f(x*)||_inf
    Stability stability = Stability::Marginal;
};

struct IterateOptions {
    double tol = 1e-12;
    std::size_t max_iter = 1000000;
    bool record_trace = true;
};

namespace detail {

inline void fixed_point_map_into(const SimplicialSis& m, std::span<const double> y, std::span<double> out) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double z = (m.beta1() * row_dot(m.A(), i, y) + m.beta2() * quadratic_form(m.B(i), y)) / m.gamma(i);
        out[i] = z / (1.0 + z);
    }
}

inline double sup_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

} // namespace detail

/// H(y) = H+(beta1 Gamma^-1 A y + beta2 Gamma^-1 (y^T B_i y)_i); output in [0,1)^n.
inline StateVector fixed_point_map(const SimplicialSis& m, std::span<const double> y) {
    const StateVector s = detail::to_unit_box(y, m.size(), "y");
    StateVector out(m.size());
    detail::fixed_point_map_into(m, s, out);
    return out;
}

/// ||f(x)||_inf <= tol
struct EquilibriumCheck {
    bool ok = false;
    double residual = 0.0;
};

inline EquilibriumCheck check_equilibrium(const SimplicialSis& m, std::span<const double> x, double tol) {
    const double r = detail::sup_norm(vector_field(m, x));
    return {r <= tol, r};
}

/// Classifies x* from the spectral abscissa of the Metzler Jacobian with a
/// 1e-9 dead band around zero.
inline Stability local_stability(const SimplicialSis& m, std::span<const double> xstar) {
    const auto chk = check_equilibrium(m, xstar, 1e-6);
    if (!chk.ok)
        throw Error(ErrorKind::NotEquilibrium, "||f(x)||_inf = " + std::to_string(chk.residual) + " exceeds 1e-6");
    const double abscissa = metzler_spectral_abscissa(jacobian(m, xstar));
    if (abscissa < -1e-9) return Stability::ExponentiallyStable;
    if (abscissa > 1e-9) return Stability::Unstable;
    return Stability::Marginal;
}

/// Starting point: eta/2 for the bistable domain, (1 - 1/rho) u with
/// ||u||_inf = 1 for the endemic domain, (rho, u) the Perron pair of
/// beta1 Gamma^-1 A.
inline StateVector endemic_initial_point(const SimplicialSis& m, Domain hint) {
    const std::size_t n = m.size();
    StateVector y0(n);
    if (hint == Domain::Bistable) {
        for (std::size_t i = 0; i < n; ++i) y0[i] = 0.5 * m.eta()[i];
        return y0;
    }
    const EigenPair pr = perron_eigenpair(detail::scaled_contacts(m.gamma(), m.A(), m.beta1()), Side::Right);
    const double umax = detail::sup_norm(pr.vector);
    for (std::size_t i = 0; i < n; ++i) y0[i] = (1.0 - 1.0 / pr.value) * pr.vector[i] / umax;
    return y0;
}

/// Monotone fixed-point iteration for an endemic equilibrium. Stops once the
/// step ||y_{k+1} - y_k||_inf is at most tol and ||f(y)||_inf is at most
/// 10 tol max_i gamma_i, or after max_iter steps (converged = false).
inline std::pair<EquilibriumResult, IterationTrace> endemic_iterate(const SimplicialSis& m, Domain hint,
                                                                    const IterateOptions& opt = {}) {
    if (hint != Domain::Bistable && hint != Domain::Endemic)
        throw Error(ErrorKind::PreconditionViolated, "domain hint must be bistable or endemic");
    const auto cls = classify_theory(m);
    if (cls.domain != hint)
        throw Error(ErrorKind::PreconditionViolated, "model classifies as " + std::string(to_string(cls.domain)) +
                                                         ", not " + std::string(to_string(hint)));
    const std::size_t n = m.size();
    const double gmax = *std::max_element(m.gamma().begin(), m.gamma().end());
    const double residual_tol = 10.0 * opt.tol * gmax;

    IterationTrace trace;
    StateVector y = endemic_initial_point(m, hint);
    StateVector next(n), f(n);
    if (opt.record_trace) trace.iterates.push_back(y);

    EquilibriumResult res;
    for (std::size_t k = 1; k <= opt.max_iter; ++k) {
        detail::fixed_point_map_into(m, y, next);
        double step = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (next[i] < y[i] - 1e-14)
                throw Error(ErrorKind::MonotonicityViolation,
                            "iterate " + std::to_string(k) + " decreased in entry " + std::to_string(i + 1));
            step = std::max(step, std::abs(next[i] - y[i]));
        }
        y.swap(next);
        if (opt.record_trace) {
            trace.iterates.push_back(y);
            trace.residuals.push_back(step);
        }
        res.iterations = k;
        if (step <= opt.tol) {
            detail::vector_field_into(m, y, f);
            if (detail::sup_norm(f) <= residual_tol) {
                res.converged = true;
                break;
            }
        }
    }
    detail::vector_field_into(m, y, f);
    res.residual = detail::sup_norm(f);
    res.xstar = y;
    res.stability = res.residual <= 1e-6 ? local_stability(m, y) : Stability::Marginal;
    return {std::move(res), std::move(trace)};
}

// ---------------------------------------------------------------------------
// contraction certificate

struct Certified {
    double rate; ///< c > 0 with mu(D(x, x*)) <= -c at every tested point
};
struct NotCertified {
    double worst_mu; ///< largest measure seen, >= 0
};

/// Result of a sampled check of mu_{inf,diag(x*)^-1}(D(x, x*)) < 0 over the
/// box {alpha v <= x <= 1}. A sampled certificate, not a proof.
struct ContractionCertificate {
    std::variant<Certified, NotCertified> verdict;
    double worst_mu = 0.0;
    std::size_t points_tested = 0;
    Vector lower_corner; ///< alpha v

    bool certified() const noexcept { return std::holds_alternative<Certified>(verdict); }
};

struct CertificateOptions {
    bool include_corners = true; ///< all 2^n corners, only when n <= 12
    std::size_t workers = 1;
};

/// alpha = 0.01 / rho(Gamma^-1 A), shrunk until alpha v <= x*_min / 2.
inline double default_certificate_alpha(const SimplicialSis& m, std::span<const double> xstar) {
    const EigenPair pr = perron_eigenpair(detail::scaled_contacts(m.gamma(), m.A(), 1.0), Side::Right);
    double alpha = 0.01 / pr.value;
    const double vmax = detail::sup_norm(pr.vector);
    const double xmin = *std::min_element(xstar.begin(), xstar.end());
    return std::min(alpha, 0.5 * xmin / vmax);
}

/// Tests D(x, x*) x* <= -c x* at x* itself, then `samples - 1` scrambled
/// Halton points of the box, then (optionally) its corners. Each point's
/// measure is max_i (D x*)_i / x*_i; the certificate holds with
/// c = -max over points when that maximum is negative.
inline ContractionCertificate contraction_certificate(const SimplicialSis& m, std::span<const double> xstar,
                                                      double alpha, std::size_t samples, std::uint64_t seed,
                                                      const CertificateOptions& opt = {}) {
    const std::size_t n = m.size();
    const StateVector xs = detail::to_unit_box(xstar, n, "xstar");
    for (std::size_t i = 0; i < n; ++i)
        if (!(xs[i] > 0.0)) throw Error(ErrorKind::PreconditionViolated, "xstar must be strictly positive");
    if (!(alpha > 0.0)) throw Error(ErrorKind::PreconditionViolated, "alpha must be positive");
    const EigenPair pr = perron_eigenpair(detail::scaled_contacts(m.gamma(), m.A(), m.beta1()), Side::Right);
    Vector lower(n);
    for (std::size_t i = 0; i < n; ++i) {
        lower[i] = alpha * pr.vector[i];
        if (!(lower[i] < xs[i]))
            throw Error(ErrorKind::PreconditionViolated,
                        "alpha v is not below xstar in entry " + std::to_string(i + 1));
    }

    std::vector<StateVector> points;
    if (samples > 0) points.push_back(xs);
    const HaltonSequence halton(n, seed);
    for (std::size_t s = 1; s < samples; ++s) {
        Vector u = halton.point(s);
        for (std::size_t i = 0; i < n; ++i) u[i] = lower[i] + u[i] * (1.0 - lower[i]);
        points.push_back(std::move(u));
    }
    if (opt.include_corners && n <= 12) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            StateVector c(n);
            for (std::size_t i = 0; i < n; ++i) c[i] = (mask >> i) & 1U ? 1.0 : lower[i];
            points.push_back(std::move(c));
        }
    }

    const WeightVector weight([&] {
        Vector w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = 1.0 / xs[i];
        return w;
    }());
    std::vector<double> mus(points.size());
    parallel_for(points.size(), opt.workers,
                 [&](std::size_t p) { mus[p] = matrix_measure_inf(decomposition_D(m, points[p], xs), weight); });

    ContractionCertificate cert;
    cert.points_tested = points.size();
    cert.lower_corner = lower;
    cert.worst_mu = points.empty() ? 0.0 : *std::max_element(mus.begin(), mus.end());
    if (!points.empty() && cert.worst_mu < 0.0)
        cert.verdict = Certified{-cert.worst_mu};
    else
        cert.verdict = NotCertified{cert.worst_mu};
    return cert;
}

} // namespace sis
