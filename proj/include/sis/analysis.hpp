#pragma once

// Parameter-space classification from the sufficient conditions for the
// disease-free, bistable and endemic domains, plus the two boundary curves
// that bound those regions in the (beta1, beta2) plane.

#include <sis/error.hpp>
#include <sis/linalg.hpp>
#include <sis/model.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>

namespace sis {

enum class Domain { DiseaseFree, Bistable, Endemic, Indeterminate };

inline std::string_view to_string(Domain d) {
    switch (d) {
    case Domain::DiseaseFree: return "disease-free";
    case Domain::Bistable: return "bistable";
    case Domain::Endemic: return "endemic";
    case Domain::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

struct DomainClassification {
    Domain domain = Domain::Indeterminate;
    double reproduction_number = 0.0; ///< beta1 rho(Gamma^-1 A)
    double disease_free_lhs = 0.0;    ///< rho of the disease-free comparison matrix
    /// min over groups with higher-order terms of the bistable quantity, minus
    /// its threshold (2, or n-1 for the general model). Absent when no group
    /// has higher-order terms.
    std::optional<double> bistable_margin;
};

struct ScalarDiagnostics {
    double v_c = 0.0;
    std::optional<double> nu_minus;
    std::optional<double> nu_plus;
    Domain domain = Domain::Indeterminate;
};

namespace detail {

inline DenseMatrix scaled_contacts(const Vector& gamma, const DenseMatrix& a, double beta1) {
    DenseMatrix m = a;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.size(); ++j) m(i, j) = beta1 * a(i, j) / gamma[i];
    return m;
}

/// Gamma^-1 (1^T B_1, ..., 1^T B_n)^T: row i holds the column sums of B_i over gamma_i.
inline DenseMatrix higher_order_bound(const SimplicialSis& m) {
    const std::size_t n = m.size();
    DenseMatrix c(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += m.B(i)(j, k);
            c(i, k) = s / m.gamma(i);
        }
    return c;
}

/// rho(beta1 Gamma^-1 A + beta2 Gamma^-1 (1^T B_i)_rows)
inline double disease_free_rho(const SimplicialSis& m, double beta1, double beta2, const EigenOptions& opt = {}) {
    DenseMatrix sum = scaled_contacts(m.gamma(), m.A(), beta1);
    sum += beta2 * higher_order_bound(m);
    return spectral_radius(sum, opt);
}

inline Domain decide(double r0, double df_lhs, const std::optional<double>& margin) {
    if (r0 > 1.0) return Domain::Endemic;
    if (df_lhs < 1.0) return Domain::DiseaseFree;
    if (r0 < 1.0 && margin && *margin >= 0.0) return Domain::Bistable;
    return Domain::Indeterminate;
}

} // namespace detail

/// rho(Gamma^-1 A)
inline double contact_spectral_radius(const Vector& gamma, const DenseMatrix& a) {
    return spectral_radius(detail::scaled_contacts(gamma, a, 1.0));
}
inline double contact_spectral_radius(const SimplicialSis& m) { return contact_spectral_radius(m.gamma(), m.A()); }

/// Bistable quantity min_{i: B_i != 0} (beta1/gamma_i (A eta)_i + beta2/(2 gamma_i) eta^T B_i eta) - 2.
inline std::optional<double> bistable_margin(const SimplicialSis& m, double beta1, double beta2) {
    if (!m.has_higher_order()) return std::nullopt;
    const std::size_t n = m.size();
    Vector eta(n);
    for (std::size_t i = 0; i < n; ++i) eta[i] = m.eta()[i];
    const Vector a_eta = m.A() * eta;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (!m.eta()[i]) continue;
        const double quad = detail::quadratic_form(m.B(i), eta);
        best = std::min(best, beta1 / m.gamma(i) * a_eta[i] + beta2 / (2.0 * m.gamma(i)) * quad);
    }
    return best - 2.0;
}

/// First matching domain in the order Endemic, DiseaseFree, Bistable;
/// Indeterminate when none of the sufficient conditions holds (including
/// equality cases).
inline DomainClassification classify_theory(const SimplicialSis& m) {
    DomainClassification c;
    c.reproduction_number = m.beta1() * contact_spectral_radius(m);
    c.disease_free_lhs = detail::disease_free_rho(m, m.beta1(), m.beta2());
    c.bistable_margin = bistable_margin(m, m.beta1(), m.beta2());
    c.domain = detail::decide(c.reproduction_number, c.disease_free_lhs, c.bistable_margin);
    return c;
}

/// General higher-order model. Disease-free via
/// rho(beta1 Gamma^-1 A + Gamma^-1 sum_k beta_k Bhat_k) < 1 with
/// Bhat_k(i,j) = sum over trailing indices of b_{i j l2 ... lk}; bistable via
/// the order-weighted minimum against n - 1 using ((n-2)/(n-1))^(k-1).
inline DomainClassification classify_theory_higher(const HigherOrderSis& m) {
    const std::size_t n = m.size();
    DomainClassification c;
    c.reproduction_number = m.beta1() * contact_spectral_radius(m.gamma(), m.A());

    DenseMatrix df = detail::scaled_contacts(m.gamma(), m.A(), m.beta1());
    for (const auto& ord : m.orders())
        for (const auto& h : ord.hyperedges) df(h.target, h.sources.front()) += ord.beta * h.weight / m.gamma(h.target);
    c.disease_free_lhs = spectral_radius(df);

    const auto& ind = m.b_star_indicator();
    if (std::any_of(ind.begin(), ind.end(), [](int v) { return v != 0; })) {
        Vector one_b(n);
        for (std::size_t i = 0; i < n; ++i) one_b[i] = ind[i];
        const Vector a_ind = m.A() * one_b;
        const double nn = static_cast<double>(n);
        // n = 2 has no interior factor; (n-2)/(n-1) = 0 and threshold 1.
        const double ratio = n >= 2 ? (nn - 2.0) / (nn - 1.0) : 0.0;
        Vector per_target(n, 0.0);
        for (const auto& ord : m.orders()) {
            Vector sum_k(n, 0.0);
            for (const auto& h : ord.hyperedges) {
                double prod = h.weight;
                for (std::size_t s : h.sources) prod *= one_b[s];
                sum_k[h.target] += prod;
            }
            const double factor = std::pow(ratio, ord.k - 1);
            for (std::size_t i = 0; i < n; ++i) per_target[i] += ord.beta / m.gamma(i) * factor * sum_k[i];
        }
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            if (ind[i]) best = std::min(best, m.beta1() / m.gamma(i) * a_ind[i] + per_target[i]);
        c.bistable_margin = best - (nn - 1.0);
    }
    c.domain = detail::decide(c.reproduction_number, c.disease_free_lhs, c.bistable_margin);
    return c;
}

/// Scalar model: v_c = 2 sqrt(r2) - r2 with r2 = beta2/gamma and the closed
/// form roots nu_-, nu_+ of beta2 y^2 + (beta1 - beta2) y + (gamma - beta1).
/// A root is reported only when the discriminant is nonnegative and the root
/// lies in (0, 1].
inline ScalarDiagnostics scalar_classify(const ScalarSis& model) {
    const ScalarSis m = validate(model);
    ScalarDiagnostics d;
    const double r1 = m.beta1 / m.gamma;
    const double r2 = m.beta2 / m.gamma;
    d.v_c = 2.0 * std::sqrt(r2) - r2;

    const double disc = (m.beta1 - m.beta2) * (m.beta1 - m.beta2) - 4.0 * m.beta2 * (m.gamma - m.beta1);
    if (disc >= 0.0) {
        const double mid = 0.5 * (1.0 - m.beta1 / m.beta2);
        const double half = std::sqrt(disc) / (2.0 * m.beta2);
        const auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
        if (in_unit(mid - half)) d.nu_minus = mid - half;
        if (in_unit(mid + half)) d.nu_plus = mid + half;
    }

    if (r1 > 1.0)
        d.domain = Domain::Endemic;
    else if ((r2 <= 1.0 && r1 <= 1.0) || (r2 > 1.0 && r1 < d.v_c))
        d.domain = Domain::DiseaseFree;
    else if (r2 > 1.0 && d.v_c < r1 && r1 < 1.0)
        d.domain = Domain::Bistable;
    else
        d.domain = Domain::Indeterminate;
    return d;
}

/// Smallest beta2 for which the bistable condition holds at the given beta1
/// (the model's own rates are ignored):
///   max_{i: B_i != 0} [2 gamma_i (2 - beta1/gamma_i (A eta)_i)]^+ / (eta^T B_i eta).
/// Absent when the model has no higher-order terms or when some group needs a
/// positive increase but has eta^T B_i eta = 0.
inline std::optional<double> beta2_bistable_threshold(const SimplicialSis& m, double beta1) {
    const double r0 = beta1 * contact_spectral_radius(m);
    if (!(r0 < 1.0))
        throw Error(ErrorKind::PreconditionViolated,
                    "beta1 rho(Gamma^-1 A) = " + std::to_string(r0) + " is not below 1");
    if (!m.has_higher_order()) return std::nullopt;
    const std::size_t n = m.size();
    Vector eta(n);
    for (std::size_t i = 0; i < n; ++i) eta[i] = m.eta()[i];
    const Vector a_eta = m.A() * eta;
    double hat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!m.eta()[i]) continue;
        const double need = std::max(0.0, 2.0 * m.gamma(i) * (2.0 - beta1 / m.gamma(i) * a_eta[i]));
        const double quad = detail::quadratic_form(m.B(i), eta);
        if (quad == 0.0) {
            if (need > 0.0) return std::nullopt;
            continue;
        }
        hat = std::max(hat, need / quad);
    }
    return hat;
}

inline std::optional<double> beta2_bistable_threshold(const SimplicialSis& m) {
    return beta2_bistable_threshold(m, m.beta1());
}

/// The beta2 >= 0 at which rho(beta1 Gamma^-1 A + beta2 Gamma^-1 (1^T B_i)_rows) = 1,
/// by bisection (the radius is nondecreasing in beta2). Absent when all B_i = 0.
inline std::optional<double> disease_free_boundary_beta2(const SimplicialSis& m, double beta1) {
    const double base = detail::disease_free_rho(m, beta1, 0.0);
    if (std::abs(base - 1.0) <= 1e-12) return 0.0;
    if (!(base < 1.0))
        throw Error(ErrorKind::PreconditionViolated,
                    "rho(beta1 Gamma^-1 A) = " + std::to_string(base) + " is not below 1");
    if (!m.has_higher_order()) return std::nullopt;

    double lo = 0.0, hi = 1.0;
    for (int doubling = 0; detail::disease_free_rho(m, beta1, hi) < 1.0; ++doubling) {
        if (doubling > 200) throw Error(ErrorKind::NoConvergence, "could not bracket the disease-free boundary");
        lo = hi;
        hi *= 2.0;
    }
    while (hi - lo > 1e-10 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        if (detail::disease_free_rho(m, beta1, mid) < 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace sis
