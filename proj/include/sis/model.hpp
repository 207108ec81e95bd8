#pragma once

// Scalar, simplicial and general higher-order SIS models: validated
// containers, vector fields, the analytic Jacobian and the exact
// difference-quotient matrix D(x, x*) with D(x, x*)(x - x*) = f(x) - f(x*).

#include <sis/error.hpp>
#include <sis/linalg.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sis {

/// Fraction infected per group; every entry in [0, 1].
using StateVector = Vector;

/// States up to this far outside [0,1] are clamped; further out is an error.
inline constexpr double kDomainSlack = 1e-9;

/// Number of state coordinates clamped back into [0,1] process-wide.
inline std::atomic<std::size_t>& clamp_counter() {
    static std::atomic<std::size_t> count{0};
    return count;
}

namespace detail {

inline StateVector to_unit_box(std::span<const double> x, std::size_t n, std::string_view name = "x") {
    if (x.size() != n)
        throw Error(ErrorKind::InvalidShape,
                    std::string(name) + " has " + std::to_string(x.size()) + " entries, expected " + std::to_string(n));
    StateVector out(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) {
        const double v = out[i];
        if (v >= 0.0 && v <= 1.0) continue;
        if (!(v >= -kDomainSlack && v <= 1.0 + kDomainSlack))
            throw Error(ErrorKind::OutOfDomain,
                        std::string(name) + "[" + std::to_string(i + 1) + "] = " + std::to_string(v) + " outside [0,1]");
        out[i] = std::clamp(v, 0.0, 1.0);
        clamp_counter().fetch_add(1, std::memory_order_relaxed);
    }
    return out;
}

inline void require_positive(double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorKind::NonpositiveRate, name + " = " + std::to_string(v));
}

inline void require_nonnegative_entries(const DenseMatrix& m, const std::string& name) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m(i, j) < 0.0)
                throw Error(ErrorKind::NegativeEntry,
                            name + "(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                                std::to_string(m(i, j)));
}

inline void validate_recovery_and_contacts(const Vector& gamma, const DenseMatrix& a) {
    const std::size_t n = gamma.size();
    if (n == 0) throw Error(ErrorKind::InvalidShape, "n must be positive");
    if (a.size() != n)
        throw Error(ErrorKind::InvalidShape, "A is " + std::to_string(a.size()) + "x" + std::to_string(a.size()) +
                                                 ", expected " + std::to_string(n) + "x" + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) require_positive(gamma[i], "gamma[" + std::to_string(i + 1) + "]");
    require_nonnegative_entries(a, "A");
}

// -gamma_i x_i + beta1 (1 - x_i) (A x)_i + (1 - x_i) * higher_i
// Shared by every flavor so the order-2 higher-order model reproduces the
// simplicial field bit for bit.
inline double assemble_field(double gamma, double beta1, double xi, double ax, double higher) {
    return -gamma * xi + beta1 * (1.0 - xi) * ax + (1.0 - xi) * higher;
}

inline double row_dot(const DenseMatrix& a, std::size_t i, std::span<const double> x) {
    double s = 0.0;
    const auto r = a.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    return s;
}

inline double quadratic_form(const DenseMatrix& b, std::span<const double> x) {
    double q = 0.0;
    const std::size_t n = b.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) q += b(j, k) * x[j] * x[k];
    return q;
}

} // namespace detail

// ---------------------------------------------------------------------------
// scalar model

struct ScalarSis {
    double gamma = 1.0;
    double beta1 = 0.0;
    double beta2 = 0.0;

    constexpr std::size_t size() const noexcept { return 1; }
};

inline ScalarSis validate(const ScalarSis& m) {
    detail::require_positive(m.gamma, "gamma");
    detail::require_positive(m.beta1, "beta1");
    detail::require_positive(m.beta2, "beta2");
    return m;
}

/// -gamma y + beta1 (1-y) y + beta2 (1-y) y^2
inline double scalar_vector_field(const ScalarSis& m, double y) {
    const double v = detail::to_unit_box(std::span<const double>(&y, 1), 1, "y")[0];
    return detail::assemble_field(m.gamma, m.beta1, v, v, m.beta2 * (v * v));
}

namespace detail {

inline void vector_field_into(const ScalarSis& m, std::span<const double> y, std::span<double> out) {
    out[0] = assemble_field(m.gamma, m.beta1, y[0], y[0], m.beta2 * (y[0] * y[0]));
}

} // namespace detail

// ---------------------------------------------------------------------------
// simplicial model

struct SimplicialSisParams {
    Vector gamma;
    DenseMatrix A;
    std::vector<DenseMatrix> B; ///< B[i](j,k) = b_ijk
    double beta1 = 0.0;
    double beta2 = 0.0;
};

/// Validated simplicial SIS model. Immutable; `eta()` is cached at
/// construction with eta_i = 1 iff B_i has a nonzero entry.
class SimplicialSis {
public:
    static SimplicialSis validate(SimplicialSisParams p) {
        detail::validate_recovery_and_contacts(p.gamma, p.A);
        const std::size_t n = p.gamma.size();
        if (p.B.size() != n)
            throw Error(ErrorKind::InvalidShape,
                        "B has " + std::to_string(p.B.size()) + " matrices, expected " + std::to_string(n));
        for (std::size_t i = 0; i < n; ++i) {
            if (p.B[i].size() != n)
                throw Error(ErrorKind::InvalidShape, "B[" + std::to_string(i + 1) + "] has wrong dimension");
            detail::require_nonnegative_entries(p.B[i], "B[" + std::to_string(i + 1) + "]");
        }
        detail::require_positive(p.beta1, "beta1");
        detail::require_positive(p.beta2, "beta2");
        if (!is_irreducible(p.A)) throw Error(ErrorKind::NotIrreducible, "A is reducible");
        SimplicialSis m;
        m.p_ = std::move(p);
        m.eta_.resize(n);
        for (std::size_t i = 0; i < n; ++i) m.eta_[i] = m.p_.B[i].is_zero() ? 0 : 1;
        return m;
    }

    /// Same structure with new infection rates.
    SimplicialSis with_rates(double beta1, double beta2) const {
        detail::require_positive(beta1, "beta1");
        detail::require_positive(beta2, "beta2");
        SimplicialSis m = *this;
        m.p_.beta1 = beta1;
        m.p_.beta2 = beta2;
        return m;
    }

    std::size_t size() const noexcept { return p_.gamma.size(); }
    const Vector& gamma() const noexcept { return p_.gamma; }
    double gamma(std::size_t i) const noexcept { return p_.gamma[i]; }
    const DenseMatrix& A() const noexcept { return p_.A; }
    const std::vector<DenseMatrix>& B() const noexcept { return p_.B; }
    const DenseMatrix& B(std::size_t i) const noexcept { return p_.B[i]; }
    double beta1() const noexcept { return p_.beta1; }
    double beta2() const noexcept { return p_.beta2; }
    const std::vector<int>& eta() const noexcept { return eta_; }
    bool has_higher_order() const noexcept {
        return std::any_of(eta_.begin(), eta_.end(), [](int e) { return e != 0; });
    }
    const SimplicialSisParams& params() const noexcept { return p_; }

private:
    SimplicialSis() = default;
    SimplicialSisParams p_;
    std::vector<int> eta_;
};

inline SimplicialSis validate(SimplicialSisParams p) { return SimplicialSis::validate(std::move(p)); }

namespace detail {

inline void vector_field_into(const SimplicialSis& m, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < m.size(); ++i) {
        const double q = quadratic_form(m.B(i), x);
        out[i] = assemble_field(m.gamma(i), m.beta1(), x[i], row_dot(m.A(), i, x), m.beta2() * q);
    }
}

} // namespace detail

/// f_i(x) = -gamma_i x_i + beta1 (1-x_i) sum_j a_ij x_j + beta2 (1-x_i) sum_jk b_ijk x_j x_k
inline Vector vector_field(const SimplicialSis& m, std::span<const double> x) {
    const StateVector s = detail::to_unit_box(x, m.size());
    Vector f(m.size());
    detail::vector_field_into(m, s, f);
    return f;
}

/// Analytic Jacobian
///   Df(x) = -Gamma + beta1 (I - X) A - beta1 diag(Ax) + beta2 (I - X) O1(x) - beta2 O2(x)
/// with O1 rows x^T (B_i + B_i^T) and O2 = diag(x^T B_i x). Metzler on [0,1]^n.
inline DenseMatrix jacobian(const SimplicialSis& m, std::span<const double> xin) {
    const StateVector x = detail::to_unit_box(xin, m.size());
    const std::size_t n = m.size();
    DenseMatrix j(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ax = detail::row_dot(m.A(), i, x);
        const DenseMatrix& b = m.B(i);
        const double q = detail::quadratic_form(b, x);
        for (std::size_t c = 0; c < n; ++c) {
            double o1 = 0.0;
            for (std::size_t k = 0; k < n; ++k) o1 += x[k] * (b(k, c) + b(c, k));
            j(i, c) = m.beta1() * (1.0 - x[i]) * m.A()(i, c) + m.beta2() * (1.0 - x[i]) * o1;
        }
        j(i, i) += -m.gamma(i) - m.beta1() * ax - m.beta2() * q;
    }
    return j;
}

/// D(x, x*) = D1 + D2 where
///   D1 = -Gamma + beta1 (I - X*) A + beta2 (I - X*) [x*^T B_i]_rows
///   D2 = -beta1 diag(Ax) + beta2 (I - X*) [x^T B_i^T]_rows - beta2 diag(x^T B_i x).
/// D(x, x*)(x - x*) = f(x) - f(x*) holds for any pair in the unit box.
inline DenseMatrix decomposition_D(const SimplicialSis& m, std::span<const double> xin, std::span<const double> xsin) {
    const StateVector x = detail::to_unit_box(xin, m.size(), "x");
    const StateVector xs = detail::to_unit_box(xsin, m.size(), "xstar");
    const std::size_t n = m.size();
    DenseMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        const DenseMatrix& b = m.B(i);
        const double sus = 1.0 - xs[i];
        for (std::size_t c = 0; c < n; ++c) {
            double xs_b = 0.0; // (x*^T B_i)_c
            double bx = 0.0;   // (x^T B_i^T)_c = (B_i x)_c
            for (std::size_t k = 0; k < n; ++k) {
                xs_b += xs[k] * b(k, c);
                bx += b(c, k) * x[k];
            }
            d(i, c) = m.beta1() * sus * m.A()(i, c) + m.beta2() * sus * (xs_b + bx);
        }
        d(i, i) += -m.gamma(i) - m.beta1() * detail::row_dot(m.A(), i, x) - m.beta2() * detail::quadratic_form(b, x);
    }
    return d;
}

// ---------------------------------------------------------------------------
// general higher-order model

/// One order-k interaction term b_{i i1 ... ik} (0-based indices).
struct Hyperedge {
    std::size_t target = 0;
    std::vector<std::size_t> sources;
    double weight = 0.0;
};

struct InteractionOrder {
    int k = 2;
    double beta = 0.0;
    std::vector<Hyperedge> hyperedges;
};

struct HigherOrderSisParams {
    Vector gamma;
    DenseMatrix A;
    double beta1 = 0.0;
    std::vector<InteractionOrder> orders;
};

/// Validated higher-order SIS model. Orders are kept sorted by k and are
/// distinct. `b_star()` and its indicator are cached at construction.
class HigherOrderSis {
public:
    static HigherOrderSis validate(HigherOrderSisParams p) {
        detail::validate_recovery_and_contacts(p.gamma, p.A);
        detail::require_positive(p.beta1, "beta1");
        const std::size_t n = p.gamma.size();
        // Order 2 is always admitted so that two-group simplicial models have a mirror.
        const int max_order = std::max<int>(2, static_cast<int>(n) - 1);
        std::sort(p.orders.begin(), p.orders.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
        for (std::size_t o = 0; o < p.orders.size(); ++o) {
            const auto& ord = p.orders[o];
            const std::string tag = "orders[k=" + std::to_string(ord.k) + "]";
            if (ord.k < 2 || ord.k > max_order)
                throw Error(ErrorKind::InvalidShape, tag + ": order outside {2,...," + std::to_string(max_order) + "}");
            if (o > 0 && p.orders[o - 1].k == ord.k) throw Error(ErrorKind::InvalidShape, tag + ": duplicate order");
            detail::require_positive(ord.beta, "beta" + std::to_string(ord.k));
            for (std::size_t e = 0; e < ord.hyperedges.size(); ++e) {
                const auto& h = ord.hyperedges[e];
                const std::string etag = tag + ".hyperedges[" + std::to_string(e + 1) + "]";
                if (h.target >= n) throw Error(ErrorKind::InvalidShape, etag + ": target index out of range");
                if (h.sources.size() != static_cast<std::size_t>(ord.k))
                    throw Error(ErrorKind::InvalidShape, etag + ": expected " + std::to_string(ord.k) + " sources");
                for (std::size_t s : h.sources)
                    if (s >= n) throw Error(ErrorKind::InvalidShape, etag + ": source index out of range");
                if (!(h.weight >= 0.0) || !std::isfinite(h.weight))
                    throw Error(ErrorKind::NegativeEntry, etag + ": weight = " + std::to_string(h.weight));
            }
        }
        if (!is_irreducible(p.A)) throw Error(ErrorKind::NotIrreducible, "A is reducible");

        HigherOrderSis m;
        m.p_ = std::move(p);
        m.b_star_.assign(n, 0.0);
        for (const auto& ord : m.p_.orders) {
            Vector per_target(n, 0.0);
            for (const auto& h : ord.hyperedges) per_target[h.target] += h.weight;
            for (std::size_t i = 0; i < n; ++i) m.b_star_[i] += ord.beta * per_target[i];
        }
        m.indicator_.resize(n);
        for (std::size_t i = 0; i < n; ++i) m.indicator_[i] = m.b_star_[i] > 0.0 ? 1 : 0;
        return m;
    }

    std::size_t size() const noexcept { return p_.gamma.size(); }
    const Vector& gamma() const noexcept { return p_.gamma; }
    double gamma(std::size_t i) const noexcept { return p_.gamma[i]; }
    const DenseMatrix& A() const noexcept { return p_.A; }
    double beta1() const noexcept { return p_.beta1; }
    const std::vector<InteractionOrder>& orders() const noexcept { return p_.orders; }
    /// b_i^* = sum_k beta_k sum b_{i i1...ik}
    const Vector& b_star() const noexcept { return b_star_; }
    const std::vector<int>& b_star_indicator() const noexcept { return indicator_; }
    const HigherOrderSisParams& params() const noexcept { return p_; }

private:
    HigherOrderSis() = default;
    HigherOrderSisParams p_;
    Vector b_star_;
    std::vector<int> indicator_;
};

inline HigherOrderSis validate(HigherOrderSisParams p) { return HigherOrderSis::validate(std::move(p)); }

/// Order-2 higher-order model carrying the same terms as a simplicial one.
/// Hyperedges are listed in (j, k) row-major order, zeros skipped.
inline HigherOrderSis as_higher_order(const SimplicialSis& m) {
    HigherOrderSisParams p;
    p.gamma = m.gamma();
    p.A = m.A();
    p.beta1 = m.beta1();
    InteractionOrder two{2, m.beta2(), {}};
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            for (std::size_t k = 0; k < m.size(); ++k)
                if (m.B(i)(j, k) != 0.0) two.hyperedges.push_back({i, {j, k}, m.B(i)(j, k)});
    p.orders.push_back(std::move(two));
    return HigherOrderSis::validate(std::move(p));
}

namespace detail {

inline void vector_field_into(const HigherOrderSis& m, std::span<const double> x, std::span<double> out) {
    const std::size_t n = m.size();
    // per-target accumulation, order by order, hyperedges in stored order
    Vector higher(n, 0.0);
    Vector sum_k(n);
    for (const auto& ord : m.orders()) {
        std::fill(sum_k.begin(), sum_k.end(), 0.0);
        for (const auto& h : ord.hyperedges) {
            double prod = h.weight;
            for (std::size_t s : h.sources) prod *= x[s];
            sum_k[h.target] += prod;
        }
        for (std::size_t i = 0; i < n; ++i) higher[i] += ord.beta * sum_k[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        out[i] = assemble_field(m.gamma(i), m.beta1(), x[i], row_dot(m.A(), i, x), higher[i]);
}

} // namespace detail

inline Vector vector_field_higher(const HigherOrderSis& m, std::span<const double> x) {
    const StateVector s = detail::to_unit_box(x, m.size());
    Vector f(m.size());
    detail::vector_field_into(m, s, f);
    return f;
}

} // namespace sis
