#pragma once

// Dense nonnegative / Metzler matrix utilities: irreducibility, Perron
// eigenpairs by shifted power iteration, weighted infinity-norm matrix
// measures and Hurwitz tests for Metzler matrices.

#include <sis/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sis {

using Vector = std::vector<double>;

/// Square matrix stored row-major. All entries are finite.
class DenseMatrix {
public:
    DenseMatrix() = default;

    explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), a_(n * n, fill) {
        if (!std::isfinite(fill)) throw Error(ErrorKind::InvalidShape, "non-finite fill value");
    }

    DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
        a_.reserve(n_ * n_);
        for (const auto& r : rows) {
            if (r.size() != n_) throw Error(ErrorKind::InvalidShape, "matrix is not square");
            a_.insert(a_.end(), r.begin(), r.end());
        }
        check_finite();
    }

    static DenseMatrix from_rows(const std::vector<Vector>& rows) {
        DenseMatrix m(rows.size());
        for (std::size_t i = 0; i < m.n_; ++i) {
            if (rows[i].size() != m.n_)
                throw Error(ErrorKind::InvalidShape,
                            "row " + std::to_string(i + 1) + " has " + std::to_string(rows[i].size()) +
                                " entries, expected " + std::to_string(m.n_));
            std::copy(rows[i].begin(), rows[i].end(), m.a_.begin() + static_cast<std::ptrdiff_t>(i * m.n_));
        }
        m.check_finite();
        return m;
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static DenseMatrix diagonal(std::span<const double> d) {
        DenseMatrix m(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        m.check_finite();
        return m;
    }

    std::size_t size() const noexcept { return n_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return a_[i * n_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return a_[i * n_ + j]; }

    std::span<const double> row(std::size_t i) const noexcept { return {a_.data() + i * n_, n_}; }
    std::span<const double> data() const noexcept { return a_; }

    DenseMatrix transposed() const {
        DenseMatrix t(n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool is_zero() const noexcept {
        return std::all_of(a_.begin(), a_.end(), [](double v) { return v == 0.0; });
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        require_same_size(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    DenseMatrix& operator-=(const DenseMatrix& o) {
        require_same_size(o);
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    DenseMatrix& operator*=(double s) noexcept {
        for (double& v : a_) v *= s;
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
    friend DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

    Vector operator*(std::span<const double> x) const {
        if (x.size() != n_) throw Error(ErrorKind::InvalidShape, "vector length does not match matrix");
        Vector y(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n_; ++j) s += a_[i * n_ + j] * x[j];
            y[i] = s;
        }
        return y;
    }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    void check_finite() const {
        for (std::size_t k = 0; k < a_.size(); ++k)
            if (!std::isfinite(a_[k]))
                throw Error(ErrorKind::InvalidShape, "non-finite entry at (" + std::to_string(k / n_ + 1) + "," +
                                                          std::to_string(k % n_ + 1) + ")");
    }
    void require_same_size(const DenseMatrix& o) const {
        if (o.n_ != n_) throw Error(ErrorKind::InvalidShape, "matrix sizes differ");
    }

    std::size_t n_ = 0;
    Vector a_;
};

/// Strictly positive weights for the weighted infinity norm.
class WeightVector {
public:
    explicit WeightVector(Vector xi) : xi_(std::move(xi)) {
        for (std::size_t i = 0; i < xi_.size(); ++i)
            if (!(xi_[i] > 0.0) || !std::isfinite(xi_[i]))
                throw Error(ErrorKind::NonpositiveWeight, "xi[" + std::to_string(i + 1) + "] = " + std::to_string(xi_[i]));
    }
    std::size_t size() const noexcept { return xi_.size(); }
    double operator[](std::size_t i) const noexcept { return xi_[i]; }
    const Vector& values() const noexcept { return xi_; }

private:
    Vector xi_;
};

/// Dominant eigenvalue with a strictly positive unit-sum eigenvector.
struct EigenPair {
    double value = 0.0;
    Vector vector;
    double residual = 0.0; ///< ||M v - value v||_inf for the returned v
    std::size_t iterations = 0;
};

enum class Side { Left, Right };

struct EigenOptions {
    double tol = 1e-12;
    std::size_t max_iter = 100000;
};

inline bool is_nonnegative(const DenseMatrix& m) noexcept {
    const auto d = m.data();
    return std::all_of(d.begin(), d.end(), [](double v) { return v >= 0.0; });
}

inline bool is_metzler(const DenseMatrix& m) noexcept {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (i != j && m(i, j) < 0.0) return false;
    return true;
}

namespace detail {

inline void require_nonnegative(const DenseMatrix& m) {
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m.size(); ++j)
            if (m(i, j) < 0.0)
                throw Error(ErrorKind::NegativeEntry,
                            "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") is negative");
}

// Nodes reachable from `start` following i->j when m(i,j) > 0 (or j->i if reversed).
inline std::vector<bool> reachable(const DenseMatrix& m, std::size_t start, bool reversed) {
    const std::size_t n = m.size();
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        const std::size_t u = stack.back();
        stack.pop_back();
        for (std::size_t w = 0; w < n; ++w) {
            const double e = reversed ? m(w, u) : m(u, w);
            if (e > 0.0 && !seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

// Strongly connected components (Kosaraju). Each component lists its nodes.
inline std::vector<std::vector<std::size_t>> strongly_connected_components(const DenseMatrix& m) {
    const std::size_t n = m.size();
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<bool> seen(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        // iterative post-order DFS
        std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
        seen[s] = true;
        while (!stack.empty()) {
            auto& [u, next] = stack.back();
            bool pushed = false;
            while (next < n) {
                const std::size_t w = next++;
                if (m(u, w) > 0.0 && !seen[w]) {
                    seen[w] = true;
                    stack.emplace_back(w, 0);
                    pushed = true;
                    break;
                }
            }
            if (!pushed) {
                order.push_back(stack.back().first);
                stack.pop_back();
            }
        }
    }
    std::vector<int> comp(n, -1);
    std::vector<std::vector<std::size_t>> comps;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[*it] >= 0) continue;
        comps.emplace_back();
        std::vector<std::size_t> stack{*it};
        comp[*it] = static_cast<int>(comps.size() - 1);
        while (!stack.empty()) {
            const std::size_t u = stack.back();
            stack.pop_back();
            comps.back().push_back(u);
            for (std::size_t w = 0; w < n; ++w)
                if (m(w, u) > 0.0 && comp[w] < 0) {
                    comp[w] = comp[*it];
                    stack.push_back(w);
                }
        }
    }
    return comps;
}

struct PowerResult {
    double value;
    Vector vector; // infinity-normalized
    std::size_t iterations;
};

// Perron pair of an irreducible nonnegative M of size >= 2. A few power steps
// on M/scale + I give a positive start; Noda iteration then solves
// (sigma I - M) w = v with sigma the Collatz-Wielandt upper bound
// max_i (Mv)_i / v_i, which converges quadratically and does not stall on
// small spectral gaps the way plain power iteration does. Stops once the
// upper and lower Collatz-Wielandt bounds meet at rounding level.
inline PowerResult shifted_power_iteration(const DenseMatrix& m, const EigenOptions& opt) {
    const std::size_t n = m.size();
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : m.row(i)) s += v;
        scale = std::max(scale, s);
    }
    if (scale == 0.0) return {0.0, Vector(n, 1.0), 0};
    const double floor = 32.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
    const double atol = std::max(opt.tol, floor);

    Vector v(n, 1.0), w(n);
    const auto row_dot = [&](std::size_t i, const Vector& x) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += m(i, j) * x[j];
        return s;
    };
    const auto normalize = [&] {
        const double top = *std::max_element(w.begin(), w.end());
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / top;
    };
    std::size_t it = 0;
    for (; it < std::min<std::size_t>(opt.max_iter, 8 + 2 * n); ++it) {
        for (std::size_t i = 0; i < n; ++i) w[i] = row_dot(i, v) / scale + v[i];
        normalize();
    }

    DenseMatrix lu(n);
    double last_gap = std::numeric_limits<double>::infinity();
    for (;; ++it) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ratio = row_dot(i, v) / v[i];
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
        // each step is cheap and quadratically convergent, so keep going
        // to rounding level; tol only decides when stagnation is acceptable
        const double gap = hi - lo;
        if (gap <= floor || (gap <= atol && gap > 0.5 * last_gap)) return {0.5 * (lo + hi), v, it};
        last_gap = gap;
        if (it >= opt.max_iter) break;

        // sigma sits strictly above rho, so sigma I - M is a nonsingular
        // M-matrix and elimination without pivoting keeps positive pivots
        const double sigma = hi + 0.25 * floor;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) lu(i, j) = (i == j ? sigma : 0.0) - m(i, j);
        w = v;
        bool ok = true;
        for (std::size_t k = 0; k < n && ok; ++k) {
            const double piv = lu(k, k);
            if (!(piv > 0.0)) {
                ok = false;
                break;
            }
            for (std::size_t i = k + 1; i < n; ++i) {
                const double f = lu(i, k) / piv;
                if (f == 0.0) continue;
                for (std::size_t j = k + 1; j < n; ++j) lu(i, j) -= f * lu(k, j);
                w[i] -= f * w[k];
            }
        }
        for (std::size_t k = n; k-- > 0 && ok;) {
            double s = w[k];
            for (std::size_t j = k + 1; j < n; ++j) s -= lu(k, j) * w[j];
            w[k] = s / lu(k, k);
            ok = std::isfinite(w[k]) && w[k] > 0.0;
        }
        if (!ok) break;
        normalize();
    }
    throw Error(ErrorKind::NoConvergence,
                "Perron iteration did not converge in " + std::to_string(it) + " iterations");
}

inline DenseMatrix submatrix(const DenseMatrix& m, const std::vector<std::size_t>& idx) {
    DenseMatrix s(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = m(idx[a], idx[b]);
    return s;
}

} // namespace detail

/// True iff the digraph with an edge i->j whenever M(i,j) > 0 is strongly
/// connected. A 1x1 matrix is irreducible.
inline bool is_irreducible(const DenseMatrix& m) {
    detail::require_nonnegative(m);
    if (m.size() <= 1) return true;
    const auto fwd = detail::reachable(m, 0, false);
    const auto bwd = detail::reachable(m, 0, true);
    return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
           std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

/// Spectral radius of a nonnegative matrix. Reducible inputs are split into
/// strongly connected blocks (the radius is the largest block radius) so the
/// Perron iteration only ever runs on irreducible blocks.
inline double spectral_radius(const DenseMatrix& m, const EigenOptions& opt = {}) {
    detail::require_nonnegative(m);
    if (m.size() == 0) return 0.0;
    if (is_irreducible(m)) {
        if (m.size() == 1) return m(0, 0);
        return detail::shifted_power_iteration(m, opt).value;
    }
    double rho = 0.0;
    for (const auto& comp : detail::strongly_connected_components(m)) {
        if (comp.size() == 1) {
            rho = std::max(rho, m(comp[0], comp[0]));
            continue;
        }
        rho = std::max(rho, detail::shifted_power_iteration(detail::submatrix(m, comp), opt).value);
    }
    return rho;
}

/// Perron eigenvalue and the left or right dominant eigenvector, normalized to
/// unit sum. The left vector is the right vector of the transpose.
inline EigenPair perron_eigenpair(const DenseMatrix& m, Side side, const EigenOptions& opt = {}) {
    if (!is_irreducible(m)) throw Error(ErrorKind::NotIrreducible, "matrix is reducible");
    const DenseMatrix work = side == Side::Left ? m.transposed() : m;
    EigenPair out;
    if (m.size() == 1) {
        out.value = m(0, 0);
        out.vector = {1.0};
        return out;
    }
    auto pr = detail::shifted_power_iteration(work, opt);
    double sum = 0.0;
    for (double v : pr.vector) sum += v;
    for (double& v : pr.vector) v /= sum;
    out.value = pr.value;
    out.vector = std::move(pr.vector);
    out.iterations = pr.iterations;
    const Vector mv = work * out.vector;
    for (std::size_t i = 0; i < mv.size(); ++i)
        out.residual = std::max(out.residual, std::abs(mv[i] - out.value * out.vector[i]));
    return out;
}

/// mu_{inf,diag(xi)}(M) = max_i ( m_ii + xi_i * sum_{j != i} |m_ij| / xi_j ).
inline double matrix_measure_inf(const DenseMatrix& m, const WeightVector& xi) {
    if (xi.size() != m.size()) throw Error(ErrorKind::InvalidShape, "weight length does not match matrix");
    double mu = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.size(); ++i) {
        double off = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j)
            if (j != i) off += std::abs(m(i, j)) / xi[j];
        mu = std::max(mu, m(i, i) + xi[i] * off);
    }
    return mu;
}

/// Largest real part of the spectrum of a Metzler matrix, computed as
/// rho(M + sI) - s with s = max_i |m_ii|.
inline double metzler_spectral_abscissa(const DenseMatrix& m, const EigenOptions& opt = {}) {
    if (!is_metzler(m)) throw Error(ErrorKind::NotMetzler, "matrix has a negative off-diagonal entry");
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s = std::max(s, std::abs(m(i, i)));
    DenseMatrix shifted = m;
    for (std::size_t i = 0; i < m.size(); ++i) shifted(i, i) += s;
    // rounding can leave -0.0 or -1e-17 on the diagonal
    for (std::size_t i = 0; i < m.size(); ++i) shifted(i, i) = std::max(shifted(i, i), 0.0);
    return spectral_radius(shifted, opt) - s;
}

/// Hurwitz test for Metzler matrices: rho(M + sI) < s - margin.
inline bool is_hurwitz_metzler(const DenseMatrix& m, double margin = 1e-12, const EigenOptions& opt = {}) {
    return metzler_spectral_abscissa(m, opt) < -margin;
}

} // namespace sis
