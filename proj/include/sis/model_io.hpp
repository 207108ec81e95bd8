#pragma once

// JSON model files and the seeded random-model generator.
//
//   { "n": 2, "gamma": [1, 1], "A": [[0, 1], [1, 0]],
//     "B": [[[1, 1], [1, 1]], "zero"], "beta1": 0.5, "beta2": 1,
//     "orders": [{"k": 3, "beta": 0.2, "hyperedges": [[1, [2, 3, 4], 1.0]]}] }
//
// Indices in files are 1-based. `B`, `beta1`, `beta2` and `orders` are
// optional; a file with `orders` describes a HigherOrderSis, in which case a
// nonzero `B` joins as the order-2 term with rate `beta2`.

#include <sis/analysis.hpp>
#include <sis/error.hpp>
#include <sis/linalg.hpp>
#include <sis/model.hpp>
#include <sis/random.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace sis {

/// A parsed but not yet validated model file.
struct ModelDocument {
    std::size_t n = 0;
    Vector gamma;
    DenseMatrix A;
    std::vector<DenseMatrix> B; ///< always n matrices; "zero" and missing entries are zero
    std::optional<double> beta1;
    std::optional<double> beta2;
    std::vector<InteractionOrder> orders;
    bool has_orders = false;
};

namespace detail {

inline Error parse_error(const std::string& field, const std::string& what) {
    return Error(ErrorKind::ParseError, field + ": " + what);
}

inline double json_number(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw parse_error(field, "expected a number");
    return j.get<double>();
}

inline std::size_t json_index(const nlohmann::json& j, std::size_t n, const std::string& field) {
    if (!j.is_number_integer()) throw parse_error(field, "expected an integer index");
    const auto v = j.get<long long>();
    if (v < 1 || static_cast<std::size_t>(v) > n)
        throw parse_error(field, "index " + std::to_string(v) + " outside 1.." + std::to_string(n));
    return static_cast<std::size_t>(v - 1);
}

inline DenseMatrix json_matrix(const nlohmann::json& j, std::size_t n, const std::string& field) {
    if (!j.is_array() || j.size() != n) throw parse_error(field, "expected " + std::to_string(n) + " rows");
    DenseMatrix m(n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::string rf = field + "[" + std::to_string(r + 1) + "]";
        if (!j[r].is_array() || j[r].size() != n) throw parse_error(rf, "expected " + std::to_string(n) + " entries");
        for (std::size_t c = 0; c < n; ++c)
            m(r, c) = json_number(j[r][c], field + "(" + std::to_string(r + 1) + "," + std::to_string(c + 1) + ")");
    }
    return m;
}

inline nlohmann::json matrix_json(const DenseMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (double v : m.row(r)) row.push_back(v);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace detail

inline ModelDocument parse_model_document(const nlohmann::json& j) {
    using detail::parse_error;
    if (!j.is_object()) throw parse_error("model", "expected a JSON object");
    ModelDocument doc;

    if (!j.contains("gamma")) throw parse_error("gamma", "missing");
    const auto& g = j["gamma"];
    if (!g.is_array() || g.empty()) throw parse_error("gamma", "expected a nonempty array");
    doc.n = g.size();
    if (j.contains("n")) {
        if (!j["n"].is_number_integer() || j["n"].get<long long>() != static_cast<long long>(doc.n))
            throw parse_error("n", "does not match the length of gamma");
    }
    const std::size_t n = doc.n;
    for (std::size_t i = 0; i < n; ++i) doc.gamma.push_back(detail::json_number(g[i], "gamma[" + std::to_string(i + 1) + "]"));

    if (!j.contains("A")) throw parse_error("A", "missing");
    doc.A = detail::json_matrix(j["A"], n, "A");

    doc.B.assign(n, DenseMatrix(n));
    if (j.contains("B")) {
        const auto& b = j["B"];
        if (b.is_string() && b.get<std::string>() == "zero") {
        } else {
            if (!b.is_array() || b.size() != n) throw parse_error("B", "expected " + std::to_string(n) + " matrices");
            for (std::size_t i = 0; i < n; ++i) {
                const std::string field = "B[" + std::to_string(i + 1) + "]";
                if (b[i].is_string()) {
                    if (b[i].get<std::string>() != "zero") throw parse_error(field, "only the string \"zero\" is allowed");
                    continue;
                }
                doc.B[i] = detail::json_matrix(b[i], n, field);
            }
        }
    }
    if (j.contains("beta1")) doc.beta1 = detail::json_number(j["beta1"], "beta1");
    if (j.contains("beta2")) doc.beta2 = detail::json_number(j["beta2"], "beta2");

    if (j.contains("orders")) {
        doc.has_orders = true;
        const auto& os = j["orders"];
        if (!os.is_array()) throw parse_error("orders", "expected an array");
        for (std::size_t o = 0; o < os.size(); ++o) {
            const std::string of = "orders[" + std::to_string(o + 1) + "]";
            const auto& oj = os[o];
            if (!oj.is_object() || !oj.contains("k") || !oj.contains("beta") || !oj.contains("hyperedges"))
                throw parse_error(of, "expected {k, beta, hyperedges}");
            if (!oj["k"].is_number_integer()) throw parse_error(of + ".k", "expected an integer");
            InteractionOrder ord;
            ord.k = oj["k"].get<int>();
            ord.beta = detail::json_number(oj["beta"], of + ".beta");
            const auto& hs = oj["hyperedges"];
            if (!hs.is_array()) throw parse_error(of + ".hyperedges", "expected an array");
            for (std::size_t e = 0; e < hs.size(); ++e) {
                const std::string ef = of + ".hyperedges[" + std::to_string(e + 1) + "]";
                const auto& h = hs[e];
                if (!h.is_array() || h.size() != 3 || !h[1].is_array())
                    throw parse_error(ef, "expected [i, [i1..ik], w]");
                Hyperedge edge;
                edge.target = detail::json_index(h[0], n, ef + ".target");
                for (std::size_t s = 0; s < h[1].size(); ++s)
                    edge.sources.push_back(detail::json_index(h[1][s], n, ef + ".sources[" + std::to_string(s + 1) + "]"));
                edge.weight = detail::json_number(h[2], ef + ".weight");
                ord.hyperedges.push_back(std::move(edge));
            }
            doc.orders.push_back(std::move(ord));
        }
    }
    return doc;
}

inline ModelDocument parse_model_document(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::ParseError, std::string("model: ") + e.what());
    }
    return parse_model_document(j);
}

// a literal would otherwise match both the text and the json overload
inline ModelDocument parse_model_document(const char* text) { return parse_model_document(std::string(text)); }

inline ModelDocument read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_model_document(ss.str());
}

/// Rates from the file unless overridden; both must end up present.
inline SimplicialSis to_simplicial(const ModelDocument& doc, std::optional<double> beta1 = {},
                                   std::optional<double> beta2 = {}) {
    if (doc.has_orders) throw Error(ErrorKind::ParseError, "orders: file describes a general higher-order model");
    SimplicialSisParams p;
    p.gamma = doc.gamma;
    p.A = doc.A;
    p.B = doc.B;
    const auto b1 = beta1 ? beta1 : doc.beta1;
    const auto b2 = beta2 ? beta2 : doc.beta2;
    if (!b1) throw Error(ErrorKind::ParseError, "beta1: missing");
    if (!b2) throw Error(ErrorKind::ParseError, "beta2: missing");
    p.beta1 = *b1;
    p.beta2 = *b2;
    return SimplicialSis::validate(std::move(p));
}

inline HigherOrderSis to_higher_order(const ModelDocument& doc, std::optional<double> beta1 = {},
                                      std::optional<double> beta2 = {}) {
    HigherOrderSisParams p;
    p.gamma = doc.gamma;
    p.A = doc.A;
    const auto b1 = beta1 ? beta1 : doc.beta1;
    if (!b1) throw Error(ErrorKind::ParseError, "beta1: missing");
    p.beta1 = *b1;
    p.orders = doc.orders;
    const bool any_b = std::any_of(doc.B.begin(), doc.B.end(), [](const DenseMatrix& m) { return !m.is_zero(); });
    if (any_b) {
        const auto b2 = beta2 ? beta2 : doc.beta2;
        if (!b2) throw Error(ErrorKind::ParseError, "beta2: missing for the B term");
        for (const auto& o : p.orders)
            if (o.k == 2) throw Error(ErrorKind::ParseError, "orders: k = 2 given twice (B and orders)");
        InteractionOrder two;
        two.k = 2;
        two.beta = *b2;
        for (std::size_t i = 0; i < doc.n; ++i)
            for (std::size_t j = 0; j < doc.n; ++j)
                for (std::size_t k = 0; k < doc.n; ++k)
                    if (doc.B[i](j, k) != 0.0) two.hyperedges.push_back({i, {j, k}, doc.B[i](j, k)});
        p.orders.push_back(std::move(two));
    }
    return HigherOrderSis::validate(std::move(p));
}

inline nlohmann::json to_json(const SimplicialSis& m) {
    nlohmann::json j;
    j["n"] = m.size();
    j["gamma"] = m.gamma();
    j["A"] = detail::matrix_json(m.A());
    nlohmann::json b = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) b.push_back(m.B(i).is_zero() ? nlohmann::json("zero") : detail::matrix_json(m.B(i)));
    j["B"] = std::move(b);
    j["beta1"] = m.beta1();
    j["beta2"] = m.beta2();
    return j;
}

inline nlohmann::json to_json(const HigherOrderSis& m) {
    nlohmann::json j;
    j["n"] = m.size();
    j["gamma"] = m.gamma();
    j["A"] = detail::matrix_json(m.A());
    j["beta1"] = m.beta1();
    nlohmann::json orders = nlohmann::json::array();
    for (const auto& o : m.orders()) {
        nlohmann::json hs = nlohmann::json::array();
        for (const auto& h : o.hyperedges) {
            nlohmann::json src = nlohmann::json::array();
            for (std::size_t s : h.sources) src.push_back(s + 1);
            hs.push_back(nlohmann::json::array({h.target + 1, std::move(src), h.weight}));
        }
        orders.push_back({{"k", o.k}, {"beta", o.beta}, {"hyperedges", std::move(hs)}});
    }
    j["orders"] = std::move(orders);
    return j;
}

namespace detail {

inline bool is_matrix_json(const nlohmann::json& j) {
    return j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), [](const nlohmann::json& r) {
        return r.is_array() && std::all_of(r.begin(), r.end(), [](const nlohmann::json& v) { return v.is_number(); });
    });
}

inline void dump_value(const nlohmann::json& j, std::ostream& os, const std::string& indent) {
    if (is_matrix_json(j)) {
        os << "[\n";
        for (std::size_t r = 0; r < j.size(); ++r) os << indent << "  " << j[r].dump() << (r + 1 < j.size() ? ",\n" : "\n");
        os << indent << ']';
    } else if (j.is_array() && std::any_of(j.begin(), j.end(), [](const nlohmann::json& v) { return v.is_array() || v.is_object(); })) {
        os << "[\n";
        for (std::size_t r = 0; r < j.size(); ++r) {
            os << indent << "  ";
            dump_value(j[r], os, indent + "  ");
            os << (r + 1 < j.size() ? ",\n" : "\n");
        }
        os << indent << ']';
    } else {
        os << j.dump();
    }
}

} // namespace detail

/// One key per line and one matrix row per line; keys in sorted order.
inline std::string dump_model_json(const nlohmann::json& j) {
    std::ostringstream os;
    os << "{\n";
    std::size_t k = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        os << "  " << nlohmann::json(it.key()).dump() << ": ";
        detail::dump_value(it.value(), os, "  ");
        os << (k + 1 < j.size() ? ",\n" : "\n");
    }
    os << "}\n";
    return os.str();
}

template <class Model>
void write_model_file(const Model& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path + " for writing");
    out << dump_model_json(to_json(m));
    if (!out) throw Error(ErrorKind::IoFailure, "write to " + path + " failed");
}

// ---------------------------------------------------------------------------
// random models

struct GeneratorOptions {
    std::size_t n = 5;
    double density = 0.5;
    std::uint64_t seed = 0;
    double gamma = 2.0;
    double beta1 = 0.1;
    double beta2 = 0.1;
};

namespace detail {

/// Adds the n-cycle 1 -> 2 -> ... -> n -> 1 when m is reducible.
inline void ensure_irreducible(DenseMatrix& m) {
    if (is_irreducible(m)) return;
    const std::size_t n = m.size();
    for (std::size_t i = 0; i < n; ++i) m(i, (i + 1) % n) = 1.0;
}

inline DenseMatrix random_binary(std::size_t n, double density, const CounterRng& rng) {
    DenseMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(i * n + j) < density ? 1.0 : 0.0;
    return m;
}

} // namespace detail

/// Binary A and B_i drawn entrywise with probability `density`, each made
/// irreducible by cycle insertion, Gamma = gamma I. Stream 0 feeds A and
/// stream i + 1 feeds B_i, so every matrix depends only on (seed, n, density).
inline SimplicialSis generate_random_model(const GeneratorOptions& opt) {
    if (opt.n < 2) throw Error(ErrorKind::InvalidShape, "n must be at least 2");
    if (!(opt.density >= 0.0 && opt.density <= 1.0))
        throw Error(ErrorKind::OutOfDomain, "density must lie in [0, 1]");
    const CounterRng root(opt.seed);
    SimplicialSisParams p;
    p.gamma.assign(opt.n, opt.gamma);
    p.A = detail::random_binary(opt.n, opt.density, root.split(0));
    detail::ensure_irreducible(p.A);
    for (std::size_t i = 0; i < opt.n; ++i) {
        DenseMatrix b = detail::random_binary(opt.n, opt.density, root.split(i + 1));
        detail::ensure_irreducible(b);
        p.B.push_back(std::move(b));
    }
    p.beta1 = opt.beta1;
    p.beta2 = opt.beta2;
    return SimplicialSis::validate(std::move(p));
}

} // namespace sis
