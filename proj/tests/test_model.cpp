#include "oracles.hpp"

#include <sis/model.hpp>

#include <gtest/gtest.h>

using namespace sis;

namespace {

SimplicialSisParams two_group_params() {
    SimplicialSisParams p;
    p.gamma = {1, 1};
    p.A = DenseMatrix{{0, 1}, {1, 0}};
    p.B = {DenseMatrix(2, 1.0), DenseMatrix(2, 1.0)};
    p.beta1 = 0.5;
    p.beta2 = 1.0;
    return p;
}

template <class Fn>
Error catch_error(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e;
    }
    ADD_FAILURE() << "no error thrown";
    return Error(ErrorKind::IoFailure, "none");
}

} // namespace

TEST(Validate, TwoGroupExample) {
    const auto m = SimplicialSis::validate(two_group_params());
    EXPECT_EQ(m.eta(), (std::vector<int>{1, 1}));
    EXPECT_TRUE(m.has_higher_order());
}

TEST(Validate, ReducibleContactsRejected) {
    auto p = two_group_params();
    p.A = DenseMatrix{{1, 0}, {1, 1}};
    EXPECT_EQ(catch_error([&] { validate(p); }).kind(), ErrorKind::NotIrreducible);
}

TEST(Validate, EtaMarksNonzeroB) {
    auto p = two_group_params();
    p.B[1] = DenseMatrix(2);
    EXPECT_EQ(validate(p).eta(), (std::vector<int>{1, 0}));
    p.B[0] = DenseMatrix(2);
    EXPECT_FALSE(validate(p).has_higher_order());
}

TEST(Validate, ErrorsNameTheField) {
    auto p = two_group_params();
    p.gamma[0] = -1;
    Error e = catch_error([&] { validate(p); });
    EXPECT_EQ(e.kind(), ErrorKind::NonpositiveRate);
    EXPECT_NE(std::string(e.what()).find("gamma[1]"), std::string::npos);

    p = two_group_params();
    p.A(0, 1) = -0.5;
    e = catch_error([&] { validate(p); });
    EXPECT_EQ(e.kind(), ErrorKind::NegativeEntry);
    EXPECT_NE(std::string(e.what()).find("A(1,2)"), std::string::npos);

    p = two_group_params();
    p.B[1](0, 1) = -2;
    e = catch_error([&] { validate(p); });
    EXPECT_EQ(e.kind(), ErrorKind::NegativeEntry);
    EXPECT_NE(std::string(e.what()).find("B[2](1,2)"), std::string::npos);

    p = two_group_params();
    p.beta2 = 0;
    e = catch_error([&] { validate(p); });
    EXPECT_EQ(e.kind(), ErrorKind::NonpositiveRate);
    EXPECT_NE(std::string(e.what()).find("beta2"), std::string::npos);

    p = two_group_params();
    p.B.pop_back();
    EXPECT_EQ(catch_error([&] { validate(p); }).kind(), ErrorKind::InvalidShape);
}

TEST(VectorField, Examples) {
    oracle::Rng r(1);
    const auto m = oracle::random_model(r, 4);
    for (double v : vector_field(m, Vector(4, 0.0))) EXPECT_EQ(v, 0.0);
    const Vector f1 = vector_field(m, Vector(4, 1.0));
    for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(f1[i], -m.gamma(i));

    const auto one = oracle::one_group(1, 1, 1, 0.5, 4);
    EXPECT_LT(std::abs(vector_field(one, Vector{0.6952})[0]), 1e-3);
}

TEST(VectorField, MatchesNaiveTripleLoop) {
    oracle::Rng r(2);
    for (int t = 0; t < 200; ++t) {
        const auto m = oracle::random_model(r, 1 + r.index(6));
        const Vector x = oracle::random_state(r, m.size());
        const Vector f = vector_field(m, x), g = oracle::field(m, x);
        for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(f[i], g[i], 1e-13);
    }
}

TEST(VectorField, OutOfDomain) {
    const auto m = SimplicialSis::validate(two_group_params());
    const Error e = catch_error([&] { vector_field(m, Vector{0.5, 1.1}); });
    EXPECT_EQ(e.kind(), ErrorKind::OutOfDomain);
    EXPECT_NE(std::string(e.what()).find("x[2]"), std::string::npos);
    // tiny excursions are clamped and counted
    const std::size_t before = clamp_counter().load();
    const Vector f = vector_field(m, Vector{-1e-12, 1 + 1e-12});
    EXPECT_EQ(clamp_counter().load(), before + 2);
    EXPECT_EQ(f, vector_field(m, Vector{0, 1}));
}

TEST(VectorField, BoundaryBehaviour) {
    oracle::Rng r(3);
    for (int t = 0; t < 300; ++t) {
        const auto m = oracle::random_model(r, 2 + r.index(5));
        Vector x = oracle::random_state(r, m.size());
        const std::size_t i = r.index(m.size());
        x[i] = 0.0;
        EXPECT_GE(vector_field(m, x)[i], 0.0);
        x[i] = 1.0;
        EXPECT_LT(vector_field(m, x)[i], 0.0);
    }
}

TEST(VectorField, ClassicalReductionWithoutB) {
    oracle::Rng r(4);
    for (int t = 0; t < 100; ++t) {
        const auto m = oracle::random_model(r, 1 + r.index(6), false);
        const Vector x = oracle::random_state(r, m.size());
        const Vector f = vector_field(m, x);
        for (std::size_t i = 0; i < m.size(); ++i) {
            double ax = 0;
            for (std::size_t j = 0; j < m.size(); ++j) ax += m.A()(i, j) * x[j];
            EXPECT_NEAR(f[i], -m.gamma(i) * x[i] + m.beta1() * (1 - x[i]) * ax, 1e-14);
        }
    }
}

TEST(Jacobian, AtOriginIsLinearisation) {
    oracle::Rng r(5);
    const auto m = oracle::random_model(r, 4);
    const DenseMatrix j = jacobian(m, Vector(4, 0.0));
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            EXPECT_NEAR(j(a, b), (a == b ? -m.gamma(a) : 0.0) + m.beta1() * m.A()(a, b), 1e-15);
}

TEST(Jacobian, WithoutBMatchesClassicalFormula) {
    oracle::Rng r(6);
    const auto m = oracle::random_model(r, 5, false);
    const Vector x = oracle::random_state(r, 5);
    const DenseMatrix j = jacobian(m, x);
    const Vector ax = m.A() * x;
    for (std::size_t a = 0; a < 5; ++a)
        for (std::size_t b = 0; b < 5; ++b) {
            double expected = m.beta1() * (1 - x[a]) * m.A()(a, b);
            if (a == b) expected += -m.gamma(a) - m.beta1() * ax[a];
            EXPECT_NEAR(j(a, b), expected, 1e-14);
        }
}

TEST(Jacobian, MatchesFiniteDifferences) {
    oracle::Rng r(7);
    for (int t = 0; t < 100; ++t) {
        const auto m = oracle::random_model(r, 1 + r.index(6));
        const Vector x = oracle::random_state(r, m.size(), 0.01, 0.99);
        const DenseMatrix fd = oracle::fd_jacobian([&](const Vector& y) { return oracle::field(m, y); }, x);
        const DenseMatrix j = jacobian(m, x);
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = 0; b < m.size(); ++b) EXPECT_NEAR(j(a, b), fd(a, b), 1e-6);
    }
}

TEST(Jacobian, IsMetzlerOnTheBox) {
    oracle::Rng r(8);
    for (int t = 0; t < 300; ++t) {
        const auto m = oracle::random_model(r, 1 + r.index(6));
        Vector x = oracle::random_state(r, m.size());
        if (r.coin(0.3)) x[r.index(m.size())] = r.coin(0.5) ? 0.0 : 1.0;
        EXPECT_TRUE(is_metzler(jacobian(m, x)));
    }
}

TEST(Decomposition, IdentityOnRandomPairs) {
    oracle::Rng r(9);
    for (bool with_b : {false, true})
        for (int t = 0; t < 200; ++t) {
            const auto m = oracle::random_model(r, 1 + r.index(6), with_b);
            const Vector x = oracle::random_state(r, m.size()), xs = oracle::random_state(r, m.size());
            const DenseMatrix d = decomposition_D(m, x, xs);
            Vector diff(m.size());
            for (std::size_t i = 0; i < m.size(); ++i) diff[i] = x[i] - xs[i];
            const Vector lhs = d * diff;
            const Vector fx = oracle::field(m, x), fxs = oracle::field(m, xs);
            for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(lhs[i], fx[i] - fxs[i], 1e-12);
        }
}

TEST(Decomposition, CoincidentPointsGiveJacobian) {
    oracle::Rng r(10);
    const auto m = oracle::random_model(r, 4);
    const Vector x = oracle::random_state(r, 4);
    const DenseMatrix d = decomposition_D(m, x, x), j = jacobian(m, x);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) EXPECT_NEAR(d(a, b), j(a, b), 1e-13);
    const Vector zero = d * Vector(4, 0.0);
    for (double v : zero) EXPECT_EQ(v, 0.0);
}

TEST(Scalar, FieldExamples) {
    const ScalarSis s{1.0, 0.5, 4.0};
    EXPECT_EQ(scalar_vector_field(s, 0.0), 0.0);
    EXPECT_EQ(scalar_vector_field(s, 1.0), -1.0);
    EXPECT_LT(std::abs(scalar_vector_field(s, 0.1798)), 1e-3);
    const auto roots = oracle::scalar_cubic_roots(1.0, 0.5, 4.0);
    ASSERT_EQ(roots.size(), 2u);
    for (double y : roots) EXPECT_NEAR(scalar_vector_field(s, y), 0.0, 1e-12);
    EXPECT_THROW(scalar_vector_field(s, 1.5), Error);
    EXPECT_THROW(validate(ScalarSis{0.0, 1.0, 1.0}), Error);
}

TEST(Scalar, AgreesWithOneGroupSimplicial) {
    const ScalarSis s{1.3, 0.7, 2.5};
    const auto m = oracle::one_group(1.3, 1, 1, 0.7, 2.5);
    for (double y : {0.0, 0.1, 0.37, 0.8, 1.0}) EXPECT_DOUBLE_EQ(scalar_vector_field(s, y), vector_field(m, Vector{y})[0]);
}

// ---------------------------------------------------------------------------

TEST(HigherOrder, Order2MirrorIsExact) {
    oracle::Rng r(11);
    for (int t = 0; t < 200; ++t) {
        const auto m = oracle::random_model(r, 2 + r.index(5));
        const auto h = as_higher_order(m);
        const Vector x = oracle::random_state(r, m.size());
        EXPECT_EQ(vector_field_higher(h, x), vector_field(m, x)) << "trial " << t;
    }
}

TEST(HigherOrder, OriginAndSingleHyperedge) {
    HigherOrderSisParams p;
    p.gamma = {1, 1, 1, 1};
    p.A = DenseMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    p.beta1 = 0.3;
    p.orders = {InteractionOrder{3, 0.7, {Hyperedge{0, {1, 2, 3}, 2.5}}}};
    const auto h = HigherOrderSis::validate(p);
    for (double v : vector_field_higher(h, Vector(4, 0.0))) EXPECT_EQ(v, 0.0);
    // x = (0,1,1,1): f_1 = beta1 (A x)_1 + beta3 w, and the pairwise term is beta1 * 1
    const Vector f = vector_field_higher(h, Vector{0, 1, 1, 1});
    EXPECT_NEAR(f[0] - 0.3 * 1.0, 0.7 * 2.5, 1e-15);
    EXPECT_EQ(h.b_star_indicator(), (std::vector<int>{1, 0, 0, 0}));
    EXPECT_NEAR(h.b_star()[0], 0.7 * 2.5, 1e-15);
}

TEST(HigherOrder, PureHyperedgeTermWithoutPairwiseContribution) {
    // same hyperedge but the pairwise neighbour of node 1 is infection-free
    HigherOrderSisParams p;
    p.gamma = {1, 1, 1, 1};
    p.A = DenseMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    p.beta1 = 0.3;
    p.orders = {InteractionOrder{3, 0.7, {Hyperedge{0, {1, 2, 3}, 2.5}}}};
    const auto h = HigherOrderSis::validate(p);
    const auto hz = HigherOrderSis::validate([&] {
        auto q = p;
        q.orders.clear();
        return q;
    }());
    const Vector x{0, 1, 1, 1};
    EXPECT_NEAR(vector_field_higher(h, x)[0] - vector_field_higher(hz, x)[0], 0.7 * 2.5, 1e-15);
}

TEST(HigherOrder, ValidationErrors) {
    HigherOrderSisParams p;
    p.gamma = {1, 1, 1, 1};
    p.A = DenseMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    p.beta1 = 0.3;
    p.orders = {InteractionOrder{4, 1.0, {}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::InvalidShape);
    p.orders = {InteractionOrder{3, 1.0, {Hyperedge{0, {1, 2, 3}, -1}}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::NegativeEntry);
    p.orders = {InteractionOrder{3, 0.0, {}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::NonpositiveRate);
    p.orders = {InteractionOrder{3, 1.0, {Hyperedge{0, {1, 2}, 1}}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::InvalidShape);
    p.orders = {InteractionOrder{3, 1.0, {Hyperedge{4, {1, 2, 3}, 1}}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::InvalidShape);
    p.orders = {InteractionOrder{3, 1.0, {}}, InteractionOrder{3, 2.0, {}}};
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::InvalidShape);
    p.orders = {};
    p.A = DenseMatrix(4);
    EXPECT_EQ(catch_error([&] { HigherOrderSis::validate(p); }).kind(), ErrorKind::NotIrreducible);
}

TEST(HigherOrder, GeneralOrderMatchesDirectSum) {
    oracle::Rng r(12);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 4 + r.index(3);
        HigherOrderSisParams p;
        for (std::size_t i = 0; i < n; ++i) p.gamma.push_back(r.uniform(0.5, 2));
        p.A = oracle::random_irreducible(r, n);
        p.beta1 = r.uniform(0.1, 1);
        for (int k = 2; k <= static_cast<int>(n) - 1; ++k) {
            InteractionOrder o{k, r.uniform(0.1, 2), {}};
            for (int e = 0; e < 6; ++e) {
                Hyperedge h{r.index(n), {}, r.uniform()};
                for (int s = 0; s < k; ++s) h.sources.push_back(r.index(n));
                o.hyperedges.push_back(h);
            }
            p.orders.push_back(o);
        }
        const auto m = HigherOrderSis::validate(p);
        const Vector x = oracle::random_state(r, n);
        const Vector f = vector_field_higher(m, x);
        for (std::size_t i = 0; i < n; ++i) {
            double pair = 0, hi = 0;
            for (std::size_t j = 0; j < n; ++j) pair += p.A(i, j) * x[j];
            for (const auto& o : p.orders)
                for (const auto& h : o.hyperedges)
                    if (h.target == i) {
                        double prod = o.beta * h.weight;
                        for (auto s : h.sources) prod *= x[s];
                        hi += prod;
                    }
            EXPECT_NEAR(f[i], -p.gamma[i] * x[i] + p.beta1 * (1 - x[i]) * pair + (1 - x[i]) * hi, 1e-13);
        }
    }
}
