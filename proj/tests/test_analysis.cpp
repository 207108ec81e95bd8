#include "oracles.hpp"

#include <sis/analysis.hpp>

#include <gtest/gtest.h>

using namespace sis;

namespace {

// independent evaluation of the three sufficient conditions
struct Conditions {
    bool disease_free, bistable, endemic;
};

Conditions conditions(const SimplicialSis& m) {
    const std::size_t n = m.size();
    DenseMatrix ga(n), df(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            ga(i, k) = m.A()(i, k) / m.gamma(i);
            double col = 0;
            for (std::size_t j = 0; j < n; ++j) col += m.B(i)(j, k);
            df(i, k) = (m.beta1() * m.A()(i, k) + m.beta2() * col) / m.gamma(i);
        }
    const double r0 = m.beta1() * oracle::spectral_radius(ga);
    Conditions c{oracle::spectral_radius(df) < 1, false, r0 > 1};
    double best = 1e300;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (m.B(i).is_zero()) continue;
        any = true;
        double aeta = 0, quad = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const double ej = m.B(j).is_zero() ? 0 : 1;
            aeta += m.A()(i, j) * ej;
            for (std::size_t k = 0; k < n; ++k) quad += m.B(i)(j, k) * ej * (m.B(k).is_zero() ? 0 : 1);
        }
        best = std::min(best, m.beta1() / m.gamma(i) * aeta + m.beta2() / (2 * m.gamma(i)) * quad);
    }
    c.bistable = any && r0 < 1 && best >= 2;
    return c;
}

SimplicialSis symmetrised(const SimplicialSis& m) {
    SimplicialSisParams p = m.params();
    for (auto& b : p.B) {
        const DenseMatrix t = b.transposed();
        b += t;
        b *= 0.5;
    }
    return SimplicialSis::validate(p);
}

} // namespace

TEST(ClassifyTheory, TwoGroupExamples) {
    const auto df = classify_theory(oracle::two_group(0.1, 0.05));
    EXPECT_EQ(df.domain, Domain::DiseaseFree);
    EXPECT_NEAR(df.disease_free_lhs, 0.3, 1e-12);
    EXPECT_NEAR(df.disease_free_lhs, oracle::eig2(0.1, 0.2, 0.2, 0.1).second, 1e-12);
    EXPECT_NEAR(df.reproduction_number, 0.1, 1e-12);

    const auto bi = classify_theory(oracle::two_group(0.5, 1.0));
    EXPECT_EQ(bi.domain, Domain::Bistable);
    ASSERT_TRUE(bi.bistable_margin);
    EXPECT_NEAR(*bi.bistable_margin, 0.5, 1e-12);
}

TEST(ClassifyTheory, EndemicAboveThreshold) {
    oracle::Rng r(1);
    for (int t = 0; t < 50; ++t) {
        const auto base = oracle::random_model(r, 1 + r.index(6));
        const double rho = contact_spectral_radius(base);
        const auto m = base.with_rates(1.5 / rho, base.beta2());
        const auto c = classify_theory(m);
        EXPECT_EQ(c.domain, Domain::Endemic);
        EXPECT_NEAR(c.reproduction_number, 1.5, 1e-9);
    }
}

TEST(ClassifyTheory, DomainNamesAreStable) {
    EXPECT_EQ(to_string(Domain::DiseaseFree), "disease-free");
    EXPECT_EQ(to_string(Domain::Bistable), "bistable");
    EXPECT_EQ(to_string(Domain::Endemic), "endemic");
    EXPECT_EQ(to_string(Domain::Indeterminate), "indeterminate");
}

TEST(ClassifyTheory, WithoutBBelowThresholdIsDiseaseFree) {
    oracle::Rng r(2);
    for (int t = 0; t < 100; ++t) {
        const auto base = oracle::random_model(r, 1 + r.index(6), false);
        const double rho = contact_spectral_radius(base);
        const auto m = base.with_rates(r.uniform(0.05, 0.99) / rho, base.beta2());
        const auto c = classify_theory(m);
        EXPECT_EQ(c.domain, Domain::DiseaseFree);
        EXPECT_FALSE(c.bistable_margin);
        EXPECT_NEAR(c.disease_free_lhs, c.reproduction_number, 1e-9);
    }
}

TEST(ClassifyTheory, MatchesIndependentConditionsAndExclusivity) {
    oracle::Rng r(3);
    int seen[4] = {0, 0, 0, 0};
    for (int t = 0; t < 400; ++t) {
        const auto base = oracle::random_model(r, 1 + r.index(6));
        const double rho = contact_spectral_radius(base);
        const auto m = base.with_rates(r.uniform(0.05, 1.6) / rho, r.uniform(0.01, 4.0));
        const Conditions k = conditions(m);
        EXPECT_LE(int(k.disease_free) + int(k.bistable) + int(k.endemic), 1) << "trial " << t;
        const auto c = classify_theory(m);
        ++seen[static_cast<int>(c.domain)];
        const Domain expected = k.endemic        ? Domain::Endemic
                                : k.disease_free ? Domain::DiseaseFree
                                : k.bistable     ? Domain::Bistable
                                                 : Domain::Indeterminate;
        EXPECT_EQ(c.domain, expected) << "trial " << t;
        // invariants of the classification record
        EXPECT_EQ(c.domain == Domain::Endemic, c.reproduction_number > 1);
        if (c.domain == Domain::DiseaseFree) {
            EXPECT_LT(c.disease_free_lhs, 1);
        }
        if (c.domain == Domain::Bistable) {
            EXPECT_LT(c.reproduction_number, 1);
            EXPECT_GE(*c.bistable_margin, 0);
        }
    }
    for (int d = 0; d < 4; ++d) EXPECT_GT(seen[d], 0) << "domain " << d << " never sampled";
}

// ---------------------------------------------------------------------------

TEST(ClassifyHigher, Order2MirrorWithThreeGroupsAgrees) {
    oracle::Rng r(4);
    for (int t = 0; t < 200; ++t) {
        const auto base = symmetrised(oracle::random_model(r, 3));
        const double rho = contact_spectral_radius(base);
        const auto m = base.with_rates(r.uniform(0.05, 1.5) / rho, r.uniform(0.05, 4));
        const auto a = classify_theory(m);
        const auto b = classify_theory_higher(as_higher_order(m));
        EXPECT_EQ(a.domain, b.domain) << "trial " << t;
        EXPECT_NEAR(a.reproduction_number, b.reproduction_number, 1e-12);
        EXPECT_NEAR(a.disease_free_lhs, b.disease_free_lhs, 1e-9);
        ASSERT_EQ(bool(a.bistable_margin), bool(b.bistable_margin));
        if (a.bistable_margin) {
            EXPECT_NEAR(*a.bistable_margin, *b.bistable_margin, 1e-12);
        }
    }
}

TEST(ClassifyHigher, ZeroWeightsLeaveOnlyReproductionNumber) {
    HigherOrderSisParams p;
    p.gamma = {1, 1, 1, 1};
    p.A = DenseMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
    p.orders = {InteractionOrder{3, 2.0, {Hyperedge{0, {1, 2, 3}, 0.0}, Hyperedge{2, {0, 1, 3}, 0.0}}}};
    for (double b1 : {0.5, 1.5}) {
        p.beta1 = b1;
        const auto c = classify_theory_higher(HigherOrderSis::validate(p));
        EXPECT_FALSE(c.bistable_margin);
        EXPECT_EQ(c.domain, b1 < 1 ? Domain::DiseaseFree : Domain::Endemic);
    }
}

TEST(ClassifyHigher, FourGroupOrderThreeMargin) {
    // one order-3 hyperedge per node over the other three, Gamma = I, A a 4-cycle
    for (double w : {0.5, 1.0, 2.0}) {
        for (double b3 : {1.0, 4.0, 8.0}) {
            const double b1 = 0.4;
            HigherOrderSisParams p;
            p.gamma = {1, 1, 1, 1};
            p.A = DenseMatrix{{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}};
            p.beta1 = b1;
            InteractionOrder o{3, b3, {}};
            for (std::size_t i = 0; i < 4; ++i) {
                Hyperedge h{i, {}, w};
                for (std::size_t j = 0; j < 4; ++j)
                    if (j != i) h.sources.push_back(j);
                o.hyperedges.push_back(h);
            }
            p.orders = {o};
            const auto c = classify_theory_higher(HigherOrderSis::validate(p));
            // every node: b1 * 1 + b3 * (2/3)^2 * w, threshold 3
            const double expected = b1 * 1.0 + b3 * (4.0 / 9.0) * w - 3.0;
            ASSERT_TRUE(c.bistable_margin);
            EXPECT_NEAR(*c.bistable_margin, expected, 1e-12);
            // Bhat_3(i, j) = w for the first source j of the hyperedge targeting i
            DenseMatrix df(4);
            for (std::size_t i = 0; i < 4; ++i) {
                df(i, (i + 1) % 4) += b1;
                df(i, i == 0 ? 1 : 0) += b3 * w;
            }
            EXPECT_NEAR(c.disease_free_lhs, oracle::spectral_radius(df), 1e-9);
            EXPECT_EQ(c.domain, oracle::spectral_radius(df) < 1 ? Domain::DiseaseFree
                                : expected >= 0                  ? Domain::Bistable
                                                                 : Domain::Indeterminate);
        }
    }
}

// ---------------------------------------------------------------------------

TEST(Scalar, BistableExample) {
    const auto d = scalar_classify(ScalarSis{1.0, 0.5, 4.0});
    EXPECT_EQ(d.domain, Domain::Bistable);
    EXPECT_NEAR(d.v_c, 0.0, 1e-15);
    const auto roots = oracle::scalar_cubic_roots(1.0, 0.5, 4.0);
    ASSERT_EQ(roots.size(), 2u);
    ASSERT_TRUE(d.nu_minus && d.nu_plus);
    EXPECT_NEAR(*d.nu_minus, roots[0], 1e-10);
    EXPECT_NEAR(*d.nu_plus, roots[1], 1e-10);
    EXPECT_NEAR(*d.nu_minus, 0.1798, 1e-4);
    EXPECT_NEAR(*d.nu_plus, 0.6952, 1e-4);
}

TEST(Scalar, OtherExamples) {
    EXPECT_EQ(scalar_classify(ScalarSis{1.0, 2.0, 0.01}).domain, Domain::Endemic);
    EXPECT_EQ(scalar_classify(ScalarSis{1.0, 0.5, 0.5}).domain, Domain::DiseaseFree);
    // r2 > 1 and r1 < v_c: v_c(1.44) = 2.4 - 1.44 = 0.96
    EXPECT_EQ(scalar_classify(ScalarSis{1.0, 0.9, 1.44}).domain, Domain::DiseaseFree);
    // equalities are never certified
    EXPECT_EQ(scalar_classify(ScalarSis{1.0, 1.0, 4.0}).domain, Domain::Indeterminate);
    EXPECT_EQ(scalar_classify(ScalarSis{1.0, 0.96, 1.44}).domain, Domain::Indeterminate);
}

TEST(Scalar, RootsMatchCubicOracleAndAreOrdered) {
    oracle::Rng r(5);
    for (int t = 0; t < 300; ++t) {
        const double g = r.uniform(0.5, 2), b1 = r.uniform(0.01, 2.5) * g, b2 = r.uniform(0.01, 8) * g;
        const auto d = scalar_classify(ScalarSis{g, b1, b2});
        const auto roots = oracle::scalar_cubic_roots(g, b1, b2);
        std::vector<double> got;
        if (d.nu_minus) got.push_back(*d.nu_minus);
        if (d.nu_plus) got.push_back(*d.nu_plus);
        if (d.nu_minus && d.nu_plus) {
            EXPECT_LE(*d.nu_minus, *d.nu_plus);
        }
        for (double v : got) {
            EXPECT_GT(v, 0);
            EXPECT_LE(v, 1);
        }
        // the oracle scan only sees sign changes, so tangential double roots may be missed
        if (got.size() == roots.size()) {
            for (std::size_t k = 0; k < got.size(); ++k) EXPECT_NEAR(got[k], roots[k], 1e-10) << g << ' ' << b1 << ' ' << b2;
        }
        if (d.domain == Domain::Bistable) {
            ASSERT_TRUE(d.nu_minus && d.nu_plus);
            ASSERT_EQ(roots.size(), 2u);
        }
    }
}

// ---------------------------------------------------------------------------

TEST(Beta2Threshold, TwoGroupExample) {
    const auto m = oracle::two_group(0.5, 1.0);
    const auto hat = beta2_bistable_threshold(m);
    ASSERT_TRUE(hat);
    EXPECT_NEAR(*hat, 0.75, 1e-15);
    EXPECT_EQ(classify_theory(m.with_rates(0.5, 0.75)).domain, Domain::Bistable);
    EXPECT_NE(classify_theory(m.with_rates(0.5, 0.74)).domain, Domain::Bistable);
}

TEST(Beta2Threshold, HandComputedCase) {
    SimplicialSisParams p;
    p.gamma = {1, 2};
    p.A = DenseMatrix{{0, 1}, {1.5, 0}};
    p.B = {DenseMatrix{{1, 2}, {0, 1}}, DenseMatrix(2, 0.5)};
    p.beta1 = p.beta2 = 0.5;
    // rho(Gamma^-1 A) = sqrt(0.75); eta = (1,1)
    // node 1: 2 * 1 * (2 - 0.5 * 1) / 4 = 0.75; node 2: 2 * 2 * (2 - 0.25 * 1.5) / 2 = 3.25
    const auto hat = beta2_bistable_threshold(validate(p));
    ASSERT_TRUE(hat);
    EXPECT_NEAR(*hat, 3.25, 1e-15);
}

TEST(Beta2Threshold, PositiveWheneverDefined) {
    // the bracket is clamped at zero, but beta1 rho(Gamma^-1 A) < 1 keeps it
    // positive: beta1 / gamma_i (A eta)_i >= 2 on supp(eta) would force the
    // principal block of Gamma^-1 A on supp(eta) to have radius >= 2 / beta1
    oracle::Rng r(8);
    for (int t = 0; t < 300; ++t) {
        const auto m = oracle::random_model(r, 1 + r.index(6));
        const double b1 = r.uniform(0.0, 0.999) / contact_spectral_radius(m);
        if (const auto hat = beta2_bistable_threshold(m, b1)) {
            EXPECT_GT(*hat, 0.0);
        }
    }
}

TEST(Beta2Threshold, AbsentCases) {
    SimplicialSisParams p;
    p.gamma = {1, 1};
    p.A = DenseMatrix{{0, 1}, {1, 0}};
    p.beta1 = 0.5;
    p.beta2 = 1;
    // B_1 nonzero only on the coordinate outside supp(eta): eta^T B_1 eta = 0
    p.B = {DenseMatrix{{0, 0}, {0, 1}}, DenseMatrix(2)};
    EXPECT_FALSE(beta2_bistable_threshold(validate(p)));
    p.B = {DenseMatrix(2), DenseMatrix(2)};
    EXPECT_FALSE(beta2_bistable_threshold(validate(p)));
}

TEST(Beta2Threshold, PreconditionViolated) {
    try {
        beta2_bistable_threshold(oracle::two_group(1.0, 1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
    }
}

TEST(Beta2Threshold, BracketsTheBistableCondition) {
    oracle::Rng r(6);
    int checked = 0;
    for (int t = 0; t < 300; ++t) {
        const auto base = oracle::random_model(r, 1 + r.index(6), true, 0.7);
        const double rho = contact_spectral_radius(base);
        const double b1 = r.uniform(0.05, 0.95) / rho;
        const auto hat = beta2_bistable_threshold(base, b1);
        if (!hat || *hat <= 0) continue;
        ++checked;
        EXPECT_EQ(classify_theory(base.with_rates(b1, *hat * (1 + 1e-9))).domain, Domain::Bistable);
        EXPECT_GE(*bistable_margin(base, b1, *hat * (1 + 1e-9)), 0.0);
        EXPECT_NE(classify_theory(base.with_rates(b1, *hat * (1 - 1e-6))).domain, Domain::Bistable);
    }
    EXPECT_GT(checked, 50);
}

// ---------------------------------------------------------------------------

TEST(DiseaseFreeBoundary, ZeroAtTheClassicalThreshold) {
    const auto m = oracle::two_group(0.5, 1.0);
    const auto b = disease_free_boundary_beta2(m, 1.0);
    ASSERT_TRUE(b);
    EXPECT_EQ(*b, 0.0);
}

TEST(DiseaseFreeBoundary, TwoGroupExample) {
    const auto m = oracle::two_group(0.1, 1.0);
    const auto b = disease_free_boundary_beta2(m, 0.1);
    ASSERT_TRUE(b);
    // [[2b, 0.1 + 2b], [0.1 + 2b, 2b]] has radius 4b + 0.1
    EXPECT_NEAR(*b, 0.225, 1e-9);
    const auto c = classify_theory(m.with_rates(0.1, *b));
    EXPECT_NEAR(c.disease_free_lhs, 1.0, 1e-9);
    const DenseMatrix at{{2 * *b, 0.1 + 2 * *b}, {0.1 + 2 * *b, 2 * *b}};
    EXPECT_NEAR(oracle::spectral_radius(at), 1.0, 1e-9);
}

TEST(DiseaseFreeBoundary, NonincreasingInBeta1AndSelfConsistent) {
    oracle::Rng r(7);
    for (int t = 0; t < 30; ++t) {
        const auto m = oracle::random_model(r, 2 + r.index(5));
        const double rho = contact_spectral_radius(m);
        double prev = std::numeric_limits<double>::infinity();
        for (int k = 1; k < 20; ++k) {
            const double b1 = k / 20.0 / rho;
            const auto b = disease_free_boundary_beta2(m, b1);
            if (!b) break;
            EXPECT_LE(*b, prev + 1e-9);
            prev = *b;
            EXPECT_NEAR(classify_theory(m.with_rates(b1, std::max(*b, 1e-300))).disease_free_lhs, 1.0, 1e-9);
        }
    }
}

TEST(DiseaseFreeBoundary, ErrorsAndAbsence) {
    try {
        disease_free_boundary_beta2(oracle::two_group(0.5, 1.0), 1.5);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
    }
    SimplicialSisParams p;
    p.gamma = {1, 1};
    p.A = DenseMatrix{{0, 1}, {1, 0}};
    p.B = {DenseMatrix(2), DenseMatrix(2)};
    p.beta1 = p.beta2 = 0.5;
    EXPECT_FALSE(disease_free_boundary_beta2(validate(p), 0.5));
}
