#include <cmath>

#include <gtest/gtest.h>

#include "ssf/errors.hpp"
#include "ssf/krein.hpp"
#include "ssf/model.hpp"

using ssf::cplx;

TEST(Perturbation, RejectsNonOrthonormal) {
    EXPECT_THROW(ssf::FiniteRankPerturbation({{1.0, 1.0, 1.0}}), std::invalid_argument);
    EXPECT_THROW(ssf::FiniteRankPerturbation({{1.0, 1.0, 0.0}, {2.0, 1.0, 0.0}}), std::invalid_argument);
    EXPECT_THROW(ssf::FiniteRankPerturbation({{1.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}}),
                 std::invalid_argument);
    EXPECT_NO_THROW(ssf::FiniteRankPerturbation({{1.0, 1.0, 0.0}, {-3.0, 0.0, 1.0}}));
}

TEST(Perturbation, VaReconstructsCompression) {
    for (double a : {-1.0, 0.0, 1.0, 2.5}) {
        const auto p = ssf::make_v_a(a);
        EXPECT_LE((p.reduced() - ssf::reduced_matrix(a)).cwiseAbs().maxCoeff(), 1e-14) << "a = " << a;
    }
}

TEST(Perturbation, V1IsRankOne) {
    const auto p = ssf::make_v_a(1.0);
    ASSERT_EQ(p.rank(), 1);
    EXPECT_NEAR(p.terms()[0].mu, 2.0, 1e-15);
    EXPECT_NEAR(std::abs(p.terms()[0].c), std::sqrt(0.5), 1e-15);
    EXPECT_NEAR(p.terms()[0].c, p.terms()[0].d, 1e-15);
    EXPECT_NEAR(p.trace_norm(), 2.0, 1e-15);
}

TEST(Perturbation, VMinus1IsRankTwo) {
    const auto p = ssf::make_v_a(-1.0);
    ASSERT_EQ(p.rank(), 2);
    auto mu = p.eigenvalues();
    std::sort(mu.begin(), mu.end());
    EXPECT_NEAR(mu(0), -std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(mu(1), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(p.trace_norm(), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Gram, ClosedForm) {
    const ssf::BaseOperator h0{-1.0};
    const auto p = ssf::make_v_a(1.0);
    const cplx z(0.0, 1.0);
    const cplx f = ssf::gaussian_borel(z);
    const auto g = ssf::resolvent_gram(h0, p, z);
    EXPECT_LE(std::abs(g(0, 0) - 0.5 * (f + 1.0 / (-1.0 - z))), 1e-15);
}

TEST(Gram, PoleWindowAndDomain) {
    const ssf::BaseOperator h0{-1.0};
    const auto p = ssf::make_v_a(1.0);
    EXPECT_THROW(ssf::resolvent_gram(h0, p, {-1.005, 0.0}), ssf::PoleError);
    EXPECT_NO_THROW(ssf::resolvent_gram(h0, p, {-1.005, 1e-3}));
    EXPECT_THROW(ssf::resolvent_gram(h0, p, {0.0, -1.0}), ssf::DomainError);
}

TEST(Determinant, SpecValueAtI) {
    const cplx d = ssf::pert_det(ssf::BaseOperator{-1.0}, ssf::make_v_a(1.0), 1.0, {0.0, 1.0});
    EXPECT_NEAR(d.real(), 0.5, 1e-12);
    EXPECT_NEAR(d.imag(), 1.257872156141312, 1e-12);
}

TEST(Determinant, DiagonalPairIsRational) {
    const auto p = ssf::make_diag_pert();
    for (double l : {-3.0, 0.0, 0.5, 4.0}) {
        const cplx d = ssf::pert_det(ssf::BaseOperator{-1.0}, p, 1.0, {l, 0.0});
        EXPECT_NEAR(d.real(), (1.0 - l) / (-1.0 - l), 1e-14);
        EXPECT_EQ(d.imag(), 0.0);
    }
}

TEST(OperatorIdentity, SandwichesAgree) {
    const std::vector<cplx> zs = {{0.0, 1.0}, {0.4, 0.01}, {-3.0, 2.0}, {2.0, 0.0}};
    EXPECT_LE(ssf::operator_identity_check(zs), 1e-12);
}

// Diagonal entries of a compressed resolvent are Herglotz; the compression is symmetric.
TEST(OperatorIdentity, SandwichIsHerglotz) {
    const ssf::BaseOperator h1{1.0};
    const auto p = ssf::make_v_a(-1.0);
    for (cplx z : {cplx{0.0, 0.5}, cplx{3.0, 0.1}, cplx{-2.0, 1.0}}) {
        const auto s = ssf::perturbed_resolvent_sandwich(h1, p, 1.0, z);
        EXPECT_GT(s(0, 0).imag(), 0.0);
        EXPECT_GT(s(1, 1).imag(), 0.0);
        EXPECT_LE(std::abs(s(0, 1) - s(1, 0)), 1e-14);
    }
}

TEST(Pairs, Labels) {
    EXPECT_EQ(ssf::diagonal_pair().label, "diagonal");
    EXPECT_EQ(ssf::rank_one_pair().pert.rank(), 1);
    EXPECT_EQ(ssf::rank_two_reversed_pair().orientation, ssf::Orientation::reversed);
    EXPECT_EQ(ssf::sign_of(ssf::Orientation::reversed), -1.0);
}
