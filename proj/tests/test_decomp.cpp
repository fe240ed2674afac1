#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "ssf/decomp.hpp"
#include "ssf/errors.hpp"

using ssf::cplx;

namespace {
const ssf::BaseOperator kH0{-1.0};
const ssf::BaseOperator kH1{+1.0};

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> g;
    for (long k = 0; lo + k * step <= hi + 1e-12; ++k) g.push_back(lo + k * step);
    return g;
}
}  // namespace

TEST(Decomp, RankOneAcCarriesEverything) {
    const auto pair = ssf::rank_one_pair();
    for (double l : {-2.0, -0.5, 0.0, 0.5, 3.0}) {
        EXPECT_NEAR(ssf::ssf_ac(pair, l), ssf::ssf_total(pair, l), 1e-9) << l;
        EXPECT_NEAR(ssf::ssf_singular(pair, l), 0.0, 1e-9);
    }
    EXPECT_NEAR(ssf::ssf_ac(pair, 0.0), 0.5, 1e-9);
}

TEST(Decomp, ReversedRankTwoAcCarriesEverything) {
    const auto pair = ssf::rank_two_reversed_pair();
    for (double l : {-0.5, 0.0, 0.5}) {
        EXPECT_NEAR(ssf::ssf_singular(pair, l), 0.0, 1e-9) << l;
    }
    EXPECT_NEAR(ssf::ssf_ac(pair, 0.0), 0.5, 1e-9);
}

TEST(Decomp, DiagonalPairIsPurelySingular) {
    const auto pair = ssf::diagonal_pair();
    EXPECT_NEAR(ssf::ssf_ac(pair, 0.0), 0.0, 1e-12);
    EXPECT_NEAR(ssf::ssf_singular(pair, 0.0), 1.0, 1e-12);
    EXPECT_NEAR(ssf::ssf_singular(pair, 2.0), 0.0, 1e-12);
}

TEST(Decomp, SingularityFloor) {
    // Delta_r(0) = 1 - 2r vanishes at r = 1/2 for the diagonal pair.
    EXPECT_THROW(ssf::ac_spectral_density(kH0, ssf::make_diag_pert(), 0.5, 0.0), ssf::SingularityFloorError);
    EXPECT_NO_THROW(ssf::ac_spectral_density(kH0, ssf::make_v_a(1.0), 0.5, 0.0));
}

TEST(Decomp, AcDensityIntegratesToTotal) {
    const auto r = ssf::ssf_ac_detailed(kH0, ssf::make_v_a(1.0), 0.5);
    EXPECT_NEAR(r.value, 0.6137742310179513, 1e-9);
    EXPECT_LE(r.error, 1e-8);
}

TEST(Decomp, DetS) {
    const cplx s = ssf::det_s(kH0, ssf::make_v_a(1.0), 0.3);
    EXPECT_NEAR(std::abs(s), 1.0, 1e-14);
    const double xi = ssf::ssf_total(kH0, ssf::make_v_a(1.0), 0.3);
    EXPECT_LE(std::abs(s * std::exp(cplx(0.0, 2.0 * std::numbers::pi * xi)) - 1.0), 1e-12);
    const cplx rev = ssf::det_s(ssf::rank_two_reversed_pair(), 0.3);
    EXPECT_LE(std::abs(rev * ssf::det_s(kH1, ssf::make_v_a(-1.0), 0.3) - 1.0), 1e-14);
    // Delta_1(1) = 0 for the diagonal pair.
    EXPECT_THROW(ssf::det_s(ssf::diagonal_pair(), 1.0, 1e-12), ssf::PoleError);
}

TEST(Decomp, TablesAndResiduals) {
    const auto g = grid(-2.0, 2.0, 0.1);
    const std::vector<ssf::PoleWindow> w = {{-1.0, 0.01}, {1.0, 0.01}};
    const auto d = ssf::build_ssf_table(ssf::diagonal_pair(), g, w);
    EXPECT_EQ(d.rows.size(), g.size() - 2);
    EXPECT_TRUE(std::is_sorted(d.rows.begin(), d.rows.end(),
                               [](const ssf::SsfRow& a, const ssf::SsfRow& b) { return a.lambda < b.lambda; }));
    EXPECT_LE(ssf::integer_residual(d), 1e-12);
    const auto bk = ssf::check_birman_krein(d);
    EXPECT_LE(bk.total, 1e-12);
    EXPECT_LE(bk.ac, 1e-12);

    const auto a = ssf::build_ssf_table(ssf::rank_one_pair(), g, w);
    const auto b = ssf::build_ssf_table(ssf::rank_two_reversed_pair(), g, w);
    // Both singular parts vanish, so the sum misses the indicator by exactly 1 inside [-1, 1].
    EXPECT_NEAR(ssf::sum_rule(a, b, w), 1.0, 1e-9);

    const auto shorter = ssf::build_ssf_table(ssf::rank_one_pair(), grid(-2.0, 0.0, 0.1), w);
    EXPECT_THROW(ssf::sum_rule(shorter, b, w), ssf::GridMismatchError);
}

TEST(Decomp, WindowedIntegralDiverges) {
    for (double l : {-1.5, 0.0, 0.5}) {
        const double expected = 2.0 * ssf::gaussian_density(l);
        EXPECT_NEAR(1e-4 * ssf::windowed_square_integral(l, 1e-4), expected, 0.01 * expected);
        EXPECT_GT(ssf::windowed_square_integral(l, 1e-3), ssf::windowed_square_integral(l, 1e-2));
    }
}

TEST(Decomp, PpEvidenceRankOneBound) {
    const auto g = grid(-3.0, 3.0, 0.05);
    const std::vector<double> rs = {0.1, 0.5, 1.0};
    const auto rep = ssf::pp_absence_evidence(kH0, ssf::make_v_a(1.0), g, rs);
    EXPECT_TRUE(rep.rank_one);
    EXPECT_TRUE(rep.rank_one_bound_holds);
    EXPECT_GE(rep.worst_bound_ratio, 0.9);
    EXPECT_GT(rep.min_det_modulus, 1e-8);
    const auto two = ssf::pp_absence_evidence(kH1, ssf::make_v_a(-1.0), g, rs);
    EXPECT_FALSE(two.rank_one);
    EXPECT_GT(two.min_det_modulus, 1e-8);
}

TEST(Decomp, NonAdditivityWitness) {
    const auto g = grid(-2.0, 2.0, 0.1);
    const std::vector<ssf::PoleWindow> w = {{-1.0, 0.05}, {1.0, 0.05}};
    const auto a = ssf::build_ssf_table(ssf::rank_one_pair(), g, w);
    const auto b = ssf::build_ssf_table(ssf::rank_two_reversed_pair(), g, w);
    std::vector<ssf::PpAbsenceReport> pps = {
        ssf::pp_absence_evidence(kH0, ssf::make_v_a(1.0), g, std::vector<double>{0.5, 1.0}),
        ssf::pp_absence_evidence(kH1, ssf::make_v_a(-1.0), g, std::vector<double>{0.5, 1.0})};
    const auto sc = ssf::sc_report(a, b, pps, w);
    EXPECT_NEAR(sc.witness_lambda, 0.0, 1e-12);
    EXPECT_TRUE(sc.non_additive);
    EXPECT_EQ(sc.xi_s_direct, 1.0);

    pps[0].min_det_modulus = 1e-12;
    EXPECT_THROW(ssf::sc_report(a, b, pps, w), std::logic_error);
}
