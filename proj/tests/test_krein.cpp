#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "ssf/errors.hpp"
#include "ssf/krein.hpp"

using ssf::cplx;

namespace {
const ssf::BaseOperator kH0{-1.0};
const ssf::BaseOperator kH1{+1.0};
}  // namespace

TEST(Ssf, DiagonalPairIsIndicator) {
    const auto pair = ssf::diagonal_pair();
    for (double l : {-4.0, -1.5, -0.99, 0.0, 0.7, 0.99, 1.2, 5.0}) {
        EXPECT_NEAR(ssf::ssf_total(pair, l), (l >= -1.0 && l <= 1.0) ? 1.0 : 0.0, 1e-12) << l;
    }
}

// mpmath reference: (1/pi) arg(1 + F(l + i0) + 1/(-1 - l)).
TEST(Ssf, RankOneFrozen) {
    const auto p = ssf::make_v_a(1.0);
    EXPECT_NEAR(ssf::ssf_total(kH0, p, -0.5), 0.53471085439981023, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH0, p, 0.0), 0.5, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH0, p, 0.5), 0.6137742310179513, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH0, p, 2.0), 0.14945129101769145, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH0, p, -3.0), 3.7503338656061504e-5, 1e-14);
}

TEST(Ssf, RankTwoFrozen) {
    const auto p = ssf::make_v_a(-1.0);
    EXPECT_NEAR(ssf::ssf_total(kH1, p, -0.5), -0.4652891456001897, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH1, p, 0.5), -0.38622576898204869, 1e-12);
    EXPECT_NEAR(ssf::ssf_total(kH1, p, 2.0), 0.14945129101769148, 1e-12);
}

TEST(Ssf, ChainRuleAcrossTheTwoLegs) {
    // xi(H0 -> H0 + V1) + xi(H1 + V-1 -> H1) = xi(H0 -> H1).
    const auto a = ssf::rank_one_pair();
    const auto b = ssf::rank_two_reversed_pair();
    const auto d = ssf::diagonal_pair();
    for (double l = -5.0; l <= 5.0; l += 0.37) {
        EXPECT_NEAR(ssf::ssf_total(a, l) + ssf::ssf_total(b, l), ssf::ssf_total(d, l), 1e-12) << l;
    }
}

TEST(Ssf, PositivePerturbationBounds) {
    // rank(V1) = 1, V1 >= 0: 0 <= xi <= 1.
    const auto p = ssf::make_v_a(1.0);
    for (double l = -6.0; l <= 6.0; l += 0.13) {
        if (std::abs(l + 1.0) < 0.02) continue;
        const double xi = ssf::ssf_total(kH0, p, l);
        EXPECT_GE(xi, -1e-15);
        EXPECT_LE(xi, 1.0 + 1e-15);
    }
}

TEST(Ssf, TraceIdentityForRankOne) {
    // int xi = Tr V1 = 2.
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    const auto p = ssf::make_v_a(1.0);
    auto xi = [&](double l) { return ssf::ssf_chained(kH0, p, {l, 0.0}, 1e-12); };
    const double total = gk.integrate(xi, -14.0, -1.0, 20, 1e-12) + gk.integrate(xi, -1.0, 14.0, 20, 1e-12);
    EXPECT_NEAR(total, 2.0, 1e-8);
}

TEST(Ssf, ContourMatchesChainedOffAxis) {
    const auto p = ssf::make_v_a(-1.0);
    for (double l : {-2.0, 0.3, 0.95, 1.05, 4.0}) {
        const auto routes = ssf::ssf_total_routes(kH1, p, l);
        EXPECT_NEAR(routes.chained, routes.contour, 1e-12);
        EXPECT_EQ(routes.sample.route, ssf::BoundaryRoute::contour);
    }
}

TEST(Ssf, ContourArgumentsDescend) {
    const auto p = ssf::make_v_a(1.0);
    const std::vector<double> heights = {10.0, 1.0, 0.1, 1e-3, 1e-6};
    const auto args = ssf::contour_arguments(kH0, p, 0.0, heights);
    ASSERT_EQ(args.size(), heights.size());
    EXPECT_NEAR(args.back() / std::numbers::pi, 0.5, 1e-5);
    EXPECT_THROW(ssf::contour_arguments(kH0, p, 0.0, std::vector<double>{1.0, -1.0}), std::exception);
}

TEST(Ssf, EpsilonRouteExtrapolates) {
    const auto p = ssf::make_v_a(1.0);
    const auto r = ssf::ssf_total_epsilon_route(kH0, p, 0.5, ssf::default_eps_schedule());
    EXPECT_NEAR(r.value, 0.6137742310179513, 1e-9);
    EXPECT_EQ(r.samples.size(), r.eps.size());
    EXPECT_LE(r.error_estimate, 1e-7);
}

TEST(Ssf, EpsilonRouteReportsFailure) {
    const auto p = ssf::make_v_a(1.0);
    const std::vector<double> coarse = {1.0, 0.5};
    EXPECT_THROW(ssf::ssf_total_epsilon_route(kH0, p, 0.5, coarse, 1e-14), ssf::ExtrapolationError);
}

TEST(Ssf, PoleWindowRespected) {
    EXPECT_THROW(ssf::ssf_total(ssf::rank_one_pair(), -1.001), ssf::PoleError);
}

TEST(Ssf, VanishesAtInfinityAlongImaginaryAxis) {
    EXPECT_NEAR(ssf::ssf_chained(kH0, ssf::make_v_a(1.0), {0.0, 1e6}), 0.0, 1e-6);
}
