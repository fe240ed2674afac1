#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "ssf/errors.hpp"
#include "ssf/specfun.hpp"

using ssf::cplx;

namespace {

void expect_close(cplx got, cplx want, double rel) {
    EXPECT_LE(std::abs(got - want), rel * std::abs(want)) << got << " vs " << want;
}

}  // namespace

TEST(Faddeeva, ImaginaryAxis) {
    EXPECT_NEAR(ssf::faddeeva({0.0, 1.0}).real(), 0.427583576155807, 1e-12);
    EXPECT_EQ(ssf::faddeeva({0.0, 1.0}).imag(), 0.0);
    EXPECT_NEAR(ssf::faddeeva({0.0, 100.0}).real(), 5.6416137829894e-3, 1e-15);
}

// mpmath, 30 digits.
TEST(Faddeeva, FrozenValues) {
    expect_close(ssf::faddeeva({1.0, 1.0}), {0.30474420525691259, 0.20821893820283163}, 1e-12);
    expect_close(ssf::faddeeva({3.0, 0.5}), {0.037126366054692345, 0.19298375530036209}, 1e-12);
    expect_close(ssf::faddeeva({8.0, 0.1}), {0.00090291262893829058, 0.071076545144875074}, 1e-12);
}

TEST(Faddeeva, ReflectionSymmetry) {
    for (double x : {0.3, 2.0, 5.9, 7.1, 20.0}) {
        for (double y : {0.0, 0.01, 1.0, 6.0}) {
            const cplx w = ssf::faddeeva({x, y});
            const cplx m = ssf::faddeeva({-x, y});
            EXPECT_LE(std::abs(m - std::conj(w)), 1e-14 * std::abs(w));
        }
    }
}

TEST(Faddeeva, ContinuousAcrossRegionSwitch) {
    // |z| = 6.5 separates the two evaluation schemes; |w'| is about 0.013 there.
    for (double t = 0.05; t < 1.5; t += 0.25) {
        const cplx inside = std::polar(6.5 - 1e-13, t);
        const cplx outside = std::polar(6.5 + 1e-13, t);
        expect_close(ssf::faddeeva(inside), ssf::faddeeva(outside), 1e-11);
    }
}

TEST(Faddeeva, LowerHalfPlaneRejected) { EXPECT_THROW(ssf::faddeeva({0.0, -1e-3}), ssf::DomainError); }

TEST(Dawson, FrozenValues) {
    EXPECT_NEAR(ssf::dawson(1.0), 0.538079506912768, 1e-13);
    EXPECT_NEAR(ssf::dawson(10.0), 0.050253847187598528, 1e-13);
    EXPECT_NEAR(ssf::dawson(0.1), 0.099335992397852867, 1e-15);
    EXPECT_NEAR(ssf::dawson(3.0), 0.17827103061055829, 1e-14);
    EXPECT_EQ(ssf::dawson(0.0), 0.0);
    EXPECT_DOUBLE_EQ(ssf::dawson(-1.7), -ssf::dawson(1.7));
}

TEST(Dawson, AgainstQuadrature) {
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    for (double x : {0.15, 0.5, 1.3, 2.5, 4.0}) {
        const double integral = gk.integrate([](double t) { return std::exp(t * t); }, 0.0, x, 15, 1e-14);
        EXPECT_NEAR(ssf::dawson(x), std::exp(-x * x) * integral, 1e-12 * std::abs(ssf::dawson(x)));
    }
}

TEST(Dawson, NonFinite) {
    EXPECT_EQ(ssf::dawson(INFINITY), 0.0);
    EXPECT_TRUE(std::isnan(ssf::dawson(NAN)));
}

TEST(Borel, UpperHalfPlane) {
    const cplx f = ssf::gaussian_borel({0.0, 1.0});
    EXPECT_NEAR(f.real(), 0.0, 1e-15);
    EXPECT_NEAR(f.imag(), 0.757872156141312, 1e-12);
}

TEST(Borel, BoundaryValueIsLimitFromAbove) {
    for (double l : {-2.5, -0.4, 0.0, 1.0, 3.3}) {
        const cplx edge = ssf::gaussian_borel({l, 0.0});
        const cplx near = ssf::gaussian_borel({l, 1e-9});
        EXPECT_NEAR(edge.real(), near.real(), 1e-8);
        EXPECT_NEAR(edge.imag(), near.imag(), 1e-8);
        EXPECT_NEAR(edge.imag(), std::sqrt(std::numbers::pi) * std::exp(-l * l), 1e-15);
        EXPECT_NEAR(edge.real(), -2.0 * ssf::dawson(l), 1e-15);
    }
}

TEST(Borel, AgainstQuadrature) {
    boost::math::quadrature::gauss_kronrod<double, 61> gk;
    for (cplx z : {cplx{0.5, 0.3}, cplx{-1.2, 1.0}, cplx{2.0, 0.1}, cplx{0.0, 4.0}}) {
        auto re = [&](double x) { return (ssf::gaussian_density(x) / (x - z)).real(); };
        auto im = [&](double x) { return (ssf::gaussian_density(x) / (x - z)).imag(); };
        const cplx q(gk.integrate(re, -12.0, z.real(), 20, 1e-15) + gk.integrate(re, z.real(), 12.0, 20, 1e-15),
                     gk.integrate(im, -12.0, z.real(), 20, 1e-15) + gk.integrate(im, z.real(), 12.0, 20, 1e-15));
        expect_close(ssf::gaussian_borel(z), q, 1e-10);
    }
}

TEST(Gaussian, UnitNorm) {
    boost::math::quadrature::gauss_kronrod<double, 31> gk;
    EXPECT_NEAR(gk.integrate([](double x) { return ssf::gaussian_density(x); }, -12.0, 12.0, 10, 1e-15), 1.0,
                1e-13);
    EXPECT_DOUBLE_EQ(ssf::gaussian_weight(0.7) * ssf::gaussian_weight(0.7), ssf::gaussian_density(0.7));
}
