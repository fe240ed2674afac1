#include "ssf/specfun.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kInvSqrtPi = 0.56418958354775628695;

// Weideman (1994): w(z) ~ 2 p(Z) / (L - iz)^2 + 1 / (sqrt(pi) (L - iz)),
// Z = (L + iz) / (L - iz), with p a degree N-1 polynomial whose coefficients
// are cosine-transform samples of exp(-t^2)(L^2 + t^2) on t = L tan(theta/2).
constexpr int kWeidemanTerms = 40;
constexpr double kWeidemanRadius = 6.5;
constexpr int kContinuedFractionDepth = 30;

struct WeidemanTable {
    double L = 0.0;
    std::array<double, kWeidemanTerms> a{};

    WeidemanTable() {
        constexpr int M = 2 * kWeidemanTerms;
        L = std::sqrt(kWeidemanTerms / std::numbers::sqrt2);
        std::array<double, 2 * M> f{};
        for (int k = -M + 1; k < M; ++k) {
            const double t = L * std::tan(0.5 * k * std::numbers::pi / M);
            f[k + M] = std::exp(-t * t) * (L * L + t * t);
        }
        // f at k = -M is the t -> infinity limit, zero.
        for (int n = 1; n <= kWeidemanTerms; ++n) {
            double s = 0.0;
            for (int k = -M; k < M; ++k) {
                s += f[k + M] * std::cos(std::numbers::pi * k * n / M);
            }
            a[n - 1] = s / (2.0 * M);
        }
    }
};

const WeidemanTable& weideman() {
    static const WeidemanTable table;
    return table;
}

cplx faddeeva_weideman(cplx z) {
    const auto& t = weideman();
    const cplx iz{-z.imag(), z.real()};
    const cplx denom = t.L - iz;
    const cplx Z = (t.L + iz) / denom;
    cplx p = 0.0;
    for (int n = kWeidemanTerms - 1; n >= 0; --n) {
        p = p * Z + t.a[n];
    }
    return 2.0 * p / (denom * denom) + kInvSqrtPi / denom;
}

// Laplace continued fraction w(z) = (i/sqrt(pi)) / (z - (1/2)/(z - 1/(z - (3/2)/(z - ...)))).
cplx faddeeva_continued_fraction(cplx z) {
    cplx t = z;
    for (int k = kContinuedFractionDepth; k >= 1; --k) {
        t = z - (0.5 * k) / t;
    }
    return cplx{0.0, kInvSqrtPi} / t;
}

double dawson_series(double x) {
    // D(x) = sum_n (-1)^n 2^n x^(2n+1) / (2n+1)!!
    const double x2 = x * x;
    double term = x;
    double sum = x;
    for (int n = 1; n < 40; ++n) {
        term *= -2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

}  // namespace

cplx faddeeva(cplx z) {
    if (!(z.imag() >= 0.0)) {
        throw DomainError("faddeeva: Im z must be >= 0");
    }
    if (std::abs(z) < kWeidemanRadius) {
        return faddeeva_weideman(z);
    }
    return faddeeva_continued_fraction(z);
}

double dawson(double x) {
    if (std::isnan(x)) return x;
    if (std::isinf(x)) return 0.0;
    if (std::abs(x) < 0.2) return dawson_series(x);
    return 0.5 * kSqrtPi * faddeeva(cplx{x, 0.0}).imag();
}

double gaussian_weight(double x) {
    // pi^(-1/4)
    return 0.75112554446494248286 * std::exp(-0.5 * x * x);
}

double gaussian_density(double x) { return kInvSqrtPi * std::exp(-x * x); }

cplx gaussian_borel(cplx z) {
    if (!(z.imag() >= 0.0)) {
        throw DomainError("gaussian_borel: Im z must be >= 0");
    }
    if (z.imag() == 0.0) {
        const double x = z.real();
        return {-2.0 * dawson(x), kSqrtPi * std::exp(-x * x)};
    }
    return cplx{0.0, kSqrtPi} * faddeeva(z);
}

}  // namespace ssf
