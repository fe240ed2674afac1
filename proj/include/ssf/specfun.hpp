#pragma once

#include <complex>

namespace ssf {

using cplx = std::complex<double>;

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) on the closed upper half-plane.
///
/// Weideman's rational expansion inside |z| < 6.5, Laplace continued fraction
/// outside. Relative error is below 1e-12 everywhere on Im z >= 0.
/// Throws DomainError for Im z < 0.
cplx faddeeva(cplx z);

/// Dawson integral D(x) = exp(-x^2) * int_0^x exp(t^2) dt.
double dawson(double x);

/// v(x) = pi^(-1/4) exp(-x^2/2), the unit-norm Gaussian.
double gaussian_weight(double x);

/// v(x)^2 = exp(-x^2) / sqrt(pi).
double gaussian_density(double x);

/// Borel transform F(z) = int v(x)^2 / (x - z) dx of the Gaussian density.
///
/// For Im z > 0 this is i sqrt(pi) w(z). On the real axis the boundary value
/// F(lambda + i0) is returned in closed form:
///   Re F = -2 D(lambda),  Im F = sqrt(pi) exp(-lambda^2).
cplx gaussian_borel(cplx z);

}  // namespace ssf
