#pragma once

#include <span>
#include <vector>

#include "ssf/model.hpp"

namespace ssf {

enum class BoundaryRoute { closed_form, contour, epsilon_limit };

/// Determinant boundary value with a branch-consistent argument.
struct BoundarySample {
    double lambda = 0.0;
    cplx delta;
    double arg_unwrapped = 0.0;
    BoundaryRoute route = BoundaryRoute::closed_form;
};

/// Point r on the segment base -> base + pert.
struct CouplingPath {
    BaseOperator base;
    FiniteRankPerturbation pert;
    double r = 1.0;
};

/// Perturbation determinant Delta_r(z) = det(I + r M G(z)).
cplx pert_det(const BaseOperator& base, const FiniteRankPerturbation& pert, double r, cplx z,
              double pole_radius = kDefaultPoleRadius);
cplx pert_det(const CouplingPath& path, cplx z, double pole_radius = kDefaultPoleRadius);

struct ContourOptions {
    double anchor_height = 1e3;
    double min_height = 1e-12;
    double max_step_phase = 0.39269908169872414;  // pi/8
    int max_bisections = 50;
    int initial_steps = 32;
};

struct KreinOptions {
    double pole_radius = kDefaultPoleRadius;
    double route_tolerance = 1e-9;
    ContourOptions contour;
};

/// (1/pi) arg Delta_1(z) by rank-one chaining: the perturbation is added one
/// eigen-term at a time, and each factor 1 + mu_j g_j(z) has g_j Herglotz, so
/// its argument lies in [0, pi] for mu_j > 0 and in [-pi, 0] for mu_j < 0.
/// Valid on the closed upper half-plane (boundary values when Im z = 0).
double ssf_chained(const BaseOperator& base, const FiniteRankPerturbation& pert, cplx z,
                   double pole_radius = kDefaultPoleRadius);

/// Tracks arg Delta_1 from i * anchor_height across to lambda + i * anchor_height,
/// then down to lambda + i0 with adaptive phase-limited steps.
/// Throws BranchTrackingError when a step still jumps by more than pi/2 after
/// the maximal number of bisections.
BoundarySample ssf_contour(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                           const ContourOptions& opts = {}, double pole_radius = kDefaultPoleRadius);

/// Argument of Delta_1 along the vertical descent, recorded at each of the
/// (descending) heights; heights must be > 0.
std::vector<double> contour_arguments(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                      double lambda, std::span<const double> heights,
                                      const ContourOptions& opts = {});

struct SsfRoutes {
    double chained = 0.0;
    double contour = 0.0;
    BoundarySample sample;
};

/// Both routes; throws RouteDisagreementError when they differ by more than
/// opts.route_tolerance.
SsfRoutes ssf_total_routes(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                           const KreinOptions& opts = {});

/// Total spectral shift xi(lambda) = (1/pi) arg Delta_1(lambda + i0), branch
/// vanishing at i*infinity. Forward orientation.
double ssf_total(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                 const KreinOptions& opts = {});

/// Orientation-aware total SSF of an ordered pair.
double ssf_total(const OperatorPair& pair, double lambda, const KreinOptions& opts = {});

struct EpsilonRouteResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::vector<double> eps;
    std::vector<double> samples;  // (1/pi) Im log Delta(lambda + i eps)
};

std::vector<double> default_eps_schedule();

/// Richardson (Neville) extrapolation to eps = 0 of (1/pi) Im log Delta(lambda + i eps).
/// Throws ExtrapolationError when the best error estimate exceeds tol.
EpsilonRouteResult ssf_total_epsilon_route(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                           double lambda, std::span<const double> eps_schedule,
                                           double tol = 1e-7);

}  // namespace ssf
