#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssf/krein.hpp"
#include "ssf/quadrature.hpp"

namespace ssf {

struct DecompOptions {
    KreinOptions krein;
    double singularity_floor = 1e-8;
    QuadratureOptions r_quadrature{1e-8, 4000};
};

/// a.c. density of Tr(V E(d lambda)(H_r)):
///   (1/pi) sum_j mu_j Im[(G (I + r M G)^{-1})(lambda + i0)]_jj.
/// Throws SingularityFloorError when |det(I + r M G)| < opts.singularity_floor.
double ac_spectral_density(const BaseOperator& base, const FiniteRankPerturbation& pert, double r,
                           double lambda, const DecompOptions& opts = {});

/// xi^(a)(lambda) = int_0^1 ac_spectral_density dr (forward orientation).
QuadratureResult ssf_ac_detailed(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                                 const DecompOptions& opts = {});
double ssf_ac(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
              const DecompOptions& opts = {});
double ssf_ac(const OperatorPair& pair, double lambda, const DecompOptions& opts = {});

/// xi^(s) = xi - xi^(a).
double ssf_singular(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                    const DecompOptions& opts = {});
double ssf_singular(const OperatorPair& pair, double lambda, const DecompOptions& opts = {});

/// det S(lambda) = conj(Delta_1(lambda + i0)) / Delta_1(lambda + i0); inverted for reversed pairs.
cplx det_s(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
           double pole_radius = kDefaultPoleRadius);
cplx det_s(const OperatorPair& pair, double lambda, double pole_radius = kDefaultPoleRadius);

/// Indicator of [-1, 1].
struct StepFunctionRef {
    double operator()(double lambda) const { return (lambda >= -1.0 && lambda <= 1.0) ? 1.0 : 0.0; }
};

struct PoleWindow {
    double center = 0.0;
    double radius = 0.0;
    bool contains(double lambda) const { return std::abs(lambda - center) < radius; }
};

struct SsfRow {
    double lambda = 0.0;
    double xi_total = 0.0;
    double xi_ac = 0.0;
    double xi_singular = 0.0;
    double int_residual = 0.0;
    cplx det_s;
    double nearest_integer() const { return std::round(xi_singular); }
};

struct SsfTable {
    std::string pair;
    std::vector<SsfRow> rows;
    std::vector<PoleWindow> pole_windows;
    double r_quad_tol = 0.0;
    double singularity_floor = 0.0;
};

/// Evaluates every grid point outside the pole windows (rows computed
/// concurrently, then sorted by lambda).
SsfTable build_ssf_table(const OperatorPair& pair, std::span<const double> grid,
                         std::span<const PoleWindow> pole_windows, const DecompOptions& opts = {});

struct BirmanKreinResiduals {
    double total = 0.0;  // max |det S e^{2 pi i xi} - 1|
    double ac = 0.0;  // max |det S e^{2 pi i xi^(a)} - 1|
};

BirmanKreinResiduals check_birman_krein(const SsfTable& table);

/// max over rows of the distance of xi^(s) to the nearest integer.
double integer_residual(const SsfTable& table);

/// sup over shared grid points outside `exclude` of
/// |xi^(s)_A + xi^(s)_B - chi_[-1,1]|. Throws GridMismatchError if the
/// tables' lambda columns differ.
double sum_rule(const SsfTable& table_a, const SsfTable& table_b_reversed, std::span<const PoleWindow> exclude);

struct PpAbsenceReport {
    std::string pair;
    double min_det_modulus = INFINITY;
    double argmin_lambda = 0.0;
    double argmin_r = 0.0;
    // Rank-one pairs only: |Delta_r| >= r |mu| c^2 sqrt(pi) e^{-lambda^2} at every sampled point.
    bool rank_one = false;
    bool rank_one_bound_holds = true;
    double worst_bound_ratio = INFINITY;  // min |Delta_r| / (r |mu| c^2 sqrt(pi) e^{-lambda^2})
    double lambda_max = 0.0;
    struct Divergence {
        double lambda = 0.0;
        double expected = 0.0;  // 2 v(lambda)^2
        std::vector<double> deltas;
        std::vector<double> scaled;  // delta * I(delta)
    };
    std::vector<Divergence> divergence;
};

/// Windowed integral I(delta) = int_{|x - lambda| > delta} v(x)^2 / (x - lambda)^2 dx.
double windowed_square_integral(double lambda, double delta);

/// Evidence that H_r = base + r pert has no eigenvalues for the sampled r > 0.
PpAbsenceReport pp_absence_evidence(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                    std::span<const double> lambda_grid, std::span<const double> r_grid,
                                    std::span<const double> divergence_lambdas = {},
                                    std::span<const double> deltas = {},
                                    double pole_radius = kDefaultPoleRadius);

struct ScReport {
    bool precondition_ok = true;
    double floor = 0.0;
    double witness_lambda = 0.0;
    double xi_pp_a = 0.0;
    double xi_pp_b = 0.0;
    double xi_s_direct = 0.0;
    bool non_additive = false;
    // xi^(sc) = xi^(s) on both legs when pp is empty.
    double sc_sum_residual = 0.0;
    double sc_a_at_witness = 0.0;
    double sc_b_at_witness = 0.0;
};

/// Throws std::logic_error when a pp report shows a determinant modulus below floor.
ScReport sc_report(const SsfTable& table_a, const SsfTable& table_b_reversed,
                   std::span<const PpAbsenceReport> pp_reports, std::span<const PoleWindow> exclude,
                   double floor = 1e-8);

}  // namespace ssf
