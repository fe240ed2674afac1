#include "ssf/decomp.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ssf/errors.hpp"
#include "ssf/parallel.hpp"

namespace ssf {

namespace {

// Returns nullopt when |det(I + r M G)| is below floor; `modulus` receives the determinant modulus.
std::optional<double> density_from_gram(const Eigen::MatrixXcd& g, const FiniteRankPerturbation& pert, double r,
                                        double floor, double* modulus = nullptr) {
    const auto terms = pert.terms();
    const int k = pert.rank();
    if (k == 0) return 0.0;
    if (k == 1) {
        const cplx denom = 1.0 + r * terms[0].mu * g(0, 0);
        if (modulus) *modulus = std::abs(denom);
        if (std::abs(denom) < floor) return std::nullopt;
        return terms[0].mu * (g(0, 0) / denom).imag() / std::numbers::pi;
    }
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    m(0, 0) = terms[0].mu;
    m(1, 1) = terms[1].mu;
    const Eigen::Matrix2cd a = Eigen::Matrix2cd::Identity() + r * m * g;
    const cplx det = a.determinant();
    if (modulus) *modulus = std::abs(det);
    if (std::abs(det) < floor) return std::nullopt;
    const Eigen::Matrix2cd gr = g * a.inverse();
    return (terms[0].mu * gr(0, 0).imag() + terms[1].mu * gr(1, 1).imag()) / std::numbers::pi;
}

Eigen::MatrixXcd boundary_gram(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                               double pole_radius) {
    return resolvent_gram(base, pert, cplx{lambda, 0.0}, pole_radius);
}

}  // namespace

double ac_spectral_density(const BaseOperator& base, const FiniteRankPerturbation& pert, double r,
                           double lambda, const DecompOptions& opts) {
    const Eigen::MatrixXcd g = boundary_gram(base, pert, lambda, opts.krein.pole_radius);
    double modulus = 0.0;
    auto value = density_from_gram(g, pert, r, opts.singularity_floor, &modulus);
    if (!value) {
        std::ostringstream msg;
        msg << "ac_spectral_density: |det(I + rMG)| = " << modulus << " below floor at r = " << r
            << ", lambda = " << lambda;
        throw SingularityFloorError(msg.str(), r, modulus);
    }
    return *value;
}

QuadratureResult ssf_ac_detailed(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                                 const DecompOptions& opts) {
    if (pert.rank() == 0) return {};
    const Eigen::MatrixXcd g = boundary_gram(base, pert, lambda, opts.krein.pole_radius);
    const double floor = opts.singularity_floor;
    return integrate_adaptive([&](double r) { return density_from_gram(g, pert, r, floor); }, 0.0, 1.0,
                              opts.r_quadrature);
}

double ssf_ac(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
              const DecompOptions& opts) {
    return ssf_ac_detailed(base, pert, lambda, opts).value;
}

double ssf_ac(const OperatorPair& pair, double lambda, const DecompOptions& opts) {
    return sign_of(pair.orientation) * ssf_ac(pair.base, pair.pert, lambda, opts);
}

double ssf_singular(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                    const DecompOptions& opts) {
    return ssf_total(base, pert, lambda, opts.krein) - ssf_ac(base, pert, lambda, opts);
}

double ssf_singular(const OperatorPair& pair, double lambda, const DecompOptions& opts) {
    return sign_of(pair.orientation) * ssf_singular(pair.base, pair.pert, lambda, opts);
}

cplx det_s(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda, double pole_radius) {
    const cplx delta = pert_det(base, pert, 1.0, cplx{lambda, 0.0}, pole_radius);
    if (delta == 0.0) {
        std::ostringstream msg;
        msg << "det_s: boundary determinant vanishes at lambda = " << lambda;
        throw PoleError(msg.str(), lambda, base.level);
    }
    return std::conj(delta) / delta;
}

cplx det_s(const OperatorPair& pair, double lambda, double pole_radius) {
    const cplx s = det_s(pair.base, pair.pert, lambda, pole_radius);
    return pair.orientation == Orientation::forward ? s : std::conj(s);
}

SsfTable build_ssf_table(const OperatorPair& pair, std::span<const double> grid,
                         std::span<const PoleWindow> pole_windows, const DecompOptions& opts) {
    SsfTable table;
    table.pair = pair.label;
    table.pole_windows.assign(pole_windows.begin(), pole_windows.end());
    table.r_quad_tol = opts.r_quadrature.abs_tol;
    table.singularity_floor = opts.singularity_floor;

    std::vector<double> lambdas;
    for (double l : grid) {
        if (std::none_of(pole_windows.begin(), pole_windows.end(), [&](const PoleWindow& w) { return w.contains(l); })) {
            lambdas.push_back(l);
        }
    }
    std::sort(lambdas.begin(), lambdas.end());
    table.rows.resize(lambdas.size());
    const double sign = sign_of(pair.orientation);
    parallel_for(lambdas.size(), [&](std::size_t i) {
        const double l = lambdas[i];
        SsfRow row;
        row.lambda = l;
        row.xi_total = sign * ssf_total(pair.base, pair.pert, l, opts.krein);
        row.xi_ac = sign * ssf_ac(pair.base, pair.pert, l, opts);
        row.xi_singular = row.xi_total - row.xi_ac;
        row.int_residual = std::abs(row.xi_singular - std::round(row.xi_singular));
        row.det_s = det_s(pair, l, opts.krein.pole_radius);
        table.rows[i] = row;
    });
    return table;
}

BirmanKreinResiduals check_birman_krein(const SsfTable& table) {
    BirmanKreinResiduals res;
    for (const auto& row : table.rows) {
        const cplx phase_total = std::polar(1.0, 2.0 * std::numbers::pi * row.xi_total);
        const cplx phase_ac = std::polar(1.0, 2.0 * std::numbers::pi * row.xi_ac);
        res.total = std::max(res.total, std::abs(row.det_s * phase_total - 1.0));
        res.ac = std::max(res.ac, std::abs(row.det_s * phase_ac - 1.0));
    }
    return res;
}

double integer_residual(const SsfTable& table) {
    double worst = 0.0;
    for (const auto& row : table.rows) worst = std::max(worst, row.int_residual);
    return worst;
}

double sum_rule(const SsfTable& table_a, const SsfTable& table_b_reversed, std::span<const PoleWindow> exclude) {
    if (table_a.rows.size() != table_b_reversed.rows.size()) {
        throw GridMismatchError("sum_rule: tables have different row counts");
    }
    const StepFunctionRef chi;
    double worst = 0.0;
    for (std::size_t i = 0; i < table_a.rows.size(); ++i) {
        const auto& a = table_a.rows[i];
        const auto& b = table_b_reversed.rows[i];
        if (a.lambda != b.lambda) {
            std::ostringstream msg;
            msg << "sum_rule: grid mismatch at row " << i << " (" << a.lambda << " vs " << b.lambda << ")";
            throw GridMismatchError(msg.str());
        }
        if (std::any_of(exclude.begin(), exclude.end(), [&](const PoleWindow& w) { return w.contains(a.lambda); })) {
            continue;
        }
        worst = std::max(worst, std::abs(a.xi_singular + b.xi_singular - chi(a.lambda)));
    }
    return worst;
}

double windowed_square_integral(double lambda, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("windowed_square_integral: delta must be positive");
    const double upper = 12.0 + std::abs(lambda);
    if (delta >= upper) return 0.0;
    // t = e^s:  int_delta^upper [v^2(l+t) + v^2(l-t)] / t^2 dt = int [..] / t ds
    auto integrand = [lambda](double s) -> std::optional<double> {
        const double t = std::exp(s);
        return (gaussian_density(lambda + t) + gaussian_density(lambda - t)) / t;
    };
    const double scale = (2.0 * gaussian_density(lambda) + 1e-300) / delta;
    QuadratureOptions q{1e-11 * std::max(scale, 1.0), 4000};
    return integrate_adaptive(integrand, std::log(delta), std::log(upper), q).value;
}

PpAbsenceReport pp_absence_evidence(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                    std::span<const double> lambda_grid, std::span<const double> r_grid,
                                    std::span<const double> divergence_lambdas, std::span<const double> deltas,
                                    double pole_radius) {
    PpAbsenceReport rep;
    const bool rank_one = pert.rank() == 1 && pert.terms()[0].c != 0.0;
    rep.rank_one = rank_one;
    for (double l : lambda_grid) {
        if (std::abs(l - base.level) < pole_radius) continue;
        rep.lambda_max = std::max(rep.lambda_max, std::abs(l));
        const Eigen::MatrixXcd g = boundary_gram(base, pert, l, pole_radius);
        for (double r : r_grid) {
            double modulus = 0.0;
            (void)density_from_gram(g, pert, r, 0.0, &modulus);
            if (modulus < rep.min_det_modulus) {
                rep.min_det_modulus = modulus;
                rep.argmin_lambda = l;
                rep.argmin_r = r;
            }
            if (rank_one && r > 0.0) {
                const auto& t = pert.terms()[0];
                const double bound = r * std::abs(t.mu) * t.c * t.c * std::sqrt(std::numbers::pi) * std::exp(-l * l);
                const double ratio = modulus / bound;
                rep.worst_bound_ratio = std::min(rep.worst_bound_ratio, ratio);
                // Slack of a few ulps: at lambda = 0 the bound is attained exactly.
                if (modulus < bound * (1.0 - 1e-12)) rep.rank_one_bound_holds = false;
            }
        }
    }
    for (double l : divergence_lambdas) {
        PpAbsenceReport::Divergence d;
        d.lambda = l;
        d.expected = 2.0 * gaussian_density(l);
        for (double delta : deltas) {
            d.deltas.push_back(delta);
            d.scaled.push_back(delta * windowed_square_integral(l, delta));
        }
        rep.divergence.push_back(std::move(d));
    }
    return rep;
}

ScReport sc_report(const SsfTable& table_a, const SsfTable& table_b_reversed,
                   std::span<const PpAbsenceReport> pp_reports, std::span<const PoleWindow> exclude, double floor) {
    ScReport rep;
    rep.floor = floor;
    for (const auto& pp : pp_reports) {
        if (pp.min_det_modulus < floor) rep.precondition_ok = false;
    }
    if (!rep.precondition_ok) {
        throw std::logic_error("sc_report: a boundary determinant falls below the floor; pp spectrum not excluded");
    }
    if (table_a.rows.empty()) throw std::invalid_argument("sc_report: empty table");
    // Witness at the row closest to lambda = 0.
    std::size_t best = 0;
    for (std::size_t i = 0; i < table_a.rows.size(); ++i) {
        if (std::abs(table_a.rows[i].lambda) < std::abs(table_a.rows[best].lambda)) best = i;
    }
    const StepFunctionRef chi;
    rep.witness_lambda = table_a.rows[best].lambda;
    // No eigenvalues along either leg for r in (0, 1]: the pp parts vanish.
    rep.xi_pp_a = 0.0;
    rep.xi_pp_b = 0.0;
    // The direct leg H0 -> H1 moves a single eigenvalue: xi^(pp) = xi^(s) = chi.
    rep.xi_s_direct = chi(rep.witness_lambda);
    rep.non_additive = std::abs(rep.xi_pp_a + rep.xi_pp_b - rep.xi_s_direct) > 0.5;
    rep.sc_a_at_witness = table_a.rows[best].xi_singular;
    rep.sc_b_at_witness = table_b_reversed.rows.at(best).xi_singular;
    rep.sc_sum_residual = sum_rule(table_a, table_b_reversed, exclude);
    return rep;
}

}  // namespace ssf
