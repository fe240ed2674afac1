#include "ssf/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ssf/errors.hpp"

namespace ssf {

FiniteRankPerturbation::FiniteRankPerturbation(std::vector<RankOneTerm> terms) : terms_(std::move(terms)) {
    if (terms_.size() > 2) {
        throw std::invalid_argument("FiniteRankPerturbation: rank must be <= 2");
    }
    constexpr double tol = 1e-14;
    for (std::size_t j = 0; j < terms_.size(); ++j) {
        for (std::size_t k = j; k < terms_.size(); ++k) {
            const double ip = terms_[j].c * terms_[k].c + terms_[j].d * terms_[k].d;
            const double expected = (j == k) ? 1.0 : 0.0;
            if (std::abs(ip - expected) > tol) {
                std::ostringstream msg;
                msg << "FiniteRankPerturbation: vectors not orthonormal (<psi_" << j << ", psi_" << k
                    << "> = " << ip << ")";
                throw std::invalid_argument(msg.str());
            }
        }
    }
}

Eigen::Matrix2d FiniteRankPerturbation::reduced() const {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    for (const auto& t : terms_) {
        const Eigen::Vector2d psi{t.c, t.d};
        m += t.mu * psi * psi.transpose();
    }
    return m;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> FiniteRankPerturbation::vectors() const {
    Eigen::Matrix<double, 2, Eigen::Dynamic> psi(2, rank());
    for (int j = 0; j < rank(); ++j) psi.col(j) << terms_[j].c, terms_[j].d;
    return psi;
}

Eigen::VectorXd FiniteRankPerturbation::eigenvalues() const {
    Eigen::VectorXd mu(rank());
    for (int j = 0; j < rank(); ++j) mu(j) = terms_[j].mu;
    return mu;
}

double FiniteRankPerturbation::trace_norm() const {
    double s = 0.0;
    for (const auto& t : terms_) s += std::abs(t.mu);
    return s;
}

Eigen::Matrix2d reduced_matrix(double a) {
    Eigen::Matrix2d m;
    m << 1.0, 1.0, 1.0, a;
    return m;
}

FiniteRankPerturbation make_v_a(double a) {
    // Closed-form 2x2 symmetric eigen-decomposition keeps the orthonormality
    // residual at the rounding level.
    const double half_trace = 0.5 * (1.0 + a);
    const double half_gap = std::hypot(0.5 * (1.0 - a), 1.0);
    std::vector<RankOneTerm> terms;
    for (double s : {1.0, -1.0}) {
        const double mu = half_trace + s * half_gap;
        if (std::abs(mu) < kRankTolerance) continue;
        // (M - mu) psi = 0 with first row (1 - mu) c + d = 0  =>  psi ~ (1, mu - 1).
        double c = 1.0;
        double d = mu - 1.0;
        const double n = std::hypot(c, d);
        terms.push_back({mu, c / n, d / n});
    }
    // The row-based vectors are orthogonal only up to rounding in mu; re-orthogonalize.
    if (terms.size() == 2) {
        auto& t0 = terms[0];
        auto& t1 = terms[1];
        const double ip = t0.c * t1.c + t0.d * t1.d;
        t1.c -= ip * t0.c;
        t1.d -= ip * t0.d;
        const double n = std::hypot(t1.c, t1.d);
        t1.c /= n;
        t1.d /= n;
    }
    return FiniteRankPerturbation(std::move(terms));
}

FiniteRankPerturbation make_diag_pert() { return FiniteRankPerturbation({{2.0, 0.0, 1.0}}); }

namespace {

cplx level_resolvent(double level, cplx z, double pole_radius) {
    if (!(z.imag() >= 0.0)) throw DomainError("resolvent: Im z must be >= 0");
    if (z.imag() == 0.0) {
        if (std::abs(z.real() - level) < pole_radius) {
            std::ostringstream msg;
            msg << "boundary value at lambda = " << z.real() << " inside pole window of level " << level;
            throw PoleError(msg.str(), z.real(), level);
        }
        return 1.0 / (level - z.real());
    }
    return 1.0 / (level - z);
}

}  // namespace

Eigen::MatrixXcd resolvent_gram(const BaseOperator& base, const FiniteRankPerturbation& pert, cplx z,
                                double pole_radius) {
    const cplx level = level_resolvent(base.level, z, pole_radius);
    const cplx f = gaussian_borel(z);
    const auto terms = pert.terms();
    const int k = pert.rank();
    Eigen::MatrixXcd g(k, k);
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            g(i, j) = terms[i].c * terms[j].c * f + terms[i].d * terms[j].d * level;
        }
    }
    return g;
}

Eigen::Matrix2cd perturbed_resolvent_sandwich(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                              double r, cplx z, double pole_radius) {
    Eigen::Matrix2cd r0 = Eigen::Matrix2cd::Zero();
    r0(0, 0) = gaussian_borel(z);
    r0(1, 1) = level_resolvent(base.level, z, pole_radius);
    const int k = pert.rank();
    if (k == 0 || r == 0.0) return r0;
    const Eigen::MatrixXcd psi = pert.vectors().cast<cplx>();
    const Eigen::MatrixXcd m = pert.eigenvalues().cast<cplx>().asDiagonal();
    const Eigen::MatrixXcd g = psi.transpose() * r0 * psi;
    // M (I + r G M)^{-1} = (I + r M G)^{-1} M
    const Eigen::MatrixXcd resolved =
        (Eigen::MatrixXcd::Identity(k, k) + r * m * g).partialPivLu().solve(m);
    return r0 - r * r0 * psi * resolved * psi.transpose() * r0;
}

double operator_identity_check(std::span<const cplx> zs) {
    const BaseOperator h0{-1.0};
    const BaseOperator h1{+1.0};
    const auto v1 = make_v_a(1.0);
    const auto vm1 = make_v_a(-1.0);
    double worst = 0.0;
    for (cplx z : zs) {
        const Eigen::Matrix2cd lhs = perturbed_resolvent_sandwich(h0, v1, 1.0, z);
        const Eigen::Matrix2cd rhs = perturbed_resolvent_sandwich(h1, vm1, 1.0, z);
        worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
    return worst;
}

OperatorPair diagonal_pair() { return {BaseOperator{-1.0}, make_diag_pert(), Orientation::forward, "diagonal"}; }

OperatorPair rank_one_pair() { return {BaseOperator{-1.0}, make_v_a(1.0), Orientation::forward, "rank1"}; }

OperatorPair rank_two_reversed_pair() {
    return {BaseOperator{+1.0}, make_v_a(-1.0), Orientation::reversed, "rank2_reversed"};
}

}  // namespace ssf
