#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ssf/specfun.hpp"

namespace ssf {

inline constexpr double kDefaultPoleRadius = 1e-2;
inline constexpr double kRankTolerance = 1e-14;

/// H = M (+) a0 on L2(R) (+) C, with M multiplication by x (the momentum
/// picture of -i d/dx, in which the Gaussian v is its own Fourier transform).
struct BaseOperator {
    double level = 0.0;
};

/// One eigen-term mu * psi psi^T with psi = (c v, d), expressed in the
/// orthonormal pair {(v, 0), (0, 1)}.
struct RankOneTerm {
    double mu = 0.0;
    double c = 0.0;
    double d = 0.0;
};

/// Self-adjoint perturbation of rank <= 2 supported on span{(v,0),(0,1)}.
class FiniteRankPerturbation {
public:
    FiniteRankPerturbation() = default;
    /// Throws std::invalid_argument unless the vectors are orthonormal to 1e-14
    /// and there are at most two terms.
    explicit FiniteRankPerturbation(std::vector<RankOneTerm> terms);

    std::span<const RankOneTerm> terms() const { return terms_; }
    int rank() const { return static_cast<int>(terms_.size()); }

    /// sum_j mu_j (c_j, d_j)(c_j, d_j)^T in the basis {(v,0),(0,1)}.
    Eigen::Matrix2d reduced() const;
    /// Column j is (c_j, d_j).
    Eigen::Matrix<double, 2, Eigen::Dynamic> vectors() const;
    Eigen::VectorXd eigenvalues() const;
    double trace_norm() const;

private:
    std::vector<RankOneTerm> terms_;
};

enum class Orientation : int { forward = 1, reversed = -1 };

inline double sign_of(Orientation o) { return static_cast<double>(static_cast<int>(o)); }

/// Ordered pair (base -> base + pert); `reversed` means (base + pert -> base),
/// whose SSF flavours are the negatives of the forward ones.
struct OperatorPair {
    BaseOperator base;
    FiniteRankPerturbation pert;
    Orientation orientation = Orientation::forward;
    std::string label;
};

/// Compression [[1, 1], [1, a]] of V_a to span{(v,0),(0,1)}.
Eigen::Matrix2d reduced_matrix(double a);

/// Eigen-decomposition of reduced_matrix(a) with |mu| < 1e-14 dropped.
FiniteRankPerturbation make_v_a(double a);

/// The level-only perturbation diag(0, 2).
FiniteRankPerturbation make_diag_pert();

/// G_jk(z) = <psi_j, (base - z)^{-1} psi_k> = c_j c_k F(z) + d_j d_k / (a0 - z).
///
/// On the real axis the boundary value is used; throws PoleError when
/// |lambda - a0| < pole_radius and DomainError when Im z < 0.
Eigen::MatrixXcd resolvent_gram(const BaseOperator& base, const FiniteRankPerturbation& pert, cplx z,
                                double pole_radius = kDefaultPoleRadius);

/// 2x2 compression of (base + r pert - z)^{-1} to span{(v,0),(0,1)} via the
/// Aronszajn-Krein formula R0 - R0 Psi M (I + r G M)^{-1} r Psi^T R0.
Eigen::Matrix2cd perturbed_resolvent_sandwich(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                              double r, cplx z, double pole_radius = kDefaultPoleRadius);

/// max over zs of |sandwich(H0, V1) - sandwich(H1, V_{-1})| entrywise, where
/// H0 = base(-1) and H1 = base(+1).
double operator_identity_check(std::span<const cplx> zs);

/// The three pairs studied: (H0 -> H1), (H0 -> H0 + V1), (H1 + V_{-1} -> H1).
OperatorPair diagonal_pair();
OperatorPair rank_one_pair();
OperatorPair rank_two_reversed_pair();

}  // namespace ssf
