#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "ssf/model.hpp"

namespace ssf {

enum class Scheme { hermite, grid };

/// Finite-dimensional stand-in for a pair: a_matrix -> b_matrix, both
/// (N+1)x(N+1), the last coordinate being the level a0.
struct DiscretizedPair {
    Eigen::MatrixXd a_matrix;
    Eigen::MatrixXd b_matrix;
    Scheme scheme = Scheme::hermite;
    int n = 0;                // N
    double half_width = 0.0;  // grid scheme only
    Eigen::VectorXd v_vector; // image of v in the first N coordinates
};

/// Jacobi matrix of multiplication by x in the Hermite-function basis:
/// zero diagonal, off-diagonals sqrt((n+1)/2), n = 0..N-2. v maps to e0.
Eigen::MatrixXd hermite_jacobi(int n);

/// (J_N (+) a0) -> (J_N (+) a0) + pert with v -> e0. Throws for N < 2.
DiscretizedPair hermite_discretize(const BaseOperator& base, const FiniteRankPerturbation& pert, int n);

/// Midpoint grid on [-L, L] with N nodes; v sampled with sqrt(h) weights and normalized.
DiscretizedPair grid_discretize(const BaseOperator& base, const FiniteRankPerturbation& pert, int n,
                                double half_width);

/// Orientation-aware discretization of a pair (reversed pairs swap a and b).
DiscretizedPair discretize(const OperatorPair& pair, int n, Scheme scheme = Scheme::hermite,
                           double half_width = 5.0);

/// n_A(lambda) - n_B(lambda), counting eigenvalues <= lambda. A lambda that
/// coincides with an eigenvalue (within 1e-12) is nudged up by 1e-12.
int counting_ssf(const DiscretizedPair& pair, double lambda);
int counting_ssf(const Eigen::VectorXd& eig_a, const Eigen::VectorXd& eig_b, double lambda);

struct SmoothingKernel {
    double width = 0.2;
    double operator()(double x) const;
    double cdf(double x) const;
};

/// Kernel-smoothed counting SSF: sum_k Phi((lambda - a_k)/s) - Phi((lambda - b_k)/s).
std::vector<double> smoothed_counting_ssf(const DiscretizedPair& pair, std::span<const double> lambda_grid,
                                          const SmoothingKernel& kernel);

/// Spectral averaging: int_0^1 sum_k <u_k, V u_k> K(lambda - e_k(r)) dr,
/// the kernel-smoothed lambda-derivative of int_0^1 Tr[V E(-inf, lambda](H_r)] dr.
/// Midpoint rule with r_points >= 64 nodes.
std::vector<double> averaged_ssf(const DiscretizedPair& pair, std::span<const double> lambda_grid, int r_points,
                                 const SmoothingKernel& kernel);

struct EigenFlow {
    std::vector<double> r;
    Eigen::MatrixXd eigenvalues;  // row i: sorted spectrum of A + r_i (B - A)
    bool ambiguous = false;
    double min_gap = 0.0;

    /// Signed number of trajectories crossing lambda upwards minus downwards,
    /// so that it equals n_A(lambda) - n_B(lambda).
    int net_crossings(double lambda) const;
};

/// Sorted-order continuation of the eigenvalues along the segment; r_points >= 50.
EigenFlow eigen_flow(const DiscretizedPair& pair, int r_points);

struct CommutantResult {
    int dimension = 0;
    double tolerance = 0.0;
    double largest_singular_value = 0.0;
    double smallest_retained = 0.0;
    bool ill_conditioned = false;
};

/// Dimension of {X : XA = AX, XB = BX} for symmetric A, B: nullity of the
/// stacked map X -> (XA - AX, XB - BX) with singular values below
/// rel_tol * (largest singular value) counted as zero.
///
/// Works in A's eigenbasis: directions mixing eigenvalue clusters of A are
/// bounded below by the cluster gap, so the nullity is read from the dense SVD
/// of the map restricted to cluster-block-diagonal X.
CommutantResult commutant_dimension(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol = 1e-8);

struct KrylovResult {
    int dimension = 0;
    int defect = 0;  // size - dimension
    std::vector<double> residual_norms;
};

/// Numerical rank of {b, Ab, A^2 b, ...} by Arnoldi with full
/// re-orthogonalization; stops once the new residual norm is <= tol * ||A||.
KrylovResult krylov_dimension(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol = 1e-10);

}  // namespace ssf
