#include "ssf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ssf/parallel.hpp"

namespace ssf {

Eigen::MatrixXd hermite_jacobi(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k) {
        const double b = std::sqrt(0.5 * (k + 1));
        j(k, k + 1) = b;
        j(k + 1, k) = b;
    }
    return j;
}

namespace {

DiscretizedPair assemble(const Eigen::MatrixXd& multiplication, const Eigen::VectorXd& v_vec,
                         const BaseOperator& base, const FiniteRankPerturbation& pert) {
    const int n = static_cast<int>(multiplication.rows());
    DiscretizedPair out;
    out.n = n;
    out.v_vector = v_vec;
    out.a_matrix = Eigen::MatrixXd::Zero(n + 1, n + 1);
    out.a_matrix.topLeftCorner(n, n) = multiplication;
    out.a_matrix(n, n) = base.level;
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (const auto& t : pert.terms()) {
        Eigen::VectorXd phi = Eigen::VectorXd::Zero(n + 1);
        phi.head(n) = t.c * v_vec;
        phi(n) = t.d;
        p += t.mu * phi * phi.transpose();
    }
    out.b_matrix = out.a_matrix + p;
    return out;
}

}  // namespace

DiscretizedPair hermite_discretize(const BaseOperator& base, const FiniteRankPerturbation& pert, int n) {
    if (n < 2) throw std::invalid_argument("hermite_discretize: N must be >= 2");
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(n);
    e0(0) = 1.0;
    auto out = assemble(hermite_jacobi(n), e0, base, pert);
    out.scheme = Scheme::hermite;
    return out;
}

DiscretizedPair grid_discretize(const BaseOperator& base, const FiniteRankPerturbation& pert, int n,
                                double half_width) {
    if (n < 2) throw std::invalid_argument("grid_discretize: N must be >= 2");
    if (!(half_width > 0.0)) throw std::invalid_argument("grid_discretize: L must be positive");
    const double h = 2.0 * half_width / n;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd w(n);
    for (int i = 0; i < n; ++i) {
        const double xi = -half_width + (i + 0.5) * h;
        x(i, i) = xi;
        w(i) = gaussian_weight(xi) * std::sqrt(h);
    }
    w.normalize();
    auto out = assemble(x, w, base, pert);
    out.scheme = Scheme::grid;
    out.half_width = half_width;
    return out;
}

DiscretizedPair discretize(const OperatorPair& pair, int n, Scheme scheme, double half_width) {
    DiscretizedPair d = scheme == Scheme::hermite ? hermite_discretize(pair.base, pair.pert, n)
                                                  : grid_discretize(pair.base, pair.pert, n, half_width);
    if (pair.orientation == Orientation::reversed) std::swap(d.a_matrix, d.b_matrix);
    return d;
}

namespace {

Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

int count_at_most(const Eigen::VectorXd& eig, double lambda) {
    return static_cast<int>(std::upper_bound(eig.data(), eig.data() + eig.size(), lambda) - eig.data());
}

}  // namespace

int counting_ssf(const Eigen::VectorXd& eig_a, const Eigen::VectorXd& eig_b, double lambda) {
    constexpr double nudge = 1e-12;
    auto near = [&](const Eigen::VectorXd& e) { return ((e.array() - lambda).abs() < nudge).any(); };
    if (near(eig_a) || near(eig_b)) lambda += nudge;
    return count_at_most(eig_a, lambda) - count_at_most(eig_b, lambda);
}

int counting_ssf(const DiscretizedPair& pair, double lambda) {
    return counting_ssf(sorted_eigenvalues(pair.a_matrix), sorted_eigenvalues(pair.b_matrix), lambda);
}

double SmoothingKernel::operator()(double x) const {
    const double u = x / width;
    return std::exp(-0.5 * u * u) / (width * std::sqrt(2.0 * std::numbers::pi));
}

double SmoothingKernel::cdf(double x) const { return 0.5 * std::erfc(-x / (width * std::numbers::sqrt2)); }

std::vector<double> smoothed_counting_ssf(const DiscretizedPair& pair, std::span<const double> lambda_grid,
                                          const SmoothingKernel& kernel) {
    const Eigen::VectorXd ea = sorted_eigenvalues(pair.a_matrix);
    const Eigen::VectorXd eb = sorted_eigenvalues(pair.b_matrix);
    std::vector<double> out;
    out.reserve(lambda_grid.size());
    for (double l : lambda_grid) {
        double s = 0.0;
        for (int k = 0; k < ea.size(); ++k) s += kernel.cdf(l - ea(k)) - kernel.cdf(l - eb(k));
        out.push_back(s);
    }
    return out;
}

std::vector<double> averaged_ssf(const DiscretizedPair& pair, std::span<const double> lambda_grid, int r_points,
                                 const SmoothingKernel& kernel) {
    if (r_points < 64) throw std::invalid_argument("averaged_ssf: need at least 64 r nodes");
    const Eigen::MatrixXd v = pair.b_matrix - pair.a_matrix;
    // Low-rank factor V = Phi diag(mu) Phi^T.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> vs(v);
    const double vscale = vs.eigenvalues().cwiseAbs().maxCoeff();
    std::vector<int> keep;
    for (int k = 0; k < vs.eigenvalues().size(); ++k) {
        if (std::abs(vs.eigenvalues()(k)) > 1e-12 * std::max(vscale, 1.0)) keep.push_back(k);
    }
    Eigen::MatrixXd phi(v.rows(), keep.size());
    Eigen::VectorXd mu(keep.size());
    for (std::size_t j = 0; j < keep.size(); ++j) {
        phi.col(j) = vs.eigenvectors().col(keep[j]);
        mu(j) = vs.eigenvalues()(keep[j]);
    }

    std::vector<Eigen::VectorXd> energies(r_points), weights(r_points);
    parallel_for(static_cast<std::size_t>(r_points), [&](std::size_t i) {
        const double r = (static_cast<double>(i) + 0.5) / r_points;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pair.a_matrix + r * v);
        const Eigen::MatrixXd proj = phi.transpose() * es.eigenvectors();
        energies[i] = es.eigenvalues();
        weights[i] = (proj.array().square().colwise() * mu.array()).colwise().sum().transpose();
    });

    std::vector<double> out(lambda_grid.size(), 0.0);
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
        double s = 0.0;
        for (int i = 0; i < r_points; ++i) {
            for (int k = 0; k < energies[i].size(); ++k) s += weights[i](k) * kernel(lambda_grid[l] - energies[i](k));
        }
        out[l] = s / r_points;
    }
    return out;
}

int EigenFlow::net_crossings(double lambda) const {
    int net = 0;
    for (int k = 0; k < eigenvalues.cols(); ++k) {
        for (int i = 0; i + 1 < eigenvalues.rows(); ++i) {
            const bool below_now = eigenvalues(i, k) <= lambda;
            const bool below_next = eigenvalues(i + 1, k) <= lambda;
            if (below_now && !below_next) ++net;
            if (!below_now && below_next) --net;
        }
    }
    return net;
}

EigenFlow eigen_flow(const DiscretizedPair& pair, int r_points) {
    if (r_points < 50) throw std::invalid_argument("eigen_flow: need at least 50 r points");
    EigenFlow flow;
    const Eigen::MatrixXd v = pair.b_matrix - pair.a_matrix;
    const int size = static_cast<int>(pair.a_matrix.rows());
    flow.eigenvalues.resize(r_points, size);
    flow.r.resize(r_points);
    parallel_for(static_cast<std::size_t>(r_points), [&](std::size_t i) {
        const double r = static_cast<double>(i) / (r_points - 1);
        flow.r[i] = r;
        flow.eigenvalues.row(static_cast<Eigen::Index>(i)) = sorted_eigenvalues(pair.a_matrix + r * v).transpose();
    });
    flow.min_gap = INFINITY;
    for (int i = 0; i < r_points; ++i) {
        for (int k = 0; k + 1 < size; ++k) {
            flow.min_gap = std::min(flow.min_gap, flow.eigenvalues(i, k + 1) - flow.eigenvalues(i, k));
        }
    }
    flow.ambiguous = flow.min_gap < 1e-10;
    return flow;
}

namespace {

// Largest singular value of X -> (XA - AX, XB - BX), by power iteration on
// ad_A^2 + ad_B^2 expressed in A's eigenbasis (where ad_A is diagonal).
double stacked_norm(const Eigen::VectorXd& lam, const Eigen::MatrixXd& bt) {
    const int n = static_cast<int>(lam.size());
    Eigen::MatrixXd diff(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) diff(i, j) = lam(i) - lam(j);
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) x(i, j) += 0.37 * std::sin(1.0 + 3.1 * i + 7.3 * j);
    x.normalize();
    double estimate = 0.0;
    for (int it = 0; it < 200; ++it) {
        const Eigen::MatrixXd ad_b = bt * x - x * bt;
        Eigen::MatrixXd y = diff.array().square().matrix().cwiseProduct(x) + (bt * ad_b - ad_b * bt);
        const double norm = y.norm();
        if (norm == 0.0) return 0.0;
        const double next = std::sqrt(norm);
        x = y / norm;
        if (it > 10 && std::abs(next - estimate) <= 1e-6 * next) return next;
        estimate = next;
    }
    return estimate;
}

}  // namespace

CommutantResult commutant_dimension(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double rel_tol) {
    const int n = static_cast<int>(a.rows());
    if (a.cols() != n || b.rows() != n || b.cols() != n) {
        throw std::invalid_argument("commutant_dimension: matrices must be square and equal-sized");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
    const Eigen::VectorXd lam = es.eigenvalues();
    const Eigen::MatrixXd u = es.eigenvectors();
    const Eigen::MatrixXd bt = u.transpose() * b * u;

    CommutantResult res;
    res.largest_singular_value = stacked_norm(lam, bt);
    res.tolerance = rel_tol * res.largest_singular_value;
    if (res.largest_singular_value == 0.0) {
        res.dimension = n * n;
        return res;
    }

    // Clusters of A's eigenvalues whose gaps fall below the tolerance.
    std::vector<std::vector<int>> clusters;
    for (int i = 0; i < n; ++i) {
        if (i == 0 || lam(i) - lam(i - 1) > res.tolerance) clusters.emplace_back();
        clusters.back().push_back(i);
    }
    int unknowns = 0;
    for (const auto& c : clusters) unknowns += static_cast<int>(c.size() * c.size());
    if (unknowns > 6000) {
        throw std::invalid_argument("commutant_dimension: eigenvalue clusters of A too large for a dense solve");
    }

    // Column per unknown X_pq (p, q in one cluster), row per entry (i, j) of X Bt - Bt X.
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * n, unknowns);
    int col = 0;
    for (const auto& c : clusters) {
        for (int p : c) {
            for (int q : c) {
                for (int j = 0; j < n; ++j) e(static_cast<Eigen::Index>(p) * n + j, col) += bt(q, j);
                for (int i = 0; i < n; ++i) e(static_cast<Eigen::Index>(i) * n + q, col) -= bt(i, p);
                ++col;
            }
        }
    }
    // Thin QR first; the singular values of R are those of e.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(e);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(std::min<Eigen::Index>(e.rows(), unknowns))
                                  .triangularView<Eigen::Upper>();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
    const Eigen::VectorXd sv = svd.singularValues();
    int retained = 0;
    res.smallest_retained = INFINITY;
    for (int k = 0; k < sv.size(); ++k) {
        if (sv(k) >= res.tolerance) {
            ++retained;
            res.smallest_retained = std::min(res.smallest_retained, sv(k));
        }
    }
    res.dimension = unknowns - retained;
    res.ill_conditioned = res.smallest_retained < 10.0 * res.tolerance;
    return res;
}

KrylovResult krylov_dimension(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tol) {
    const int n = static_cast<int>(a.rows());
    const double bnorm = b.norm();
    if (!(bnorm > 0.0)) throw std::invalid_argument("krylov_dimension: b must be nonzero");
    // ||A||_2 by power iteration on A^T A.
    Eigen::VectorXd x = Eigen::VectorXd::Ones(n).normalized();
    double anorm = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd y = a.transpose() * (a * x);
        const double ny = y.norm();
        if (ny == 0.0) break;
        anorm = std::sqrt(ny);
        x = y / ny;
    }
    KrylovResult res;
    Eigen::MatrixXd q(n, n);
    q.col(0) = b / bnorm;
    int dim = 1;
    const double threshold = tol * std::max(anorm, 1e-300);
    while (dim < n) {
        Eigen::VectorXd w = a * q.col(dim - 1);
        for (int pass = 0; pass < 2; ++pass) {
            w -= q.leftCols(dim) * (q.leftCols(dim).transpose() * w);
        }
        const double h = w.norm();
        res.residual_norms.push_back(h);
        if (h <= threshold) break;
        q.col(dim) = w / h;
        ++dim;
    }
    res.dimension = dim;
    res.defect = n - dim;
    return res;
}

}  // namespace ssf
