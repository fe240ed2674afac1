#include "ssf/krein.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "ssf/errors.hpp"

namespace ssf {

cplx pert_det(const BaseOperator& base, const FiniteRankPerturbation& pert, double r, cplx z,
              double pole_radius) {
    if (pert.rank() == 0 || r == 0.0) return 1.0;
    const Eigen::MatrixXcd g = resolvent_gram(base, pert, z, pole_radius);
    const auto terms = pert.terms();
    if (pert.rank() == 1) return 1.0 + r * terms[0].mu * g(0, 0);
    const cplx a = 1.0 + r * terms[0].mu * g(0, 0);
    const cplx b = r * terms[0].mu * g(0, 1);
    const cplx c = r * terms[1].mu * g(1, 0);
    const cplx d = 1.0 + r * terms[1].mu * g(1, 1);
    return a * d - b * c;
}

cplx pert_det(const CouplingPath& path, cplx z, double pole_radius) {
    return pert_det(path.base, path.pert, path.r, z, pole_radius);
}

namespace {

// Argument of 1 + mu g for Herglotz g, forced into the half-plane selected by sign(mu).
double herglotz_factor_arg(cplx factor, double mu) {
    return std::atan2(std::copysign(std::abs(factor.imag()), mu), factor.real());
}

}  // namespace

double ssf_chained(const BaseOperator& base, const FiniteRankPerturbation& pert, cplx z, double pole_radius) {
    if (pert.rank() == 0) return 0.0;
    const Eigen::MatrixXcd g = resolvent_gram(base, pert, z, pole_radius);
    const auto terms = pert.terms();
    const double mu0 = terms[0].mu;
    const cplx first = 1.0 + mu0 * g(0, 0);
    double arg = herglotz_factor_arg(first, mu0);
    if (pert.rank() == 2) {
        // Matrix element of the resolvent of base + mu0 psi0 psi0^T.
        const cplx g1 = g(1, 1) - mu0 * g(1, 0) * g(0, 1) / first;
        arg += herglotz_factor_arg(1.0 + terms[1].mu * g1, terms[1].mu);
    }
    return arg / std::numbers::pi;
}

namespace {

class PhaseTracker {
public:
    PhaseTracker(std::function<cplx(double)> delta_at, const ContourOptions& opts)
        : delta_at_(std::move(delta_at)), opts_(opts) {}

    void start(double t, double arg) {
        t_ = t;
        delta_ = delta_at_(t);
        arg_ = arg;
    }

    void start(double t) {
        t_ = t;
        delta_ = delta_at_(t);
        arg_ = std::arg(delta_);
    }

    // Re-anchors on a new parametrization that evaluates to the current point.
    void rebind(std::function<cplx(double)> delta_at, double t) {
        delta_at_ = std::move(delta_at);
        t_ = t;
    }

    void advance_to(double target) {
        double step = (target - t_) / opts_.initial_steps;
        int bisections = 0;
        while (t_ != target) {
            double next = t_ + step;
            if ((step > 0 && next > target) || (step < 0 && next < target)) next = target;
            const cplx d = delta_at_(next);
            const double inc = std::arg(d / delta_);
            if (std::abs(inc) > opts_.max_step_phase && bisections < opts_.max_bisections) {
                step *= 0.5;
                ++bisections;
                continue;
            }
            if (std::abs(inc) > 0.5 * std::numbers::pi) {
                std::ostringstream msg;
                msg << "contour tracking: phase jump " << inc << " after " << bisections
                    << " bisections at parameter " << next;
                throw BranchTrackingError(msg.str());
            }
            arg_ += inc;
            delta_ = d;
            t_ = next;
            ++steps_;
            if (bisections > 0) --bisections;
            step *= 1.5;
        }
    }

    double arg() const { return arg_; }
    cplx delta() const { return delta_; }
    int steps() const { return steps_; }

private:
    std::function<cplx(double)> delta_at_;
    ContourOptions opts_;
    double t_ = 0.0;
    cplx delta_;
    double arg_ = 0.0;
    int steps_ = 0;
};

// Anchors at i*Y, moves across to lambda + i*Y and descends (log-height
// parametrization) through `heights`, calling record after each.
template <class Record>
PhaseTracker descend(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                     std::span<const double> heights, const ContourOptions& opts, Record&& record) {
    const double Y = opts.anchor_height;
    auto across = [&](double x) { return pert_det(base, pert, 1.0, cplx{x, Y}); };
    PhaseTracker tracker(across, opts);
    tracker.start(0.0);
    tracker.advance_to(lambda);
    auto down = [&, lambda](double log_y) { return pert_det(base, pert, 1.0, cplx{lambda, std::exp(log_y)}); };
    tracker.rebind(down, std::log(Y));
    for (double h : heights) {
        tracker.advance_to(std::log(h));
        record(h, tracker.arg());
    }
    return tracker;
}

}  // namespace

BoundarySample ssf_contour(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                           const ContourOptions& opts, double pole_radius) {
    if (pert.rank() == 0) return {lambda, 1.0, 0.0, BoundaryRoute::contour};
    const double heights[] = {opts.min_height};
    PhaseTracker tracker = descend(base, pert, lambda, heights, opts, [](double, double) {});
    // Final leg from min_height to the boundary itself, linear in the height.
    const double y0 = opts.min_height;
    tracker.rebind(
        [&, lambda, y0](double s) {
            const double y = y0 * s;
            return pert_det(base, pert, 1.0, cplx{lambda, y}, pole_radius);
        },
        1.0);
    tracker.advance_to(0.0);
    return {lambda, tracker.delta(), tracker.arg(), BoundaryRoute::contour};
}

std::vector<double> contour_arguments(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                      double lambda, std::span<const double> heights,
                                      const ContourOptions& opts) {
    std::vector<double> out;
    out.reserve(heights.size());
    if (pert.rank() == 0) return std::vector<double>(heights.size(), 0.0);
    descend(base, pert, lambda, heights, opts, [&](double, double arg) { out.push_back(arg); });
    return out;
}

SsfRoutes ssf_total_routes(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                           const KreinOptions& opts) {
    SsfRoutes routes;
    routes.chained = ssf_chained(base, pert, cplx{lambda, 0.0}, opts.pole_radius);
    routes.sample = ssf_contour(base, pert, lambda, opts.contour, opts.pole_radius);
    routes.contour = routes.sample.arg_unwrapped / std::numbers::pi;
    if (!(std::abs(routes.chained - routes.contour) <= opts.route_tolerance)) {
        std::ostringstream msg;
        msg.precision(15);
        msg << "ssf_total: routes disagree at lambda = " << lambda << " (chained " << routes.chained
            << ", contour " << routes.contour << ")";
        throw RouteDisagreementError(msg.str(), routes.chained, routes.contour);
    }
    return routes;
}

double ssf_total(const BaseOperator& base, const FiniteRankPerturbation& pert, double lambda,
                 const KreinOptions& opts) {
    return ssf_total_routes(base, pert, lambda, opts).chained;
}

double ssf_total(const OperatorPair& pair, double lambda, const KreinOptions& opts) {
    return sign_of(pair.orientation) * ssf_total(pair.base, pair.pert, lambda, opts);
}

std::vector<double> default_eps_schedule() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}; }

EpsilonRouteResult ssf_total_epsilon_route(const BaseOperator& base, const FiniteRankPerturbation& pert,
                                           double lambda, std::span<const double> eps_schedule, double tol) {
    if (eps_schedule.size() < 2) throw std::invalid_argument("epsilon route: need at least two eps values");
    std::vector<double> eps(eps_schedule.begin(), eps_schedule.end());
    if (!std::is_sorted(eps.rbegin(), eps.rend()) || eps.back() <= 0.0) {
        throw std::invalid_argument("epsilon route: schedule must be positive and decreasing");
    }
    EpsilonRouteResult out;
    out.eps = eps;
    for (double a : contour_arguments(base, pert, lambda, eps)) out.samples.push_back(a / std::numbers::pi);

    // Neville table: t[i][j] interpolates samples i-j..i and is evaluated at eps = 0.
    const std::size_t n = eps.size();
    std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        t[i][0] = out.samples[i];
        for (std::size_t j = 1; j <= i; ++j) {
            const double e_hi = eps[i - j];
            const double e_lo = eps[i];
            t[i][j] = (e_hi * t[i][j - 1] - e_lo * t[i - 1][j - 1]) / (e_hi - e_lo);
        }
    }
    double best = INFINITY;
    double best_value = out.samples.back();
    for (std::size_t i = 1; i < n; ++i) {
        for (std::size_t j = 1; j <= i; ++j) {
            const double est = std::max(std::abs(t[i][j] - t[i][j - 1]), std::abs(t[i][j] - t[i - 1][j - 1]));
            if (est < best) {
                best = est;
                best_value = t[i][j];
            }
        }
    }
    out.value = best_value;
    out.error_estimate = best;
    if (!(best <= tol)) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "epsilon route: extrapolation did not converge at lambda = " << lambda << " (estimate " << best
            << "); samples:";
        for (std::size_t i = 0; i < n; ++i) msg << " [" << eps[i] << ": " << out.samples[i] << "]";
        throw ExtrapolationError(msg.str());
    }
    return out;
}

}  // namespace ssf
