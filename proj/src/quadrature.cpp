#include "ssf/quadrature.hpp"

#include <array>
#include <cmath>
#include <algorithm>
#include <sstream>
#include <vector>

#include "ssf/errors.hpp"

namespace ssf {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
};

// Returns the panel, or the abscissa of a node the integrand refused.
struct PanelOutcome {
    std::optional<Panel> panel;
    double bad_node = 0.0;
};

PanelOutcome gk15(const GuardedIntegrand& f, double a, double b, int& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double kronrod = 0.0;
    double gauss = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = kKronrodNodes[i];
        if (i == 7) {
            ++evals;
            auto fc = f(c);
            if (!fc) return {std::nullopt, c};
            kronrod += kKronrodWeights[i] * *fc;
            gauss += kGaussWeights[3] * *fc;
            continue;
        }
        ++evals;
        auto f1 = f(c - h * x);
        if (!f1) return {std::nullopt, c - h * x};
        ++evals;
        auto f2 = f(c + h * x);
        if (!f2) return {std::nullopt, c + h * x};
        kronrod += kKronrodWeights[i] * (*f1 + *f2);
        if (i % 2 == 1) gauss += kGaussWeights[i / 2] * (*f1 + *f2);
    }
    Panel p{a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
    return {p, 0.0};
}

}  // namespace

QuadratureResult integrate_adaptive(const GuardedIntegrand& f, double a, double b,
                                    const QuadratureOptions& opts) {
    QuadratureResult out;
    std::vector<Panel> panels;
    std::vector<std::pair<double, double>> pending{{a, b}};

    auto evaluate_pending = [&]() {
        while (!pending.empty()) {
            auto [lo, hi] = pending.back();
            pending.pop_back();
            if (!(hi > lo)) continue;
            auto outcome = gk15(f, lo, hi, out.evaluations);
            if (outcome.panel) {
                panels.push_back(*outcome.panel);
                continue;
            }
            if (++out.forced_splits > opts.max_intervals) {
                throw QuadratureError("integrate_adaptive: too many singular nodes", lo, hi, INFINITY);
            }
            pending.emplace_back(lo, outcome.bad_node);
            pending.emplace_back(outcome.bad_node, hi);
        }
    };

    auto error_sum = [&]() {
        double e = 0.0;
        for (const auto& p : panels) e += p.error;
        return e;
    };

    evaluate_pending();
    while (error_sum() > opts.abs_tol) {
        auto worst = std::max_element(panels.begin(), panels.end(),
                                      [](const Panel& x, const Panel& y) { return x.error < y.error; });
        if (static_cast<int>(panels.size()) >= opts.max_intervals) {
            std::ostringstream msg;
            msg << "integrate_adaptive: no convergence on [" << a << ", " << b << "], error "
                << error_sum() << ", worst subinterval [" << worst->a << ", " << worst->b
                << "] error " << worst->error;
            throw QuadratureError(msg.str(), worst->a, worst->b, worst->error);
        }
        const double lo = worst->a, hi = worst->b, mid = 0.5 * (lo + hi);
        panels.erase(worst);
        pending.emplace_back(lo, mid);
        pending.emplace_back(mid, hi);
        evaluate_pending();
    }
    std::sort(panels.begin(), panels.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    for (const auto& p : panels) out.value += p.value;
    out.error = error_sum();
    out.intervals = static_cast<int>(panels.size());
    return out;
}

}  // namespace ssf
