#pragma once

#include <functional>
#include <optional>

namespace ssf {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    int intervals = 0;
    int forced_splits = 0;
};

struct QuadratureOptions {
    double abs_tol = 1e-8;
    int max_intervals = 4000;
};

// Integrand returning nullopt marks a node it cannot evaluate; the enclosing
// interval is then split at that node so it only ever appears as an endpoint.
using GuardedIntegrand = std::function<std::optional<double>(double)>;

/// Globally adaptive 7/15-point Gauss-Kronrod integration on [a, b].
/// Throws QuadratureError (with the worst subinterval) when the budget runs out.
QuadratureResult integrate_adaptive(const GuardedIntegrand& f, double a, double b,
                                    const QuadratureOptions& opts = {});

}  // namespace ssf
