#pragma once

#include <stdexcept>
#include <string>

namespace ssf {

// Argument outside the closed upper half-plane (or otherwise outside an operation's domain).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Boundary evaluation too close to the embedded level a0 of the base operator.
class PoleError : public std::runtime_error {
public:
    PoleError(const std::string& what, double lambda, double level)
        : std::runtime_error(what), lambda_(lambda), level_(level) {}
    double lambda() const noexcept { return lambda_; }
    double level() const noexcept { return level_; }

private:
    double lambda_;
    double level_;
};

// Phase continuation of log(Delta) failed even at the finest step.
class BranchTrackingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The two independent routes for the total SSF disagree.
class RouteDisagreementError : public std::runtime_error {
public:
    RouteDisagreementError(const std::string& what, double chained, double contour)
        : std::runtime_error(what), chained_(chained), contour_(contour) {}
    double chained() const noexcept { return chained_; }
    double contour() const noexcept { return contour_; }

private:
    double chained_;
    double contour_;
};

// |det(I + rMG(lambda+i0))| fell below the configured floor.
class SingularityFloorError : public std::runtime_error {
public:
    SingularityFloorError(const std::string& what, double r, double modulus)
        : std::runtime_error(what), r_(r), modulus_(modulus) {}
    double r() const noexcept { return r_; }
    double modulus() const noexcept { return modulus_; }

private:
    double r_;
    double modulus_;
};

class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double worst_a, double worst_b, double worst_error)
        : std::runtime_error(what), worst_a_(worst_a), worst_b_(worst_b), worst_error_(worst_error) {}
    double worst_a() const noexcept { return worst_a_; }
    double worst_b() const noexcept { return worst_b_; }
    double worst_error() const noexcept { return worst_error_; }

private:
    double worst_a_;
    double worst_b_;
    double worst_error_;
};

class ExtrapolationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GridMismatchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace ssf
