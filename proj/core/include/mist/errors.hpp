#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mist {

// Invalid argument values (bad penalty parameters, malformed responses, ...).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (e.g. r < 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DimensionError : public std::length_error {
public:
    using std::length_error::length_error;
};

// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when a global curvature bound is requested for a fidelity whose
// gradient is only locally Lipschitz (Poisson).
class NotGloballyLipschitz : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Numerical overflow while evaluating a likelihood; carries the offending iterate.
class OverflowError : public std::overflow_error {
public:
    OverflowError(const std::string& what, Eigen::VectorXd iterate)
        : std::overflow_error(what), iterate_(std::move(iterate)) {}
    const Eigen::VectorXd& iterate() const noexcept { return iterate_; }

private:
    Eigen::VectorXd iterate_;
};

// An iterative routine failed to reach its tolerance.  `last` holds the last
// iterate and `residual` the last convergence measure (step norm, Rayleigh
// quotient, ... depending on the routine).
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, Eigen::VectorXd last, double residual)
        : std::runtime_error(what), last_(std::move(last)), residual_(residual) {}
    const Eigen::VectorXd& last() const noexcept { return last_; }
    double residual() const noexcept { return residual_; }

private:
    Eigen::VectorXd last_;
    double residual_;
};

}  // namespace mist
