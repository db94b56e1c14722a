#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mist {

enum class PenaltyFamily {
    Lasso,
    AdaptiveLasso,
    ElasticNet,
    AdaptiveElasticNet,
    Scad,
    Mcp,
    Geman,
    Log,
};

inline constexpr double kDefaultScadA = 3.7;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view to_string(PenaltyFamily f);
PenaltyFamily penalty_family_from_string(std::string_view name);

// A separable penalty sum_j p(|beta_j|; lambda_j) plus the ridge term
// lambda * epsilon * ||beta||^2.  `weights` carries per-coordinate adaptive
// weights; +inf pins a coordinate at zero.
struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::Lasso;
    double lambda = 1.0;
    double epsilon = 0.0;
    double a = kDefaultScadA;
    double delta = 1.0;
    std::optional<double> gamma;  // exponent used to build adaptive weights, informational
    std::vector<double> weights;

    // Throws ValidationError when any invariant is violated.
    void validate() const;

    bool adaptive() const noexcept {
        return family == PenaltyFamily::AdaptiveLasso || family == PenaltyFamily::AdaptiveElasticNet;
    }
    // Lasso-type families whose scalar penalty is linear in r.
    bool linear() const noexcept {
        return family == PenaltyFamily::Lasso || family == PenaltyFamily::AdaptiveLasso ||
               family == PenaltyFamily::ElasticNet || family == PenaltyFamily::AdaptiveElasticNet;
    }
    // Penalties whose derivative reaches zero at a finite r (no strict LLA majorization).
    bool flat_tail() const noexcept { return family == PenaltyFamily::Scad || family == PenaltyFamily::Mcp; }

    // omega_j, 1 for non-adaptive families.
    double weight(std::size_t j) const;
    bool pinned(std::size_t j) const { return weight(j) == kInf; }
};

// p(r; lambda_j).  Throws DomainError for r < 0 (or NaN).
double penalty_value(const PenaltySpec& spec, std::size_t j, double r);

// Right derivative p'(r; lambda_j); at r = 0 this is p'(0+).
double penalty_derivative(const PenaltySpec& spec, std::size_t j, double r);

// tau_j = p'(|alpha_j|; lambda_j).  Pinned coordinates give +inf.
Eigen::VectorXd threshold_vector(const PenaltySpec& spec, const Eigen::VectorXd& alpha);

// sum_j p(|beta_j|; lambda_j) + lambda * epsilon * ||beta||^2.
double penalty_total(const PenaltySpec& spec, const Eigen::VectorXd& beta);

// Scalar penalty as a pair of callables; used to run the P1 check against
// arbitrary (possibly user supplied) shapes.
struct ScalarPenalty {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

struct P1Clause {
    bool pass = true;
    std::optional<double> first_violation;
};

struct P1Report {
    P1Clause positive;           // p(r) > 0 on the grid
    P1Clause nondecreasing;      // p'(r) >= 0
    P1Clause concave;            // p' nonincreasing along the grid
    P1Clause finite_at_origin;   // 0 < p'(0+) < inf
    bool all_pass() const {
        return positive.pass && nondecreasing.pass && concave.pass && finite_at_origin.pass;
    }
};

P1Report verify_p1(const ScalarPenalty& penalty, std::span<const double> grid);
P1Report verify_p1(const PenaltySpec& spec, std::span<const double> grid);

// omega_j = |pilot_j|^-gamma, +inf where the pilot is exactly zero.
Eigen::VectorXd compute_adaptive_weights(const Eigen::VectorXd& pilot, double gamma);

}  // namespace mist
