#include "mist/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mist/errors.hpp"

namespace mist {

namespace {

struct FamilyName {
    PenaltyFamily family;
    std::string_view name;
};

constexpr FamilyName kFamilyNames[] = {
    {PenaltyFamily::Lasso, "lasso"},
    {PenaltyFamily::AdaptiveLasso, "adaptive_lasso"},
    {PenaltyFamily::ElasticNet, "elastic_net"},
    {PenaltyFamily::AdaptiveElasticNet, "adaptive_elastic_net"},
    {PenaltyFamily::Scad, "scad"},
    {PenaltyFamily::Mcp, "mcp"},
    {PenaltyFamily::Geman, "geman"},
    {PenaltyFamily::Log, "log"},
};

void check_r(double r) {
    if (!(r >= 0.0)) {
        std::ostringstream os;
        os << "penalty evaluated at negative or NaN argument r=" << r;
        throw DomainError(os.str());
    }
}

}  // namespace

std::string_view to_string(PenaltyFamily f) {
    for (const auto& e : kFamilyNames)
        if (e.family == f) return e.name;
    return "unknown";
}

PenaltyFamily penalty_family_from_string(std::string_view name) {
    for (const auto& e : kFamilyNames)
        if (e.name == name) return e.family;
    // short aliases used in tables and on the command line
    if (name == "las") return PenaltyFamily::Lasso;
    if (name == "alas") return PenaltyFamily::AdaptiveLasso;
    if (name == "en") return PenaltyFamily::ElasticNet;
    if (name == "aen") return PenaltyFamily::AdaptiveElasticNet;
    throw ValidationError("unknown penalty family '" + std::string(name) + "'");
}

void PenaltySpec::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("penalty lambda must be finite and > 0");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ValidationError("penalty epsilon must be finite and >= 0");
    if ((family == PenaltyFamily::ElasticNet || family == PenaltyFamily::AdaptiveElasticNet) && epsilon <= 0.0)
        throw ValidationError("elastic-net families require epsilon > 0");
    if (flat_tail() && !(a > 2.0)) throw ValidationError("SCAD/MCP shape parameter a must exceed 2");
    if ((family == PenaltyFamily::Geman || family == PenaltyFamily::Log) && !(delta > 0.0))
        throw ValidationError("Geman/Log shape parameter delta must be > 0");
    if (adaptive() && weights.empty()) throw ValidationError("adaptive penalties require a weight vector");
    if (!adaptive() && !weights.empty()) throw ValidationError("weights are only allowed for adaptive penalties");
    for (double w : weights)
        if (!(w >= 0.0)) throw ValidationError("adaptive weights must be nonnegative");
}

double PenaltySpec::weight(std::size_t j) const {
    if (weights.empty()) return 1.0;
    if (j >= weights.size()) throw DimensionError("coordinate index exceeds weight vector length");
    return weights[j];
}

double penalty_value(const PenaltySpec& spec, std::size_t j, double r) {
    check_r(r);
    const double lam = spec.lambda;
    switch (spec.family) {
        case PenaltyFamily::Lasso:
        case PenaltyFamily::AdaptiveLasso:
        case PenaltyFamily::ElasticNet:
        case PenaltyFamily::AdaptiveElasticNet: {
            const double w = spec.weight(j);
            if (r == 0.0) return 0.0;
            return w == kInf ? kInf : lam * w * r;
        }
        case PenaltyFamily::Scad: {
            const double a = spec.a;
            if (r <= lam) return lam * r;
            if (r <= a * lam) return (2.0 * a * lam * r - r * r - lam * lam) / (2.0 * (a - 1.0));
            return lam * lam * (a + 1.0) / 2.0;
        }
        case PenaltyFamily::Mcp: {
            const double a = spec.a;
            if (r <= a * lam) return lam * r - r * r / (2.0 * a);
            return a * lam * lam / 2.0;
        }
        case PenaltyFamily::Geman:
            return lam * spec.delta * r / (1.0 + spec.delta * r);
        case PenaltyFamily::Log:
            return lam * std::log1p(spec.delta * r);
    }
    return 0.0;
}

double penalty_derivative(const PenaltySpec& spec, std::size_t j, double r) {
    check_r(r);
    const double lam = spec.lambda;
    switch (spec.family) {
        case PenaltyFamily::Lasso:
        case PenaltyFamily::AdaptiveLasso:
        case PenaltyFamily::ElasticNet:
        case PenaltyFamily::AdaptiveElasticNet: {
            const double w = spec.weight(j);
            return w == kInf ? kInf : lam * w;
        }
        case PenaltyFamily::Scad: {
            const double a = spec.a;
            if (r <= lam) return lam;
            return std::max(a * lam - r, 0.0) / (a - 1.0);
        }
        case PenaltyFamily::Mcp:
            return std::max(lam - r / spec.a, 0.0);
        case PenaltyFamily::Geman: {
            const double d = 1.0 + spec.delta * r;
            return lam * spec.delta / (d * d);
        }
        case PenaltyFamily::Log:
            return lam * spec.delta / (spec.delta * r + 1.0);
    }
    return 0.0;
}

Eigen::VectorXd threshold_vector(const PenaltySpec& spec, const Eigen::VectorXd& alpha) {
    if (!spec.weights.empty() && static_cast<std::size_t>(alpha.size()) != spec.weights.size())
        throw DimensionError("threshold_vector: coefficient length does not match weight vector");
    Eigen::VectorXd tau(alpha.size());
    for (Eigen::Index j = 0; j < alpha.size(); ++j)
        tau[j] = penalty_derivative(spec, static_cast<std::size_t>(j), std::abs(alpha[j]));
    return tau;
}

double penalty_total(const PenaltySpec& spec, const Eigen::VectorXd& beta) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < beta.size(); ++j)
        total += penalty_value(spec, static_cast<std::size_t>(j), std::abs(beta[j]));
    if (spec.epsilon > 0.0) total += spec.lambda * spec.epsilon * beta.squaredNorm();
    return total;
}

P1Report verify_p1(const ScalarPenalty& penalty, std::span<const double> grid) {
    if (grid.empty()) throw ValidationError("verify_p1: empty grid");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw ValidationError("verify_p1: grid must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw ValidationError("verify_p1: grid must be strictly increasing");
    }

    P1Report report;
    auto fail = [](P1Clause& c, double r) {
        if (c.pass) {
            c.pass = false;
            c.first_violation = r;
        }
    };

    const double d0 = penalty.derivative(0.0);
    if (!(d0 > 0.0) || !std::isfinite(d0)) fail(report.finite_at_origin, 0.0);

    double prev = d0;
    for (double r : grid) {
        const double v = penalty.value(r);
        const double d = penalty.derivative(r);
        if (!(v > 0.0)) fail(report.positive, r);
        if (!(d >= 0.0)) fail(report.nondecreasing, r);
        // concavity surrogate: derivative never increases (a few ulps of slack)
        if (d > prev + 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(prev)))
            fail(report.concave, r);
        prev = d;
    }
    return report;
}

P1Report verify_p1(const PenaltySpec& spec, std::span<const double> grid) {
    spec.validate();
    ScalarPenalty scalar{
        [&spec](double r) { return penalty_value(spec, 0, r); },
        [&spec](double r) { return penalty_derivative(spec, 0, r); },
    };
    return verify_p1(scalar, grid);
}

Eigen::VectorXd compute_adaptive_weights(const Eigen::VectorXd& pilot, double gamma) {
    if (!(gamma > 0.0)) throw ValidationError("adaptive weight exponent gamma must be > 0");
    Eigen::VectorXd w(pilot.size());
    for (Eigen::Index j = 0; j < pilot.size(); ++j)
        w[j] = pilot[j] == 0.0 ? kInf : std::pow(std::abs(pilot[j]), -gamma);
    return w;
}

}  // namespace mist
