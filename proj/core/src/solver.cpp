#include "mist/solver.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <sstream>

#include "mist/errors.hpp"

namespace mist {

namespace {

constexpr double kDescentSlack = 1e-12;
constexpr int kMaxHalvings = 30;
constexpr int kMaxBisections = 200;
constexpr int kMaxBracketDoublings = 64;
constexpr double kBisectionTol = 1e-10;

double safe_objective(const Problem& problem, const Eigen::VectorXd& packed) {
    try {
        return total_objective(problem, packed);
    } catch (const OverflowError&) {
        return std::numeric_limits<double>::infinity();
    }
}

// d/db of lambda * eps * ||beta||^2 over packed coordinates (intercept excluded).
Eigen::VectorXd ridge_gradient(const Problem& problem, const Eigen::VectorXd& b) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(b.size());
    const double c = 2.0 * problem.penalty().lambda * problem.penalty().epsilon;
    if (c == 0.0) return g;
    const auto off = problem.offset();
    g.tail(b.size() - off) = c * b.tail(b.size() - off);
    return g;
}

Surrogate resolve_surrogate(const Problem& problem, Surrogate requested) {
    if (requested != Surrogate::Auto) return requested;
    return problem.penalty().flat_tail() ? Surrogate::Quadratic : Surrogate::Linearized;
}

double inner_step(const Problem& problem, const SolverConfig& config) {
    const double lipschitz =
        fidelity_curvature(problem, config) + 2.0 * problem.penalty().lambda * problem.penalty().epsilon;
    return config.safety * 2.0 / lipschitz;
}

std::function<double(std::size_t)> relaxation_fn(const SolverConfig& config) {
    if (config.relaxation_schedule) return config.relaxation_schedule;
    const double d = config.relaxation;
    return [d](std::size_t) { return d; };
}

// Minimizes a convex scalar function whose smooth part has derivative
// `dsmooth` plus tau * |b|.  Checks the subgradient condition at 0, then
// brackets the root of the one-sided derivative by doubling and bisects.
double minimize_coordinate(const std::function<double(double)>& dsmooth, double tau, Eigen::Index j,
                           double scale_hint) {
    if (tau == kInf) return 0.0;
    const double d0 = dsmooth(0.0);
    if (std::abs(d0) <= tau) return 0.0;
    const double sign = d0 < -tau ? 1.0 : -1.0;  // side of the minimizer
    // h is increasing in t along the chosen half-line b = sign * t, t >= 0
    auto h = [&](double t) { return sign * (dsmooth(sign * t) + sign * tau); };

    double lo = 0.0;
    double hi = std::max(1.0, 2.0 * std::abs(scale_hint));
    int doublings = 0;
    while (h(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > kMaxBracketDoublings) {
            std::ostringstream os;
            os << "coordinate " << j << ": could not bracket the scalar minimizer";
            throw ConvergenceError(os.str(), Eigen::VectorXd::Constant(1, sign * hi), h(hi));
        }
    }
    for (int it = 0; it < kMaxBisections; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= kBisectionTol * std::max(1.0, mid) || mid == lo || mid == hi) return sign * mid;
        const double hm = h(mid);
        if (hm == 0.0) return sign * mid;
        (hm < 0.0 ? lo : hi) = mid;
    }
    std::ostringstream os;
    os << "coordinate " << j << ": scalar bisection did not converge";
    throw ConvergenceError(os.str(), Eigen::VectorXd::Constant(1, sign * 0.5 * (lo + hi)), hi - lo);
}

// theta + (omega/2) grad l, soft-thresholded and shrunk on penalized coordinates.
Eigen::VectorXd glm_update(const Problem& problem, double omega, const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd grad = problem.model().gradient(alpha);
    const Eigen::VectorXd tau = packed_thresholds(problem, alpha);
    const auto off = problem.offset();
    const double shrink = 1.0 / (1.0 + omega * problem.penalty().lambda * problem.penalty().epsilon);
    Eigen::VectorXd out(alpha.size());
    if (off == 1) out[0] = alpha[0] + 0.5 * omega * grad[0];
    for (Eigen::Index j = off; j < alpha.size(); ++j)
        out[j] = shrink * soft_threshold(alpha[j] + 0.5 * omega * grad[j], 0.5 * omega * tau[j]);
    return out;
}

// Shared descent safeguard.  `attempt(scale)` produces a candidate with the
// step parameter multiplied by `scale`; the scale halves until the objective
// does not increase.
template <typename Attempt>
Eigen::VectorXd safeguarded(const Problem& problem, const SolverConfig& config, const Eigen::VectorXd& theta,
                            double objective_at_theta, Attempt&& attempt, std::size_t& halvings,
                            std::optional<double>& cached, bool can_halve) {
    double scale = 1.0;
    for (int h = 0;; ++h) {
        Eigen::VectorXd cand = attempt(scale);
        if (!config.descent_check) {
            cached.reset();
            return cand;
        }
        const double obj = safe_objective(problem, cand);
        if (obj <= objective_at_theta + kDescentSlack) {
            cached = obj;
            return cand;
        }
        // An increase at a step below the coefficient tolerance is rounding
        // noise at a fixed point; stay put.
        if ((cand - theta).norm() <= config.coef_tol) {
            cached = objective_at_theta;
            return theta;
        }
        if (!can_halve || h >= kMaxHalvings) {
            std::ostringstream os;
            os << "descent safeguard failed: objective rose from " << objective_at_theta << " to " << obj;
            throw ConvergenceError(os.str(), theta, obj - objective_at_theta);
        }
        scale *= 0.5;
        ++halvings;
    }
}

class GlmMap final : public MmMap {
public:
    GlmMap(const Problem& problem, const SolverConfig& config)
        : problem_(problem), config_(config), omega_(resolve_step(problem, config)) {}

    Eigen::VectorXd apply(const Eigen::VectorXd& theta, double objective_at_theta) override {
#ifndef NDEBUG
        const double touch = glm_surrogate(problem_, omega_, theta, theta);
        assert(std::abs(touch - objective_at_theta) <= 1e-8 * (1.0 + std::abs(objective_at_theta)));
#endif
        return safeguarded(
            problem_, config_, theta, objective_at_theta,
            [&](double scale) { return glm_update(problem_, omega_ * scale, theta); }, halvings_, cached_, true);
    }
    double objective(const Eigen::VectorXd& theta) const override { return safe_objective(problem_, theta); }
    std::size_t halvings() const noexcept override { return halvings_; }
    std::optional<double> last_objective() const override { return cached_; }

private:
    const Problem& problem_;
    SolverConfig config_;
    double omega_;
    std::size_t halvings_ = 0;
    std::optional<double> cached_;
};

class GenericMap final : public MmMap {
public:
    GenericMap(const Problem& problem, const SolverConfig& config)
        : problem_(problem), config_(config), kind_(resolve_surrogate(problem, config.surrogate)) {
        if (kind_ == Surrogate::Quadratic)
            omega_ = resolve_step(problem, config);
        else
            step_ = inner_step(problem, config);
        relax_ = relaxation_fn(config);
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& theta, double objective_at_theta) override {
        const Eigen::VectorXd tau = packed_thresholds(problem_, theta);
        const FidelityModel& model = problem_.model();
        if (kind_ == Surrogate::Quadratic) {
            const Eigen::VectorXd grad_l = model.gradient(theta);
            return safeguarded(
                problem_, config_, theta, objective_at_theta,
                [&](double scale) {
                    const double omega = omega_ * scale;
                    const double lipschitz =
                        2.0 / omega + 2.0 * problem_.penalty().lambda * problem_.penalty().epsilon;
                    GradientOracle grad_m = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
                        return -grad_l + (2.0 / omega) * (b - theta) + ridge_gradient(problem_, b);
                    };
                    return ist_minimize(grad_m, tau, 1.0 / lipschitz, theta, relax_, config_.inner_tol,
                                        config_.inner_max)
                        .b;
                },
                halvings_, cached_, true);
        }
        GradientOracle grad_m = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
            return -model.gradient(b) + ridge_gradient(problem_, b);
        };
        return safeguarded(
            problem_, config_, theta, objective_at_theta,
            [&](double scale) {
                return ist_minimize(grad_m, tau, step_ * scale, theta, relax_, config_.inner_tol, config_.inner_max)
                    .b;
            },
            halvings_, cached_, true);
    }
    double objective(const Eigen::VectorXd& theta) const override { return safe_objective(problem_, theta); }
    std::size_t halvings() const noexcept override { return halvings_; }
    std::optional<double> last_objective() const override { return cached_; }

private:
    const Problem& problem_;
    SolverConfig config_;
    Surrogate kind_;
    double omega_ = 0.0;
    double step_ = 0.0;
    std::function<double(std::size_t)> relax_;
    std::size_t halvings_ = 0;
    std::optional<double> cached_;
};

// Componentwise minimization of the separable Poisson surrogate.  With
// `fixed_tau` the thresholds stay frozen (used for the one-step estimator).
class PoissonMap final : public MmMap {
public:
    PoissonMap(const Problem& problem, const SolverConfig& config, std::optional<Eigen::VectorXd> fixed_tau = {})
        : problem_(problem), config_(config), fixed_tau_(std::move(fixed_tau)) {
        if (problem.model().family() != Family::Poisson)
            throw ValidationError("poisson_mm_fit requires a poisson model");
    }

    Eigen::VectorXd minimize(const Eigen::VectorXd& theta) const {
        const PoissonMajorizer maj(problem_.model(), theta);
        const Eigen::VectorXd tau = fixed_tau_ ? *fixed_tau_ : packed_thresholds(problem_, theta);
        const auto off = problem_.offset();
        const double ridge = problem_.penalty().lambda * problem_.penalty().epsilon;
        Eigen::VectorXd out(theta.size());
        for (Eigen::Index j = 0; j < theta.size(); ++j) {
            const bool penalized = j >= off;
            auto dsmooth = [&](double b) { return maj.derivative(j, b) + (penalized ? 2.0 * ridge * b : 0.0); };
            out[j] = minimize_coordinate(dsmooth, penalized ? tau[j] : 0.0, j, theta[j]);
        }
        return out;
    }

    Eigen::VectorXd apply(const Eigen::VectorXd& theta, double objective_at_theta) override {
        return safeguarded(
            problem_, config_, theta, objective_at_theta, [&](double) { return minimize(theta); }, halvings_,
            cached_, false);
    }
    double objective(const Eigen::VectorXd& theta) const override { return safe_objective(problem_, theta); }
    std::optional<double> last_objective() const override { return cached_; }

private:
    const Problem& problem_;
    SolverConfig config_;
    std::optional<Eigen::VectorXd> fixed_tau_;
    std::size_t halvings_ = 0;
    std::optional<double> cached_;
};

void require_dims(const Problem& problem, const Coefficients& c) {
    if (c.beta.size() != problem.model().p())
        throw DimensionError("start vector length does not match the number of predictors");
    if (c.intercept.has_value() != problem.model().has_intercept())
        throw DimensionError("start intercept presence does not match the design");
}

}  // namespace

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::CoefTol: return "coef_tol";
        case Termination::ObjTol: return "obj_tol";
        case Termination::MaxIter: return "max_iter";
    }
    return "unknown";
}

std::string_view to_string(StartKind s) {
    switch (s) {
        case StartKind::Zero: return "zero";
        case StartKind::Mle: return "mle";
        case StartKind::OneStep: return "onestep";
    }
    return "unknown";
}

StartKind start_kind_from_string(std::string_view name) {
    if (name == "zero") return StartKind::Zero;
    if (name == "mle") return StartKind::Mle;
    if (name == "onestep" || name == "one-step" || name == "1s") return StartKind::OneStep;
    throw ValidationError("unknown start '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    if (step_omega && !(*step_omega > 0.0)) throw ValidationError("step_omega must be > 0");
    if (!(safety > 0.0 && safety <= 1.0)) throw ValidationError("safety must lie in (0, 1]");
    if (!(relaxation > 0.0 && relaxation <= 1.0)) throw ValidationError("relaxation must lie in (0, 1]");
    if (!(coef_tol > 0.0) || !(obj_tol > 0.0) || !(inner_tol > 0.0))
        throw ValidationError("tolerances must be > 0");
    if (max_outer < 1 || inner_max < 1) throw ValidationError("iteration caps must be >= 1");
    if (poisson_radius && !(*poisson_radius > 0.0)) throw ValidationError("poisson_radius must be > 0");
}

double SolverConfig::relaxation_at(std::size_t n) const {
    return relaxation_schedule ? relaxation_schedule(n) : relaxation;
}

Problem::Problem(std::shared_ptr<const FidelityModel> model, PenaltySpec penalty)
    : model_(std::move(model)), penalty_(std::move(penalty)) {
    if (!model_) throw ValidationError("problem requires a model");
    penalty_.validate();
    if (penalty_.adaptive() && static_cast<Eigen::Index>(penalty_.weights.size()) != model_->p())
        throw DimensionError("adaptive weight vector length differs from the number of predictors");
}

Problem::Problem(FidelityModel model, PenaltySpec penalty)
    : Problem(std::make_shared<const FidelityModel>(std::move(model)), std::move(penalty)) {}

double soft_threshold(double u, double v) {
    if (v == kInf) return 0.0;
    const double m = std::abs(u) - v;
    if (m <= 0.0) return 0.0;
    return u < 0.0 ? -m : m;
}

Eigen::VectorXd soft_threshold_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size()) throw DimensionError("soft_threshold_vec: length mismatch");
    Eigen::VectorXd out(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j) out[j] = soft_threshold(u[j], v[j]);
    return out;
}

double total_objective(const Problem& problem, const Eigen::VectorXd& packed) {
    const double g = problem.model().neg_loglik(packed);
    return g + penalty_total(problem.penalty(), packed.tail(problem.model().p()));
}

double total_objective(const Problem& problem, const Coefficients& coef) {
    require_dims(problem, coef);
    return total_objective(problem, coef.packed());
}

Eigen::VectorXd packed_thresholds(const Problem& problem, const Eigen::VectorXd& packed) {
    const auto off = problem.offset();
    Eigen::VectorXd tau(packed.size());
    if (off == 1) tau[0] = 0.0;
    tau.tail(packed.size() - off) = threshold_vector(problem.penalty(), packed.tail(packed.size() - off));
    return tau;
}

Eigen::VectorXd project_pinned(const Problem& problem, Eigen::VectorXd packed) {
    const auto off = problem.offset();
    for (Eigen::Index j = off; j < packed.size(); ++j)
        if (problem.penalty().pinned(static_cast<std::size_t>(j - off))) packed[j] = 0.0;
    return packed;
}

IstResult ist_minimize(const GradientOracle& grad_m, const Eigen::VectorXd& tau, double omega, Eigen::VectorXd b0,
                       const std::function<double(std::size_t)>& relaxation, double inner_tol,
                       std::size_t inner_max) {
    if (tau.size() != b0.size()) throw DimensionError("ist_minimize: tau and start lengths differ");
    if (!(omega > 0.0)) throw ValidationError("ist_minimize: omega must be > 0");
    const Eigen::VectorXd scaled_tau = omega * tau;
    IstResult res;
    res.b = std::move(b0);
    for (std::size_t n = 1; n <= inner_max; ++n) {
        const Eigen::VectorXd d = res.b - omega * grad_m(res.b);
        Eigen::VectorXd next = soft_threshold_vec(d, scaled_tau);
        const double delta = relaxation ? relaxation(n) : 1.0;
        if (delta != 1.0) next = res.b + delta * (next - res.b);
        res.last_step = (next - res.b).norm();
        res.b = std::move(next);
        res.iterations = n;
        if (res.last_step <= inner_tol) return res;
    }
    throw ConvergenceError("ist_minimize: inner iteration cap reached", res.b, res.last_step);
}

double fidelity_curvature(const Problem& problem, const SolverConfig& config) {
    const FidelityModel& model = problem.model();
    if (model.family() == Family::Poisson) {
        if (!config.poisson_radius)
            throw NotGloballyLipschitz(
                "poisson fidelity needs poisson_radius for gradient-step maps; use poisson_mm_fit instead");
        return poisson_region_curvature_bound(model, *config.poisson_radius);
    }
    const double bound = curvature_bound(model);
    if (!(bound > 0.0)) throw ValidationError("design has zero curvature (all-zero columns?)");
    return bound;
}

double resolve_step(const Problem& problem, const SolverConfig& config) {
    const double limit = 2.0 / fidelity_curvature(problem, config);
    if (config.step_omega) {
        if (*config.step_omega > limit * (1.0 + 1e-12)) {
            std::ostringstream os;
            os << "step_omega " << *config.step_omega << " exceeds the admissible bound 2/lambda* = " << limit;
            throw ValidationError(os.str());
        }
        return *config.step_omega;
    }
    return config.safety * limit;
}

double glm_surrogate(const Problem& problem, double omega, const Eigen::VectorXd& alpha,
                     const Eigen::VectorXd& beta) {
    const FidelityModel& model = problem.model();
    const auto off = problem.offset();
    const Eigen::VectorXd diff = beta - alpha;
    double s = model.neg_loglik(alpha) - model.gradient(alpha).dot(diff) + diff.squaredNorm() / omega;
    const PenaltySpec& pen = problem.penalty();
    for (Eigen::Index j = off; j < alpha.size(); ++j) {
        const auto c = static_cast<std::size_t>(j - off);
        const double a = std::abs(alpha[j]);
        const double b = std::abs(beta[j]);
        const double tau = penalty_derivative(pen, c, a);
        if (tau == kInf) {
            if (b != 0.0) return kInf;
            continue;
        }
        const double gamma = penalty_value(pen, c, a) - tau * a;
        s += tau * b + gamma + pen.lambda * pen.epsilon * beta[j] * beta[j];
    }
    return s;
}

Eigen::VectorXd glm_surrogate_minimizer(const Problem& problem, double omega, const Eigen::VectorXd& alpha) {
    return glm_update(problem, omega, alpha);
}

MapKind default_map_kind(const Problem& problem) {
    return problem.model().family() == Family::Poisson ? MapKind::Poisson : MapKind::Glm;
}

std::unique_ptr<MmMap> make_map(const Problem& problem, const SolverConfig& config, MapKind kind) {
    config.validate();
    switch (kind) {
        case MapKind::Glm: return std::make_unique<GlmMap>(problem, config);
        case MapKind::Poisson: return std::make_unique<PoissonMap>(problem, config);
        case MapKind::Generic: return std::make_unique<GenericMap>(problem, config);
    }
    throw ValidationError("unknown map kind");
}

FitResult iterate_map(const Problem& problem, const SolverConfig& config, MmMap& map, const Coefficients& start) {
    require_dims(problem, start);
    Eigen::VectorXd theta = project_pinned(problem, start.packed());
    double obj = map.objective(theta);
    if (!std::isfinite(obj)) throw ValidationError("objective is not finite at the start point");

    FitResult res;
    if (config.record_trace) res.trace.push_back(obj);
    for (std::size_t n = 1; n <= config.max_outer; ++n) {
        Eigen::VectorXd next = map.apply(theta, obj);
        const auto cached = map.last_objective();
        const double next_obj = cached ? *cached : map.objective(next);
        ++res.map_evals;
        res.outer_iters = n;
        const double step = (next - theta).norm();
        const double dobj = std::abs(obj - next_obj);
        theta = std::move(next);
        obj = next_obj;
        if (config.record_trace) res.trace.push_back(obj);
        if (step < config.coef_tol) {
            res.termination = Termination::CoefTol;
            break;
        }
        if (dobj < config.obj_tol) {
            res.termination = Termination::ObjTol;
            break;
        }
    }
    res.coef = Coefficients::unpack(theta, problem.model().has_intercept());
    res.objective = obj;
    res.kkt_residual = kkt_residual(problem, res.coef);
    res.step_halvings = map.halvings();
    return res;
}

FitResult mm_outer(const Problem& problem, const SolverConfig& config, const Coefficients& start) {
    auto map = make_map(problem, config, MapKind::Generic);
    return iterate_map(problem, config, *map, start);
}

FitResult glm_mm_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start) {
    auto map = make_map(problem, config, MapKind::Glm);
    return iterate_map(problem, config, *map, start);
}

FitResult poisson_mm_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start) {
    auto map = make_map(problem, config, MapKind::Poisson);
    return iterate_map(problem, config, *map, start);
}

FitResult one_step_fit(const Problem& problem, const SolverConfig& config) {
    config.validate();
    const FidelityModel& model = problem.model();
    const Eigen::VectorXd mle = maximum_likelihood(model);
    const Eigen::VectorXd tau = packed_thresholds(problem, mle);
    const Eigen::VectorXd start = project_pinned(problem, mle);

    Eigen::VectorXd b;
    if (model.family() == Family::Poisson) {
        // the penalty-linearized surrogate is itself minimized by the
        // componentwise Poisson MM with the thresholds held fixed
        PoissonMap inner(problem, config, tau);
        b = start;
        double step = kInf;
        // coordinates are only resolved to the bisection tolerance
        const auto tol = [&] {
            return std::max(config.inner_tol, 10.0 * kBisectionTol * std::max(1.0, b.lpNorm<Eigen::Infinity>()));
        };
        for (std::size_t it = 0; step > tol(); ++it) {
            if (it >= config.inner_max)
                throw ConvergenceError("one_step_fit: inner poisson iterations exhausted", b, step);
            Eigen::VectorXd next = inner.minimize(b);
            step = (next - b).norm();
            b = std::move(next);
        }
    } else {
        const double omega = inner_step(problem, config);
        GradientOracle grad_m = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
            return -model.gradient(v) + ridge_gradient(problem, v);
        };
        auto res = ist_minimize(grad_m, tau, omega, start, relaxation_fn(config), config.inner_tol, config.inner_max);
        b = std::move(res.b);
    }

    FitResult out;
    out.coef = Coefficients::unpack(b, model.has_intercept());
    out.objective = total_objective(problem, b);
    if (config.record_trace) out.trace = {safe_objective(problem, start), out.objective};
    out.outer_iters = 1;
    out.map_evals = 1;
    out.termination = Termination::CoefTol;
    out.kkt_residual = kkt_residual(problem, out.coef);
    return out;
}

double kkt_residual(const Problem& problem, const Coefficients& coef) {
    require_dims(problem, coef);
    const Eigen::VectorXd theta = coef.packed();
    const Eigen::VectorXd s = -problem.model().gradient(theta) + ridge_gradient(problem, theta);
    const auto off = problem.offset();
    double worst = off == 1 ? std::abs(s[0]) : 0.0;
    for (Eigen::Index j = off; j < theta.size(); ++j) {
        const auto c = static_cast<std::size_t>(j - off);
        const double b = theta[j];
        double r;
        if (b != 0.0) {
            const double d = penalty_derivative(problem.penalty(), c, std::abs(b));
            r = std::abs(s[j] + d * (b > 0.0 ? 1.0 : -1.0));
        } else {
            r = std::max(std::abs(s[j]) - penalty_derivative(problem.penalty(), c, 0.0), 0.0);
        }
        worst = std::max(worst, r);
    }
    return worst;
}

Coefficients start_point(const Problem& problem, const SolverConfig& config, StartKind kind) {
    const FidelityModel& model = problem.model();
    switch (kind) {
        case StartKind::Zero:
            return Coefficients::zero(model.p(), model.has_intercept());
        case StartKind::Mle:
            return Coefficients::unpack(project_pinned(problem, maximum_likelihood(model)), model.has_intercept());
        case StartKind::OneStep:
            return one_step_fit(problem, config).coef;
    }
    throw ValidationError("unknown start kind");
}

}  // namespace mist
