#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mist/fidelity.hpp"
#include "mist/penalty.hpp"

namespace mist {

enum class Termination { CoefTol, ObjTol, MaxIter };
std::string_view to_string(Termination t);

// Which h(beta, alpha) completes the surrogate in the generic MM loop.
//   Linearized: h = 0, i.e. only the penalty is linearized (needs p' > 0).
//   Quadratic:  h from the GLM construction; the surrogate is an isotropic
//               quadratic with curvature 2 / omega and strictly majorizes.
//   Auto:       Quadratic for SCAD/MCP, Linearized otherwise.
enum class Surrogate { Auto, Linearized, Quadratic };

struct SolverConfig {
    std::optional<double> step_omega;  // unset: omega = safety * 2 / curvature_bound
    double safety = 0.95;
    double relaxation = 1.0;  // constant delta_n in (0, 1] for the inner IST
    std::function<double(std::size_t)> relaxation_schedule;  // overrides `relaxation` when set
    double coef_tol = 1e-6;
    double obj_tol = 1e-6;
    std::size_t max_outer = 1'000'000;
    double inner_tol = 1e-8;
    std::size_t inner_max = 100'000;
    bool descent_check = true;
    Surrogate surrogate = Surrogate::Auto;
    // Radius of the ball used to bound the Poisson hessian when a
    // gradient-step map is requested for a Poisson model.
    std::optional<double> poisson_radius;
    bool record_trace = true;

    void validate() const;
    double relaxation_at(std::size_t n) const;
};

// Fidelity plus penalty.  The intercept is never penalized.
class Problem {
public:
    Problem(std::shared_ptr<const FidelityModel> model, PenaltySpec penalty);
    Problem(FidelityModel model, PenaltySpec penalty);

    const FidelityModel& model() const noexcept { return *model_; }
    const std::shared_ptr<const FidelityModel>& model_ptr() const noexcept { return model_; }
    const PenaltySpec& penalty() const noexcept { return penalty_; }
    Problem with_penalty(PenaltySpec penalty) const { return Problem(model_, std::move(penalty)); }

    Eigen::Index dim() const noexcept { return model_->dim(); }
    Eigen::Index offset() const noexcept { return model_->has_intercept() ? 1 : 0; }

private:
    std::shared_ptr<const FidelityModel> model_;
    PenaltySpec penalty_;
};

struct FitResult {
    Coefficients coef;
    double objective = 0.0;
    std::vector<double> trace;  // objective at the start and after every outer iteration
    std::size_t outer_iters = 0;
    std::size_t map_evals = 0;
    double kkt_residual = 0.0;
    Termination termination = Termination::MaxIter;
    std::size_t step_halvings = 0;  // descent safeguard activations
    std::size_t backtracks = 0;     // SQUAREM steplength backtracks
};

// sign(u) * max(|u| - v, 0); s(u, +inf) = 0.
double soft_threshold(double u, double v);
Eigen::VectorXd soft_threshold_vec(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// neg_loglik + sum_j p(|beta_j|) + lambda * epsilon * ||beta||^2 (intercept excluded).
double total_objective(const Problem& problem, const Coefficients& coef);
double total_objective(const Problem& problem, const Eigen::VectorXd& packed);

// Threshold vector over packed coordinates: 0 for the intercept, p'(|alpha_j|)
// for penalized coordinates.
Eigen::VectorXd packed_thresholds(const Problem& problem, const Eigen::VectorXd& packed);

using GradientOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct IstResult {
    Eigen::VectorXd b;
    std::size_t iterations = 0;
    double last_step = 0.0;
};

// Iterated soft-thresholding for min m(b) + sum_j tau_j |b_j|:
//   b <- b + delta_n [S(b - omega grad_m(b); omega tau) - b]
// until ||b_n - b_{n-1}|| <= inner_tol.  Throws ConvergenceError after inner_max steps.
IstResult ist_minimize(const GradientOracle& grad_m, const Eigen::VectorXd& tau, double omega, Eigen::VectorXd b0,
                       const std::function<double(std::size_t)>& relaxation, double inner_tol,
                       std::size_t inner_max);

// omega for the single-step GLM update: configured value (checked against
// 2 / lambda*) or safety * 2 / lambda*.
double resolve_step(const Problem& problem, const SolverConfig& config);
double fidelity_curvature(const Problem& problem, const SolverConfig& config);

// Quadratic GLM surrogate expanded at alpha, evaluated at beta (packed vectors):
//   -l(a) - grad l(a)^T (b - a) + ||b - a||^2 / omega + sum_j (tau_j |b_j| + gamma_j + lambda eps b_j^2)
double glm_surrogate(const Problem& problem, double omega, const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);
// Closed-form minimizer of glm_surrogate for fixed alpha.
Eigen::VectorXd glm_surrogate_minimizer(const Problem& problem, double omega, const Eigen::VectorXd& alpha);

// One application of an MM map M together with the objective it decreases.
class MmMap {
public:
    virtual ~MmMap() = default;
    // objective_at_theta avoids recomputing the objective for the descent check.
    virtual Eigen::VectorXd apply(const Eigen::VectorXd& theta, double objective_at_theta) = 0;
    virtual double objective(const Eigen::VectorXd& theta) const = 0;
    virtual std::size_t halvings() const noexcept { return 0; }
    // Objective at the vector returned by the last apply(), when it was computed.
    virtual std::optional<double> last_objective() const { return std::nullopt; }
    Eigen::VectorXd apply(const Eigen::VectorXd& theta) { return apply(theta, objective(theta)); }
};

enum class MapKind { Glm, Poisson, Generic };

// Default map for a problem: Poisson componentwise map for Poisson models,
// single-step GLM map otherwise.
MapKind default_map_kind(const Problem& problem);
std::unique_ptr<MmMap> make_map(const Problem& problem, const SolverConfig& config, MapKind kind);

// Runs theta <- M(theta) from `start` until the stopping rule fires.
FitResult iterate_map(const Problem& problem, const SolverConfig& config, MmMap& map, const Coefficients& start);

// Generic MM loop: each iteration minimizes the surrogate with ist_minimize.
FitResult mm_outer(const Problem& problem, const SolverConfig& config, const Coefficients& start);
// Single soft-threshold update per iteration (gaussian / logistic / cox).
FitResult glm_mm_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start);
// Componentwise minimization of the separable Poisson surrogate.
FitResult poisson_mm_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start);
// One surrogate minimization from the unpenalized MLE with tau evaluated there.
FitResult one_step_fit(const Problem& problem, const SolverConfig& config);

// Max violation of the nonsmooth first-order conditions (0 at stationary points).
double kkt_residual(const Problem& problem, const Coefficients& coef);

enum class StartKind { Zero, Mle, OneStep };
std::string_view to_string(StartKind s);
StartKind start_kind_from_string(std::string_view name);
Coefficients start_point(const Problem& problem, const SolverConfig& config, StartKind kind);

// Zeroes pinned coordinates (infinite adaptive weight) of a packed vector.
Eigen::VectorXd project_pinned(const Problem& problem, Eigen::VectorXd packed);

}  // namespace mist
