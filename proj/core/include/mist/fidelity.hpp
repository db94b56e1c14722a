#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mist {

enum class Family { Gaussian, Logistic, Poisson, Cox };

std::string_view to_string(Family f);
Family family_from_string(std::string_view name);

// Dense N x p design.  With an intercept the model works on the augmented
// matrix [1_N, X]; "packed" coefficient vectors then put the intercept first.
class DesignMatrix {
public:
    DesignMatrix() = default;
    DesignMatrix(Eigen::MatrixXd x, bool has_intercept);

    Eigen::Index rows() const noexcept { return x_.rows(); }
    Eigen::Index cols() const noexcept { return x_.cols(); }
    // Length of a packed coefficient vector (p, or p + 1 with intercept).
    Eigen::Index dim() const noexcept { return x_.cols() + (intercept_ ? 1 : 0); }
    bool has_intercept() const noexcept { return intercept_; }
    const Eigen::MatrixXd& x() const noexcept { return x_; }

    // Entry of the augmented matrix; column 0 is the intercept when present.
    double augmented(Eigen::Index i, Eigen::Index j) const {
        if (!intercept_) return x_(i, j);
        return j == 0 ? 1.0 : x_(i, j - 1);
    }
    Eigen::MatrixXd augmented_matrix() const;

    Eigen::VectorXd times(const Eigen::VectorXd& packed) const;            // X~ theta
    Eigen::VectorXd transpose_times(const Eigen::VectorXd& resid) const;   // X~^T r

private:
    Eigen::MatrixXd x_;
    bool intercept_ = false;
};

struct Response {
    Family family = Family::Gaussian;
    Eigen::VectorXd y;        // gaussian / logistic / poisson
    Eigen::VectorXd offsets;  // poisson d_i (defaults to ones)
    Eigen::VectorXd time;     // cox
    std::vector<int> status;  // cox, 1 = event

    static Response gaussian(Eigen::VectorXd y);
    static Response logistic(Eigen::VectorXd y);
    static Response poisson(Eigen::VectorXd y, std::optional<Eigen::VectorXd> offsets = std::nullopt);
    static Response cox(Eigen::VectorXd time, std::vector<int> status);

    Eigen::Index size() const noexcept { return family == Family::Cox ? time.size() : y.size(); }
    void validate() const;
};

// Intercept (absent without an intercept column) plus penalized coefficients.
struct Coefficients {
    std::optional<double> intercept;
    Eigen::VectorXd beta;

    Eigen::VectorXd packed() const;
    static Coefficients unpack(const Eigen::VectorXd& packed, bool has_intercept);
    static Coefficients zero(Eigen::Index p, bool has_intercept);
};

// Negative (partial) log-likelihood g = -l with family-specific constants dropped:
//   gaussian  0.5 * ||X~b - y||^2
//   logistic  sum log(1 + e^eta) - y * eta
//   poisson   sum d * e^eta - y * eta
//   cox       Breslow negative log partial likelihood
class FidelityModel {
public:
    FidelityModel(DesignMatrix design, Response response);

    const DesignMatrix& design() const noexcept { return design_; }
    const Response& response() const noexcept { return response_; }
    Family family() const noexcept { return response_.family; }
    Eigen::Index dim() const noexcept { return design_.dim(); }
    Eigen::Index p() const noexcept { return design_.cols(); }
    bool has_intercept() const noexcept { return design_.has_intercept(); }

    double neg_loglik(const Eigen::VectorXd& packed) const;
    // Gradient of the log-likelihood l (not of g).
    Eigen::VectorXd gradient(const Eigen::VectorXd& packed) const;
    // Hessian of g = -l.
    Eigen::MatrixXd neg_hessian(const Eigen::VectorXd& packed) const;

    // Poisson majorizer weights theta_ij over columns of X~ (N x dim).
    const Eigen::MatrixXd& poisson_weights() const noexcept { return theta_; }
    std::size_t event_count() const noexcept { return events_; }

private:
    Eigen::VectorXd checked_eta(const Eigen::VectorXd& packed) const;
    double cox_neg_loglik(const Eigen::VectorXd& eta) const;
    Eigen::VectorXd cox_score(const Eigen::VectorXd& eta) const;
    Eigen::MatrixXd cox_neg_hessian(const Eigen::VectorXd& eta) const;

    DesignMatrix design_;
    Response response_;
    // cox: subject indices sorted by decreasing time, and the [begin, end)
    // ranges of tied times within that order
    std::vector<Eigen::Index> order_;
    std::vector<std::pair<std::size_t, std::size_t>> tie_groups_;
    std::size_t events_ = 0;
    Eigen::MatrixXd theta_;
};

double neg_loglik(const FidelityModel& model, const Coefficients& coef);
Eigen::VectorXd gradient(const FidelityModel& model, const Coefficients& coef);

// lambda_max(X~^T X~) by power iteration on the Gram operator, started from the
// normalized all-ones vector.  Throws ConvergenceError after max_iter steps.
double spectral_norm(const DesignMatrix& design, double tol = 1e-12, int max_iter = 100000);
double spectral_norm(const Eigen::MatrixXd& a, double tol = 1e-12, int max_iter = 100000);

// Upper bound on the largest eigenvalue of the hessian of -l over all
// coefficients.  Throws NotGloballyLipschitz for Poisson.
double curvature_bound(const FidelityModel& model);

// Poisson bound valid on the ball ||theta|| <= radius (region-restricted step rule).
double poisson_region_curvature_bound(const FidelityModel& model, double radius);

// Separable Poisson majorizer expanded at alpha.  component(j, b) returns
// (k_j(b; alpha_j), dk_j/db) for packed coordinate j.
class PoissonMajorizer {
public:
    PoissonMajorizer(const FidelityModel& model, Eigen::VectorXd alpha);

    std::pair<double, double> component(Eigen::Index j, double b) const;
    // dk_j/db without the overflow check; saturates to +-inf far from alpha.
    double derivative(Eigen::Index j, double b) const noexcept;
    // sum_j k_j(theta_j; alpha_j)
    double total(const Eigen::VectorXd& theta) const;
    const Eigen::VectorXd& alpha() const noexcept { return alpha_; }

private:
    const FidelityModel* model_;
    Eigen::VectorXd alpha_;
    Eigen::VectorXd eta_;
};

std::pair<double, double> poisson_majorizer_component(const FidelityModel& model, const Eigen::VectorXd& alpha,
                                                      Eigen::Index j, double beta_j);

// Unpenalized maximum likelihood estimate (least squares for gaussian, damped
// Newton otherwise).  Throws ValidationError when N <= dim or the design is
// rank deficient, ConvergenceError when Newton fails (e.g. separation).
Eigen::VectorXd maximum_likelihood(const FidelityModel& model, double tol = 1e-10, int max_iter = 500);

}  // namespace mist
