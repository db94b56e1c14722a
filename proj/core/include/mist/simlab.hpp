#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "mist/fidelity.hpp"
#include "mist/solver.hpp"

namespace mist {

// SplitMix64 used as a counter-based generator: draw k is mix(seed + (k+1) * golden).
// Normals come from the inverse normal CDF so streams are reproducible
// independently of the standard library's distribution implementations.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : key_(seed) {}

    std::uint64_t next() noexcept;
    double uniform() noexcept;  // open interval (0, 1)
    double normal();
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

enum class SimFamily { LinearEx1, LogisticEx2, CoxSynthetic };
std::string_view to_string(SimFamily f);
SimFamily sim_family_from_string(std::string_view name);

struct SimScenario {
    SimFamily family = SimFamily::LinearEx1;
    std::size_t p = 35;
    std::optional<std::size_t> q;  // unset: family default
    std::size_t n = 100;
    double rho = 0.0;
    double sigma = 1.0;  // LinearEx1 noise scale
    std::uint64_t seed = 1;

    static SimScenario linear_ex1(std::size_t p, double rho, double sigma, std::uint64_t seed);
    static SimScenario logistic_ex2(std::size_t q, double rho, std::uint64_t seed);
    static SimScenario cox_synthetic(std::size_t p, std::size_t n, double rho, std::uint64_t seed);

    std::size_t resolved_q() const;
    bool has_intercept() const noexcept { return family == SimFamily::LogisticEx2; }
    void validate() const;
    // Scenario with the per-replicate seed seed ^ index.
    SimScenario replicate(std::uint64_t index) const;
    std::string label() const;
};

struct SimDataset {
    Eigen::MatrixXd x;
    Response response;
    Eigen::VectorXd beta_true;
    SimScenario scenario;

    FidelityModel model() const;
};

// Sigma_jk = rho^|j-k|
Eigen::MatrixXd covariance_ar1(std::size_t p, double rho);
// scale * P with unit diagonal and constant off-diagonal rho.
Eigen::MatrixXd covariance_equicorr(std::size_t p, double rho, double scale = 1.0 / 9.0);

// True coefficients of a scenario.
Eigen::VectorXd true_coefficients(const SimScenario& scenario);

SimDataset gen_dataset(const SimScenario& scenario);

struct ComparisonRecord {
    double norm_diff = 0.0;
    double obj_a = 0.0;
    double obj_b = 0.0;
    bool a_leq_b = true;
};

// Objectives are re-evaluated on `problem`; norm_diff covers the packed
// coefficient vectors (intercept included when present).
ComparisonRecord compare_solutions(const FitResult& a, const FitResult& b, const Problem& problem);

}  // namespace mist
