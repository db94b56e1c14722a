#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>

#include <Eigen/Dense>

#include "mist/solver.hpp"

namespace mist {

// One squared-extrapolation step.  `theta` is the accepted next iterate;
// r and v are the first and second differences of the map at the input.
struct AccelState {
    Eigen::VectorXd theta;
    Eigen::VectorXd r;
    Eigen::VectorXd v;
    double gamma = -1.0;
    double objective = 0.0;
    std::size_t map_evals = 0;
    std::size_t backtracks = 0;  // objective probes beyond the first extrapolation
    bool fallback = false;       // theta = M(M(input))
};

using MapOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ObjectiveOracle = std::function<double(const Eigen::VectorXd&)>;

inline constexpr int kSquaremBacktracks = 5;

// theta' = theta - 2 gamma r + gamma^2 v with gamma = min(-||r|| / ||v||, -1).
// While the objective increases, gamma <- (gamma - 1) / 2 (at most 5 times),
// then theta' = M(M(theta)).  `objective_at_theta` skips one objective call.
AccelState squarem_step(const MapOracle& map, const ObjectiveOracle& objective, const Eigen::VectorXd& theta,
                        std::optional<double> objective_at_theta = std::nullopt);

enum class AccelMode { Plain, Squarem };
std::string_view to_string(AccelMode m);
AccelMode accel_mode_from_string(std::string_view name);

// Plain: the base MM fit.  Squarem: squarem_step on the base map until the
// stopping rule holds between successive accepted iterates.
FitResult accelerated_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start,
                          AccelMode mode);
FitResult accelerated_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start,
                          AccelMode mode, MapKind kind);

}  // namespace mist
