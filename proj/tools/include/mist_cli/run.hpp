#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mist/accel.hpp"
#include "mist/io.hpp"
#include "mist/penalty.hpp"
#include "mist/simlab.hpp"
#include "mist/solver.hpp"

namespace mist::cli {

enum class Command { Fit, Path, Simulate, BenchAccel, PenaltyGrid };

enum class OutputFormat { Json, Csv };
OutputFormat format_from_string(std::string_view name);

// zero | mle | onestep, anything else is taken as a FitResult JSON file
struct StartSpec {
    StartKind kind = StartKind::Zero;
    std::optional<std::string> file;
};
StartSpec start_from_string(std::string_view text);

struct SimOptions {
    SimScenario scenario;
    std::size_t replicates = 10;
    std::vector<PenaltyFamily> penalties;
    std::vector<StartKind> starts{StartKind::Zero, StartKind::Mle, StartKind::OneStep};
    // pilot estimate behind the adaptive weights
    PenaltyFamily pilot = PenaltyFamily::ElasticNet;
    double pilot_lambda = 1.0;
    double adaptive_gamma = 3.0;
    double epsilon = 0.5;  // ridge factor used by EN/AEN
    bool standardize = false;
    std::optional<std::string> dump_dir;
};

struct RunConfig {
    Command command = Command::Fit;

    std::string data;
    DatasetSpec dataset;
    PenaltySpec penalty;
    SolverConfig solver;
    std::vector<double> lambda_grid;
    StartSpec start;
    AccelMode accel = AccelMode::Plain;
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
    std::optional<OutputFormat> format;
    bool include_trace = false;

    SimOptions sim;

    // penalty grid
    double grid_max = 4.0;
    std::size_t grid_points = 401;

    OutputFormat output_format() const;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIter = 2;

// Each command writes its artifact to `out` and returns the process exit code.
// Errors that prevent any output are thrown.
int run_fit(const RunConfig& config, std::ostream& out);
int run_path(const RunConfig& config, std::ostream& out);
int run_simulate(const RunConfig& config, std::ostream& out);
int run_bench_accel(const RunConfig& config, std::ostream& out);
int run_penalty_grid(const RunConfig& config, std::ostream& out);
int run(const RunConfig& config, std::ostream& out);

// One line, no embedded newlines: "mist: error: <kind>: <message>".
std::string error_line(const std::exception& e);

}  // namespace mist::cli
