#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "mist/fidelity.hpp"
#include "mist/penalty.hpp"
#include "mist/solver.hpp"

namespace mist {

// Adaptive weights of +inf are written as the string "inf".
nlohmann::json to_json(const PenaltySpec& spec);
PenaltySpec penalty_from_json(const nlohmann::json& j);

// relaxation_schedule is not serializable and is left unset on read.
nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FitResult& result, bool include_trace = false);
// Restores coef, objective, iteration counts, kkt, termination and trace.
FitResult fit_result_from_json(const nlohmann::json& j);

// Compact JSON; doubles are printed with the shortest representation that
// round-trips (at most 17 significant digits).
std::string dump_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

// Shortest-ish fixed width formatting used in CSV output (12 significant digits).
std::string format_csv_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    Eigen::MatrixXd values;  // rows x header.size()

    Eigen::Index column(const std::string& name) const;  // throws ValidationError when absent
};

// Numeric CSV with a header line.  Parsing uses std::from_chars, so it does
// not depend on the global locale.  Empty lines are skipped.
CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

struct DatasetSpec {
    Family family = Family::Gaussian;
    std::string response_col = "y";
    std::string status_col = "status";  // cox only; response_col names the time column
    std::optional<std::string> offset_col;  // poisson only
    bool intercept = false;
};

// Every column not used as a response/status/offset becomes a predictor, in file order.
FidelityModel load_dataset(const CsvTable& table, const DatasetSpec& spec);

void write_csv_matrix(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values);

}  // namespace mist
