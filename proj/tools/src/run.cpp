#include "mist_cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "mist/errors.hpp"
#include "mist_cli/pool.hpp"

namespace mist::cli {

namespace {

using nlohmann::json;

const std::vector<double> kDefaultSimGrid{0.1, 1, 5, 10, 20, 100};

std::string num(double v) { return format_csv_number(v); }

// messages end up inside a CSV cell or a single stderr line
std::string flatten(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
        else if (c == ',') c = ';';
    return s;
}

FidelityModel load_model(const RunConfig& cfg) {
    if (cfg.data.empty()) throw ValidationError("--data is required");
    return load_dataset(read_csv(cfg.data), cfg.dataset);
}

PenaltySpec penalty_at(const RunConfig& cfg, double lambda) {
    PenaltySpec p = cfg.penalty;
    p.lambda = lambda;
    p.validate();
    return p;
}

Coefficients resolve_start(const Problem& problem, const RunConfig& cfg) {
    if (cfg.start.file) {
        Coefficients c = fit_result_from_json(read_json_file(*cfg.start.file)).coef;
        if (c.beta.size() != problem.model().p() || c.intercept.has_value() != problem.model().has_intercept())
            throw DimensionError("start file '" + *cfg.start.file + "' does not match the dataset");
        return c;
    }
    return start_point(problem, cfg.solver, cfg.start.kind);
}

int exit_for(const FitResult& r) { return r.termination == Termination::MaxIter ? kExitMaxIter : kExitOk; }

struct FitRow {
    double lambda = 0.0;
    std::optional<FitResult> fit;
    std::string message;
};

void write_fit_header(std::ostream& out, Eigen::Index p, bool intercept) {
    out << "lambda,status,termination,iters,map_evals,objective,kkt";
    if (intercept) out << ",intercept";
    for (Eigen::Index j = 1; j <= p; ++j) out << ",beta_" << j;
    out << ",message\n";
}

void write_fit_row(std::ostream& out, const FitRow& row, Eigen::Index p, bool intercept) {
    out << num(row.lambda) << ',';
    if (!row.fit) {
        out << "error,,,,,";
        if (intercept) out << ',';
        for (Eigen::Index j = 0; j < p; ++j) out << ',';
        out << ',' << flatten(row.message) << '\n';
        return;
    }
    const FitResult& f = *row.fit;
    out << "ok," << to_string(f.termination) << ',' << f.outer_iters << ',' << f.map_evals << ',' << num(f.objective)
        << ',' << num(f.kkt_residual);
    if (intercept) out << ',' << num(f.coef.intercept.value_or(0.0));
    for (Eigen::Index j = 0; j < p; ++j) out << ',' << num(f.coef.beta[j]);
    out << ",\n";
}

std::vector<PenaltyFamily> sim_penalties(const RunConfig& cfg, std::vector<PenaltyFamily> fallback) {
    return cfg.sim.penalties.empty() ? fallback : cfg.sim.penalties;
}

SimScenario resolved_scenario(const RunConfig& cfg) {
    SimScenario sc = cfg.sim.scenario;
    if (cfg.seed) sc.seed = *cfg.seed;
    sc.validate();
    if (cfg.sim.replicates == 0) throw ValidationError("replicate count must be >= 1");
    return sc;
}

// Columns scaled to unit (population) standard deviation; zero-variance columns are left alone.
FidelityModel standardized(const FidelityModel& m) {
    Eigen::MatrixXd x = m.design().x();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().mean());
        if (sd > 0.0) x.col(j) /= sd;
    }
    return FidelityModel(DesignMatrix(std::move(x), m.has_intercept()), m.response());
}

void dump_replicate(const std::string& dir, std::size_t k, const SimDataset& ds) {
    std::filesystem::create_directories(dir);
    const std::string stem = dir + "/replicate_" + std::to_string(k);
    std::ofstream data(stem + ".csv");
    std::ofstream truth(stem + "_beta_true.csv");
    if (!data || !truth) throw IoError("cannot write into '" + dir + "'");
    std::vector<std::string> header;
    for (Eigen::Index j = 1; j <= ds.x.cols(); ++j) header.push_back("x" + std::to_string(j));
    Eigen::MatrixXd values(ds.x.rows(), ds.x.cols() + (ds.response.family == Family::Cox ? 2 : 1));
    values.leftCols(ds.x.cols()) = ds.x;
    if (ds.response.family == Family::Cox) {
        header.insert(header.end(), {"time", "status"});
        values.col(ds.x.cols()) = ds.response.time;
        for (Eigen::Index i = 0; i < ds.x.rows(); ++i)
            values(i, ds.x.cols() + 1) = ds.response.status[static_cast<std::size_t>(i)];
    } else {
        header.emplace_back("y");
        values.col(ds.x.cols()) = ds.response.y;
    }
    write_csv_matrix(data, header, values);
    write_csv_matrix(truth, {"beta_true"}, ds.beta_true);
}

PenaltySpec sim_penalty(const RunConfig& cfg, PenaltyFamily family, double lambda, const Eigen::VectorXd* weights) {
    PenaltySpec p;
    p.family = family;
    p.lambda = lambda;
    p.a = cfg.penalty.a;
    p.delta = cfg.penalty.delta;
    if (family == PenaltyFamily::ElasticNet || family == PenaltyFamily::AdaptiveElasticNet) p.epsilon = cfg.sim.epsilon;
    if (p.adaptive()) {
        p.gamma = cfg.sim.adaptive_gamma;
        p.weights.assign(weights->data(), weights->data() + weights->size());
    }
    p.validate();
    return p;
}

}  // namespace

OutputFormat format_from_string(std::string_view name) {
    if (name == "json") return OutputFormat::Json;
    if (name == "csv") return OutputFormat::Csv;
    throw ValidationError("unknown output format '" + std::string(name) + "'");
}

StartSpec start_from_string(std::string_view text) {
    StartSpec s;
    if (text == "zero" || text == "mle" || text == "onestep" || text == "one-step" || text == "1s")
        s.kind = start_kind_from_string(text);
    else if (text.empty())
        throw ValidationError("empty --start");
    else
        s.file = std::string(text);
    return s;
}

OutputFormat RunConfig::output_format() const {
    if (format) return *format;
    return command == Command::Fit ? OutputFormat::Json : OutputFormat::Csv;
}

int run_fit(const RunConfig& cfg, std::ostream& out) {
    if (cfg.lambda_grid.size() > 1) throw ValidationError("fit takes a single --lambda");
    const double lambda = cfg.lambda_grid.empty() ? cfg.penalty.lambda : cfg.lambda_grid.front();
    Problem problem(load_model(cfg), penalty_at(cfg, lambda));
    const FitResult fit = accelerated_fit(problem, cfg.solver, resolve_start(problem, cfg), cfg.accel);

    if (cfg.output_format() == OutputFormat::Json) {
        json j = to_json(fit, cfg.include_trace);
        j["penalty"] = to_json(problem.penalty());
        j["accel"] = std::string(to_string(cfg.accel));
        out << dump_json(j) << '\n';
    } else {
        const bool icpt = problem.model().has_intercept();
        write_fit_header(out, problem.model().p(), icpt);
        write_fit_row(out, FitRow{lambda, fit, {}}, problem.model().p(), icpt);
    }
    return exit_for(fit);
}

int run_path(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> grid = cfg.lambda_grid;
    if (grid.empty()) throw ValidationError("path needs a nonempty --lambda grid");
    for (double l : grid)
        if (!(l > 0.0) || !std::isfinite(l)) throw ValidationError("lambda grid values must be positive and finite");
    std::sort(grid.begin(), grid.end(), std::greater<>());

    auto model = std::make_shared<const FidelityModel>(load_model(cfg));
    const auto p = model->p();
    const bool icpt = model->has_intercept();

    // warm starts make the sweep inherently sequential
    std::vector<FitRow> rows;
    std::optional<Coefficients> warm;
    int code = kExitOk;
    for (double lambda : grid) {
        FitRow row{lambda, std::nullopt, {}};
        try {
            Problem problem(model, penalty_at(cfg, lambda));
            const Coefficients start = warm ? *warm : resolve_start(problem, cfg);
            row.fit = accelerated_fit(problem, cfg.solver, start, cfg.accel);
            warm = row.fit->coef;
            if (row.fit->termination == Termination::MaxIter && code == kExitOk) code = kExitMaxIter;
        } catch (const std::exception& e) {
            row.message = e.what();
            code = kExitError;
        }
        rows.push_back(std::move(row));
    }

    if (cfg.output_format() == OutputFormat::Json) {
        json arr = json::array();
        for (const auto& r : rows) {
            json j = r.fit ? to_json(*r.fit, cfg.include_trace) : json::object();
            j["lambda"] = r.lambda;
            j["status"] = r.fit ? "ok" : "error";
            if (!r.fit) j["message"] = r.message;
            arr.push_back(std::move(j));
        }
        out << dump_json(arr) << '\n';
    } else {
        write_fit_header(out, p, icpt);
        for (const auto& r : rows) write_fit_row(out, r, p, icpt);
    }
    return code;
}

int run_simulate(const RunConfig& cfg, std::ostream& out) {
    if (cfg.output_format() != OutputFormat::Csv) throw ValidationError("simulate writes CSV only");
    const SimScenario base = resolved_scenario(cfg);
    const auto penalties = sim_penalties(cfg, {PenaltyFamily::Lasso, PenaltyFamily::AdaptiveLasso,
                                               PenaltyFamily::ElasticNet, PenaltyFamily::AdaptiveElasticNet,
                                               PenaltyFamily::Scad, PenaltyFamily::Mcp});
    const auto& grid = cfg.lambda_grid.empty() ? kDefaultSimGrid : cfg.lambda_grid;
    for (double l : grid)
        if (!(l > 0.0)) throw ValidationError("lambda grid values must be positive");
    if (cfg.sim.starts.empty()) throw ValidationError("simulate needs at least one start");
    const std::size_t B = cfg.sim.replicates;
    const bool need_pilot = std::any_of(penalties.begin(), penalties.end(), [](PenaltyFamily f) {
        return f == PenaltyFamily::AdaptiveLasso || f == PenaltyFamily::AdaptiveElasticNet;
    });

    std::vector<SimDataset> data(B);
    std::vector<std::shared_ptr<const FidelityModel>> models(B);
    std::vector<Eigen::VectorXd> weights(B);
    parallel_for(B, cfg.threads, [&](std::size_t k) {
        data[k] = gen_dataset(base.replicate(k));
        models[k] = std::make_shared<const FidelityModel>(cfg.sim.standardize ? standardized(data[k].model())
                                                                               : data[k].model());
        if (need_pilot) {
            PenaltySpec pilot;
            pilot.family = cfg.sim.pilot;
            pilot.lambda = cfg.sim.pilot_lambda;
            if (pilot.family == PenaltyFamily::ElasticNet) pilot.epsilon = cfg.sim.epsilon;
            Problem pp(models[k], pilot);
            const FitResult pf =
                accelerated_fit(pp, cfg.solver, Coefficients::zero(pp.model().p(), pp.model().has_intercept()),
                                AccelMode::Plain);
            weights[k] = compute_adaptive_weights(pf.coef.beta, cfg.sim.adaptive_gamma);
        }
    });
    if (cfg.sim.dump_dir)
        for (std::size_t k = 0; k < B; ++k) dump_replicate(*cfg.sim.dump_dir, k, data[k]);

    struct Cell {
        std::size_t rep, pen, lam;
    };
    std::vector<Cell> cells;
    for (std::size_t k = 0; k < B; ++k)
        for (std::size_t a = 0; a < penalties.size(); ++a)
            for (std::size_t l = 0; l < grid.size(); ++l) cells.push_back({k, a, l});

    const auto& starts = cfg.sim.starts;
    std::vector<std::string> lines(cells.size());
    parallel_for(cells.size(), cfg.threads, [&](std::size_t c) {
        const Cell cell = cells[c];
        const SimScenario sc = base.replicate(cell.rep);
        const double lambda = grid[cell.lam];
        std::ostringstream os;
        auto prefix = [&](StartKind s) {
            os << sc.label() << ',' << cell.rep << ',' << sc.seed << ',' << to_string(penalties[cell.pen]) << ','
               << num(lambda) << ',' << to_string(s) << ',';
        };
        std::optional<Problem> problem;
        std::optional<FitResult> onestep;
        std::string setup_error;
        try {
            problem.emplace(models[cell.rep], sim_penalty(cfg, penalties[cell.pen], lambda, &weights[cell.rep]));
            onestep = one_step_fit(*problem, cfg.solver);
        } catch (const std::exception& e) {
            setup_error = flatten(e.what());
        }
        for (StartKind s : starts) {
            prefix(s);
            if (!onestep) {
                os << "error,,,,,,,,," << setup_error << '\n';
                continue;
            }
            try {
                const FitResult fit =
                    accelerated_fit(*problem, cfg.solver, start_point(*problem, cfg.solver, s), cfg.accel);
                const ComparisonRecord rec = compare_solutions(fit, *onestep, *problem);
                os << "ok," << num(rec.obj_a) << ',' << num(rec.obj_b) << ',' << num(rec.norm_diff) << ','
                   << (rec.a_leq_b ? 1 : 0) << ',' << fit.outer_iters << ',' << fit.map_evals << ','
                   << num(fit.kkt_residual) << ',' << to_string(fit.termination) << ",\n";
            } catch (const std::exception& e) {
                os << "error,,,,,,,,," << flatten(e.what()) << '\n';
            }
        }
        lines[c] = os.str();
    });

    out << "scenario,replicate,seed,penalty,lambda,start,status,objective,onestep_objective,norm_diff,leq_onestep,"
           "iters,map_evals,kkt,termination,message\n";
    for (const auto& l : lines) out << l;
    return kExitOk;
}

int run_bench_accel(const RunConfig& cfg, std::ostream& out) {
    if (cfg.output_format() != OutputFormat::Csv) throw ValidationError("bench-accel writes CSV only");
    const SimScenario base = resolved_scenario(cfg);
    const auto penalties = sim_penalties(cfg, {PenaltyFamily::Lasso});
    if (cfg.lambda_grid.size() > 1) throw ValidationError("bench-accel takes a single --lambda");
    const double lambda = cfg.lambda_grid.empty() ? cfg.penalty.lambda : cfg.lambda_grid.front();
    const std::size_t B = cfg.sim.replicates;

    std::vector<std::string> lines(B * penalties.size());
    parallel_for(lines.size(), cfg.threads, [&](std::size_t c) {
        const std::size_t k = c / penalties.size();
        const PenaltyFamily fam = penalties[c % penalties.size()];
        const SimScenario sc = base.replicate(k);
        const SimDataset ds = gen_dataset(sc);
        auto model = std::make_shared<const FidelityModel>(ds.model());
        Eigen::VectorXd w;
        if (fam == PenaltyFamily::AdaptiveLasso || fam == PenaltyFamily::AdaptiveElasticNet) {
            PenaltySpec pilot;
            pilot.family = cfg.sim.pilot;
            pilot.lambda = cfg.sim.pilot_lambda;
            if (pilot.family == PenaltyFamily::ElasticNet) pilot.epsilon = cfg.sim.epsilon;
            Problem pp(model, pilot);
            w = compute_adaptive_weights(
                accelerated_fit(pp, cfg.solver, Coefficients::zero(model->p(), model->has_intercept()),
                                AccelMode::Plain)
                    .coef.beta,
                cfg.sim.adaptive_gamma);
        }
        Problem problem(model, sim_penalty(cfg, fam, lambda, &w));
        const Coefficients zero = Coefficients::zero(model->p(), model->has_intercept());
        std::ostringstream os;
        for (AccelMode mode : {AccelMode::Plain, AccelMode::Squarem}) {
            const auto t0 = std::chrono::steady_clock::now();
            const FitResult fit = accelerated_fit(problem, cfg.solver, zero, mode);
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            os << sc.label() << ',' << to_string(fam) << ',' << to_string(mode) << ',' << fit.map_evals << ','
               << num(dt.count()) << ',' << num(fit.objective) << '\n';
        }
        lines[c] = os.str();
    });

    out << "scenario,penalty,mode,map_evals,wall_seconds,objective\n";
    for (const auto& l : lines) out << l;
    return kExitOk;
}

int run_penalty_grid(const RunConfig& cfg, std::ostream& out) {
    if (!(cfg.grid_max > 0.0) || cfg.grid_points < 2) throw ValidationError("penalty grid needs r_max > 0 and >= 2 points");
    const double lambda = cfg.lambda_grid.empty() ? cfg.penalty.lambda : cfg.lambda_grid.front();
    const std::vector<PenaltyFamily> fams{PenaltyFamily::Lasso, PenaltyFamily::Scad, PenaltyFamily::Mcp,
                                          PenaltyFamily::Geman, PenaltyFamily::Log};
    std::vector<PenaltySpec> specs;
    for (auto f : fams) {
        PenaltySpec s;
        s.family = f;
        s.lambda = lambda;
        s.a = cfg.penalty.a;
        s.delta = cfg.penalty.delta;
        s.validate();
        specs.push_back(s);
    }
    out << 'r';
    for (auto f : fams) out << ',' << to_string(f);
    out << '\n';
    for (std::size_t i = 0; i < cfg.grid_points; ++i) {
        const double r = cfg.grid_max * static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
        out << num(r);
        for (const auto& s : specs) out << ',' << num(penalty_value(s, 0, r));
        out << '\n';
    }
    return kExitOk;
}

int run(const RunConfig& config, std::ostream& out) {
    switch (config.command) {
        case Command::Fit: return run_fit(config, out);
        case Command::Path: return run_path(config, out);
        case Command::Simulate: return run_simulate(config, out);
        case Command::BenchAccel: return run_bench_accel(config, out);
        case Command::PenaltyGrid: return run_penalty_grid(config, out);
    }
    throw ValidationError("unknown command");
}

std::string error_line(const std::exception& e) {
    std::string kind = "internal";
    if (dynamic_cast<const IoError*>(&e)) kind = "io";
    else if (dynamic_cast<const ValidationError*>(&e)) kind = "validation";
    else if (dynamic_cast<const DomainError*>(&e)) kind = "domain";
    else if (dynamic_cast<const DimensionError*>(&e)) kind = "dimension";
    else if (dynamic_cast<const NotGloballyLipschitz*>(&e)) kind = "curvature";
    else if (dynamic_cast<const OverflowError*>(&e)) kind = "overflow";
    else if (dynamic_cast<const ConvergenceError*>(&e)) kind = "convergence";
    else if (dynamic_cast<const nlohmann::json::exception*>(&e)) kind = "parse";
    std::string msg = e.what();
    for (char& c : msg)
        if (c == '\n' || c == '\r') c = ' ';
    return "mist: error: " + kind + ": " + msg;
}

}  // namespace mist::cli
