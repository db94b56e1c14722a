#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mist/errors.hpp"
#include "mist_cli/run.hpp"

namespace {

using namespace mist;
using namespace mist::cli;

template <class T, class F>
std::vector<T> parse_list(const std::string& text, F&& parse) {
    std::vector<T> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(parse(item));
    return out;
}

struct Flags {
    std::string out = "-";
    std::string format;
    std::string penalty_json;
    std::string penalty_name;
    std::string solver_json;
    std::string family = "gaussian";
    std::string start = "zero";
    std::string accel = "none";
    std::string scenario = "linear-ex1";
    std::string penalties;
    std::string starts;
    std::string pilot = "elastic_net";
    std::optional<std::size_t> p, q, n;
    std::optional<double> rho, sigma;
    std::optional<std::size_t> max_outer;
    std::optional<double> coef_tol, obj_tol;
    std::string emit_grid;
};

void add_common(CLI::App* app, RunConfig& cfg, Flags& f) {
    app->add_option("--out", f.out, "output file ('-' for stdout)");
    app->add_option("--format", f.format, "json | csv");
    app->add_option("--penalty-json", f.penalty_json, "penalty specification file");
    app->add_option("--penalty", f.penalty_name, "penalty family (overridden by --penalty-json)");
    app->add_option("--solver-json", f.solver_json, "solver configuration file");
    app->add_option("--lambda", cfg.lambda_grid, "lambda value(s)")->delimiter(',');
    app->add_option("--accel", f.accel, "squarem | none");
    app->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
    app->add_option("--max-outer", f.max_outer, "outer iteration cap (overrides the solver file)");
    app->add_option("--coef-tol", f.coef_tol, "coefficient tolerance (overrides the solver file)");
    app->add_option("--obj-tol", f.obj_tol, "objective tolerance (overrides the solver file)");
}

void add_data(CLI::App* app, RunConfig& cfg, Flags& f) {
    app->add_option("--data", cfg.data, "CSV dataset")->required();
    app->add_option("--response-col", cfg.dataset.response_col, "response (cox: time) column");
    app->add_option("--status-col", cfg.dataset.status_col, "cox status column");
    app->add_option("--offset-col", cfg.dataset.offset_col, "poisson offset column");
    app->add_option("--family", f.family, "gaussian | logistic | poisson | cox");
    app->add_flag("--intercept", cfg.dataset.intercept, "fit an unpenalized intercept");
    app->add_option("--start", f.start, "zero | mle | onestep | FitResult JSON file");
    app->add_flag("--trace", cfg.include_trace, "include the objective trace in JSON output");
}

void add_sim(CLI::App* app, RunConfig& cfg, Flags& f) {
    app->add_option("--scenario", f.scenario, "linear-ex1 | logistic-ex2 | cox-synthetic");
    app->add_option("--p", f.p, "number of predictors");
    app->add_option("--q", f.q, "number of nonzero true coefficients");
    app->add_option("--n", f.n, "observations per replicate");
    app->add_option("--rho", f.rho, "design correlation");
    app->add_option("--sigma", f.sigma, "noise scale (linear-ex1)");
    app->add_option("--seed", cfg.seed, "base seed; replicate k uses seed xor k");
    app->add_option("--replicates,-B", cfg.sim.replicates, "number of replicates");
    app->add_option("--penalties", f.penalties, "comma-separated penalty families");
    app->add_option("--pilot", f.pilot, "pilot estimator for adaptive weights (elastic_net | lasso)");
    app->add_option("--pilot-lambda", cfg.sim.pilot_lambda, "pilot lambda");
    app->add_option("--adaptive-gamma", cfg.sim.adaptive_gamma, "exponent of the adaptive weights");
    app->add_option("--epsilon", cfg.sim.epsilon, "ridge factor for elastic-net penalties");
    app->add_flag("--standardize", cfg.sim.standardize, "scale predictors to unit variance");
}

void finish(RunConfig& cfg, const Flags& f) {
    if (!f.format.empty()) cfg.format = format_from_string(f.format);
    if (!f.penalty_json.empty()) cfg.penalty = penalty_from_json(read_json_file(f.penalty_json));
    else if (!f.penalty_name.empty()) cfg.penalty.family = penalty_family_from_string(f.penalty_name);
    if (!f.solver_json.empty()) cfg.solver = solver_config_from_json(read_json_file(f.solver_json));
    if (f.max_outer) cfg.solver.max_outer = *f.max_outer;
    if (f.coef_tol) cfg.solver.coef_tol = *f.coef_tol;
    if (f.obj_tol) cfg.solver.obj_tol = *f.obj_tol;
    cfg.dataset.family = family_from_string(f.family);
    cfg.start = start_from_string(f.start);
    cfg.accel = accel_mode_from_string(f.accel);

    const SimFamily sf = sim_family_from_string(f.scenario);
    const std::uint64_t seed = cfg.seed.value_or(1);
    switch (sf) {
        case SimFamily::LinearEx1: cfg.sim.scenario = SimScenario::linear_ex1(35, 0.0, 1.0, seed); break;
        case SimFamily::LogisticEx2: cfg.sim.scenario = SimScenario::logistic_ex2(25, 0.0, seed); break;
        case SimFamily::CoxSynthetic: cfg.sim.scenario = SimScenario::cox_synthetic(10, 200, 0.0, seed); break;
    }
    auto& sc = cfg.sim.scenario;
    if (f.p) sc.p = *f.p;
    if (f.q) sc.q = *f.q;
    if (f.n) sc.n = *f.n;
    if (f.rho) sc.rho = *f.rho;
    if (f.sigma) sc.sigma = *f.sigma;
    if (!f.penalties.empty())
        cfg.sim.penalties = parse_list<PenaltyFamily>(f.penalties, [](const std::string& s) {
            return penalty_family_from_string(s);
        });
    if (!f.starts.empty())
        cfg.sim.starts = parse_list<StartKind>(f.starts, [](const std::string& s) { return start_kind_from_string(s); });
    cfg.sim.pilot = penalty_family_from_string(f.pilot);
    if (cfg.sim.pilot != PenaltyFamily::Lasso && cfg.sim.pilot != PenaltyFamily::ElasticNet)
        throw ValidationError("--pilot must be lasso or elastic_net");
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    Flags f;
    CLI::App app{"mist: majorization-minimization solvers for penalized regression"};
    app.require_subcommand(0, 1);
    app.add_option("--emit-penalty-grid", f.emit_grid, "write penalty values over a grid of r to this CSV file");
    app.add_option("--lambda", cfg.lambda_grid, "lambda for --emit-penalty-grid")->delimiter(',');
    app.add_option("--penalty-json", f.penalty_json, "shape parameters (a, delta) for --emit-penalty-grid");
    app.add_option("--grid-max", cfg.grid_max, "largest r in the penalty grid");
    app.add_option("--grid-points", cfg.grid_points, "number of grid points");

    auto* fit = app.add_subcommand("fit", "fit one penalized model");
    add_common(fit, cfg, f);
    add_data(fit, cfg, f);
    auto* path = app.add_subcommand("path", "warm-started fits over a lambda grid");
    add_common(path, cfg, f);
    add_data(path, cfg, f);
    auto* sim = app.add_subcommand("simulate", "simulation study over replicates, penalties, lambdas and starts");
    add_common(sim, cfg, f);
    add_sim(sim, cfg, f);
    sim->add_option("--starts", f.starts, "comma-separated starts (zero, mle, onestep)");
    sim->add_option("--dump-dir", cfg.sim.dump_dir, "write each replicate dataset and its true coefficients here");
    auto* bench = app.add_subcommand("bench-accel", "plain versus SQUAREM map evaluation counts");
    add_common(bench, cfg, f);
    add_sim(bench, cfg, f);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::string msg = e.what();
        std::cerr << "mist: error: usage: " << msg << '\n';
        return kExitError;
    }

    try {
        if (fit->parsed()) cfg.command = Command::Fit;
        else if (path->parsed()) cfg.command = Command::Path;
        else if (sim->parsed()) cfg.command = Command::Simulate;
        else if (bench->parsed()) cfg.command = Command::BenchAccel;
        else if (!f.emit_grid.empty()) {
            cfg.command = Command::PenaltyGrid;
            f.out = f.emit_grid;
        } else {
            std::cerr << "mist: error: usage: expected a subcommand or --emit-penalty-grid\n";
            return kExitError;
        }
        finish(cfg, f);

        if (f.out == "-") return run(cfg, std::cout);
        std::ofstream out(f.out);
        if (!out) throw IoError("cannot open '" + f.out + "' for writing");
        const int code = run(cfg, out);
        out.close();
        if (!out) throw IoError("failed writing '" + f.out + "'");
        return code;
    } catch (const std::exception& e) {
        std::cerr << error_line(e) << '\n';
        return kExitError;
    }
}
