#include "mist/accel.hpp"

#include <cmath>
#include <limits>

#include "mist/errors.hpp"

namespace mist {

namespace {

constexpr double kFixedPointTol = 1e-14;
constexpr double kMonotoneSlack = 1e-12;

}  // namespace

std::string_view to_string(AccelMode m) { return m == AccelMode::Squarem ? "squarem" : "none"; }

AccelMode accel_mode_from_string(std::string_view name) {
    if (name == "squarem" || name == "sqm2") return AccelMode::Squarem;
    if (name == "none" || name == "plain") return AccelMode::Plain;
    throw ValidationError("unknown acceleration mode '" + std::string(name) + "'");
}

AccelState squarem_step(const MapOracle& map, const ObjectiveOracle& objective, const Eigen::VectorXd& theta,
                        std::optional<double> objective_at_theta) {
    AccelState st;
    const Eigen::VectorXd m1 = map(theta);
    const Eigen::VectorXd m2 = map(m1);
    st.map_evals = 2;
    st.r = m1 - theta;
    st.v = m2 - 2.0 * m1 + theta;
    const double f0 = objective_at_theta ? *objective_at_theta : objective(theta);

    const double rn = st.r.norm();
    if (rn <= kFixedPointTol) {
        st.theta = theta;
        st.objective = f0;
        return st;
    }
    const double vn = st.v.norm();
    auto fall_back = [&] {
        st.fallback = true;
        st.gamma = -1.0;
        st.theta = m2;
        st.objective = objective(m2);
        if (!(st.objective <= f0 + kMonotoneSlack)) {
            // MM descent guarantees this only up to rounding; keep the best probe
            const double f1 = objective(m1);
            if (f1 <= f0) {
                st.theta = m1;
                st.objective = f1;
            } else {
                st.theta = theta;
                st.objective = f0;
            }
        }
        return st;
    };
    if (vn == 0.0) return fall_back();

    st.gamma = std::min(-rn / vn, -1.0);
    for (int attempt = 0; attempt <= kSquaremBacktracks; ++attempt) {
        Eigen::VectorXd cand = theta - 2.0 * st.gamma * st.r + st.gamma * st.gamma * st.v;
        const double f = objective(cand);
        if (f <= f0) {
            st.theta = std::move(cand);
            st.objective = f;
            return st;
        }
        if (attempt == kSquaremBacktracks) break;
        ++st.backtracks;
        st.gamma = (st.gamma - 1.0) / 2.0;
    }
    return fall_back();
}

FitResult accelerated_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start,
                          AccelMode mode) {
    return accelerated_fit(problem, config, start, mode, default_map_kind(problem));
}

FitResult accelerated_fit(const Problem& problem, const SolverConfig& config, const Coefficients& start,
                          AccelMode mode, MapKind kind) {
    auto map = make_map(problem, config, kind);
    if (mode == AccelMode::Plain) return iterate_map(problem, config, *map, start);

    if (start.beta.size() != problem.model().p() || start.intercept.has_value() != problem.model().has_intercept())
        throw DimensionError("start vector does not match the problem");

    MapOracle m = [&](const Eigen::VectorXd& t) { return map->apply(t); };
    ObjectiveOracle f = [&](const Eigen::VectorXd& t) { return map->objective(t); };

    Eigen::VectorXd theta = project_pinned(problem, start.packed());
    double obj = f(theta);
    if (!std::isfinite(obj)) throw ValidationError("objective is not finite at the start point");

    FitResult res;
    if (config.record_trace) res.trace.push_back(obj);
    for (std::size_t n = 1; n <= config.max_outer; ++n) {
        AccelState st = squarem_step(m, f, theta, obj);
        res.map_evals += st.map_evals;
        res.backtracks += st.backtracks;
        res.outer_iters = n;
        // a short plain MM step means theta already satisfies the base criterion
        const double step = std::min((st.theta - theta).norm(), st.r.norm());
        const double dobj = std::abs(obj - st.objective);
        theta = std::move(st.theta);
        obj = st.objective;
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
    res.step_halvings = map->halvings();
    return res;
}

}  // namespace mist
