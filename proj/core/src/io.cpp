#include "mist/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "mist/errors.hpp"

namespace mist {

using nlohmann::json;

namespace {

json number_or_tag(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double number_from(const json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
        if (s == "nan") return std::nan("");
    }
    throw ValidationError(std::string("expected a number for '") + what + "'");
}

template <class T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

void read_num(const json& j, const char* key, double& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = number_from(*it, key);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw ValidationError("csv line " + std::to_string(line_no) + ": cannot parse '" + std::string(s) + "'");
    return v;
}

}  // namespace

json to_json(const PenaltySpec& spec) {
    json j;
    j["family"] = std::string(to_string(spec.family));
    j["lambda"] = spec.lambda;
    j["epsilon"] = spec.epsilon;
    j["a"] = spec.a;
    j["delta"] = spec.delta;
    if (spec.gamma) j["gamma"] = *spec.gamma;
    if (!spec.weights.empty()) {
        json w = json::array();
        for (double x : spec.weights) w.push_back(number_or_tag(x));
        j["weights"] = std::move(w);
    }
    return j;
}

PenaltySpec penalty_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("penalty JSON must be an object");
    PenaltySpec spec;
    if (!j.contains("family")) throw ValidationError("penalty JSON lacks 'family'");
    spec.family = penalty_family_from_string(j.at("family").get<std::string>());
    read_num(j, "lambda", spec.lambda);
    read_num(j, "epsilon", spec.epsilon);
    read_num(j, "a", spec.a);
    read_num(j, "delta", spec.delta);
    if (auto it = j.find("gamma"); it != j.end() && !it->is_null()) spec.gamma = number_from(*it, "gamma");
    if (auto it = j.find("weights"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError("penalty 'weights' must be an array");
        for (const auto& w : *it) spec.weights.push_back(number_from(w, "weights"));
    }
    spec.validate();
    return spec;
}

json to_json(const SolverConfig& c) {
    json j;
    if (c.step_omega) j["step_omega"] = *c.step_omega;
    j["safety"] = c.safety;
    j["relaxation"] = c.relaxation;
    j["coef_tol"] = c.coef_tol;
    j["obj_tol"] = c.obj_tol;
    j["max_outer"] = c.max_outer;
    j["inner_tol"] = c.inner_tol;
    j["inner_max"] = c.inner_max;
    j["descent_check"] = c.descent_check;
    j["surrogate"] = c.surrogate == Surrogate::Auto         ? "auto"
                     : c.surrogate == Surrogate::Linearized ? "linearized"
                                                            : "quadratic";
    if (c.poisson_radius) j["poisson_radius"] = *c.poisson_radius;
    j["record_trace"] = c.record_trace;
    return j;
}

SolverConfig solver_config_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("solver JSON must be an object");
    SolverConfig c;
    if (auto it = j.find("step_omega"); it != j.end() && !it->is_null()) c.step_omega = number_from(*it, "step_omega");
    read_num(j, "safety", c.safety);
    read_num(j, "relaxation", c.relaxation);
    read_num(j, "coef_tol", c.coef_tol);
    read_num(j, "obj_tol", c.obj_tol);
    read_opt(j, "max_outer", c.max_outer);
    read_num(j, "inner_tol", c.inner_tol);
    read_opt(j, "inner_max", c.inner_max);
    read_opt(j, "descent_check", c.descent_check);
    if (auto it = j.find("surrogate"); it != j.end() && !it->is_null()) {
        const auto s = it->get<std::string>();
        if (s == "auto") c.surrogate = Surrogate::Auto;
        else if (s == "linearized") c.surrogate = Surrogate::Linearized;
        else if (s == "quadratic") c.surrogate = Surrogate::Quadratic;
        else throw ValidationError("unknown surrogate '" + s + "'");
    }
    if (auto it = j.find("poisson_radius"); it != j.end() && !it->is_null())
        c.poisson_radius = number_from(*it, "poisson_radius");
    read_opt(j, "record_trace", c.record_trace);
    c.validate();
    return c;
}

json to_json(const FitResult& r, bool include_trace) {
    json j;
    j["coef"] = std::vector<double>(r.coef.beta.data(), r.coef.beta.data() + r.coef.beta.size());
    if (r.coef.intercept) j["intercept"] = *r.coef.intercept;
    j["objective"] = number_or_tag(r.objective);
    j["iters"] = r.outer_iters;
    j["map_evals"] = r.map_evals;
    j["kkt"] = number_or_tag(r.kkt_residual);
    j["termination"] = std::string(to_string(r.termination));
    if (include_trace) {
        json t = json::array();
        for (double v : r.trace) t.push_back(number_or_tag(v));
        j["trace"] = std::move(t);
    }
    return j;
}

FitResult fit_result_from_json(const json& j) {
    if (!j.is_object() || !j.contains("coef")) throw ValidationError("fit result JSON lacks 'coef'");
    FitResult r;
    const auto& c = j.at("coef");
    r.coef.beta.resize(static_cast<Eigen::Index>(c.size()));
    for (std::size_t k = 0; k < c.size(); ++k) r.coef.beta[static_cast<Eigen::Index>(k)] = number_from(c[k], "coef");
    if (auto it = j.find("intercept"); it != j.end() && !it->is_null()) r.coef.intercept = number_from(*it, "intercept");
    read_num(j, "objective", r.objective);
    read_opt(j, "iters", r.outer_iters);
    read_opt(j, "map_evals", r.map_evals);
    read_num(j, "kkt", r.kkt_residual);
    if (auto it = j.find("termination"); it != j.end()) {
        const auto s = it->get<std::string>();
        if (s == to_string(Termination::CoefTol)) r.termination = Termination::CoefTol;
        else if (s == to_string(Termination::ObjTol)) r.termination = Termination::ObjTol;
        else if (s == to_string(Termination::MaxIter)) r.termination = Termination::MaxIter;
        else throw ValidationError("unknown termination '" + s + "'");
    }
    if (auto it = j.find("trace"); it != j.end())
        for (const auto& v : *it) r.trace.push_back(number_from(v, "trace"));
    return r;
}

std::string dump_json(const json& j) { return j.dump(); }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

std::string format_csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    (void)ec;
    return std::string(buf, ptr);
}

Eigen::Index CsvTable::column(const std::string& name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return static_cast<Eigen::Index>(k);
    throw ValidationError("csv has no column '" + name + "'");
}

CsvTable parse_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split(line);
        if (t.header.empty()) {
            for (auto f : fields) {
                if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
                if (f.empty()) throw ValidationError("csv header has an empty column name");
                t.header.emplace_back(f);
            }
            continue;
        }
        if (fields.size() != t.header.size())
            throw ValidationError("csv line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) row.push_back(parse_double(f, line_no));
        rows.push_back(std::move(row));
    }
    if (t.header.empty()) throw ValidationError("csv is empty");
    if (rows.empty()) throw ValidationError("csv has no data rows");
    t.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t.header.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < t.header.size(); ++k)
            t.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    return t;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv(in);
}

FidelityModel load_dataset(const CsvTable& table, const DatasetSpec& spec) {
    std::vector<Eigen::Index> used{table.column(spec.response_col)};
    if (spec.family == Family::Cox) used.push_back(table.column(spec.status_col));
    if (spec.offset_col) {
        if (spec.family != Family::Poisson) throw ValidationError("offsets apply to poisson models only");
        used.push_back(table.column(*spec.offset_col));
    }
    std::vector<Eigen::Index> predictors;
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(table.header.size()); ++k)
        if (std::find(used.begin(), used.end(), k) == used.end()) predictors.push_back(k);
    if (predictors.empty()) throw ValidationError("dataset has no predictor columns");

    const Eigen::Index n = table.values.rows();
    Eigen::MatrixXd x(n, static_cast<Eigen::Index>(predictors.size()));
    for (std::size_t k = 0; k < predictors.size(); ++k) x.col(static_cast<Eigen::Index>(k)) = table.values.col(predictors[k]);
    const Eigen::VectorXd resp = table.values.col(used[0]);

    Response r;
    switch (spec.family) {
        case Family::Gaussian: r = Response::gaussian(resp); break;
        case Family::Logistic: r = Response::logistic(resp); break;
        case Family::Poisson:
            r = spec.offset_col ? Response::poisson(resp, Eigen::VectorXd(table.values.col(used[1])))
                                : Response::poisson(resp);
            break;
        case Family::Cox: {
            std::vector<int> status(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const double s = table.values(i, used[1]);
                if (s != 0.0 && s != 1.0) throw ValidationError("cox status must be 0 or 1");
                status[static_cast<std::size_t>(i)] = static_cast<int>(s);
            }
            r = Response::cox(resp, std::move(status));
            break;
        }
    }
    return FidelityModel(DesignMatrix(std::move(x), spec.intercept), std::move(r));
}

void write_csv_matrix(std::ostream& out, const std::vector<std::string>& header, const Eigen::MatrixXd& values) {
    for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << header[k];
    out << '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index k = 0; k < values.cols(); ++k) out << (k ? "," : "") << format_csv_number(values(i, k));
        out << '\n';
    }
}

}  // namespace mist
