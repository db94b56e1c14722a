#include "mist/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "mist/errors.hpp"

namespace mist {

std::uint64_t CounterRng::next() noexcept {
    ++counter_;
    std::uint64_t z = key_ + counter_ * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double CounterRng::uniform() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
    // Phi^{-1}(u) = -sqrt(2) * erfc^{-1}(2u)
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * uniform());
}

std::string_view to_string(SimFamily f) {
    switch (f) {
        case SimFamily::LinearEx1: return "linear-ex1";
        case SimFamily::LogisticEx2: return "logistic-ex2";
        case SimFamily::CoxSynthetic: return "cox-synthetic";
    }
    return "unknown";
}

SimFamily sim_family_from_string(std::string_view name) {
    if (name == "linear-ex1" || name == "linear") return SimFamily::LinearEx1;
    if (name == "logistic-ex2" || name == "logistic") return SimFamily::LogisticEx2;
    if (name == "cox-synthetic" || name == "cox") return SimFamily::CoxSynthetic;
    throw ValidationError("unknown simulation family '" + std::string(name) + "'");
}

SimScenario SimScenario::linear_ex1(std::size_t p, double rho, double sigma, std::uint64_t seed) {
    SimScenario s;
    s.family = SimFamily::LinearEx1;
    s.p = p;
    s.n = 100;
    s.rho = rho;
    s.sigma = sigma;
    s.seed = seed;
    return s;
}

SimScenario SimScenario::logistic_ex2(std::size_t q, double rho, std::uint64_t seed) {
    SimScenario s;
    s.family = SimFamily::LogisticEx2;
    s.p = 100;
    s.q = q;
    s.n = 1000;
    s.rho = rho;
    s.seed = seed;
    return s;
}

SimScenario SimScenario::cox_synthetic(std::size_t p, std::size_t n, double rho, std::uint64_t seed) {
    SimScenario s;
    s.family = SimFamily::CoxSynthetic;
    s.p = p;
    s.n = n;
    s.rho = rho;
    s.seed = seed;
    return s;
}

std::size_t SimScenario::resolved_q() const {
    if (q) return *q;
    switch (family) {
        case SimFamily::LinearEx1: return 3 * (p / 9);
        case SimFamily::LogisticEx2: return std::min<std::size_t>(25, p);
        case SimFamily::CoxSynthetic: return std::max<std::size_t>(1, std::min<std::size_t>(3, p));
    }
    return 0;
}

void SimScenario::validate() const {
    if (p < 1 || n < 1) throw ValidationError("scenario needs p >= 1 and N >= 1");
    if (resolved_q() > p) throw ValidationError("scenario intrinsic dimension q exceeds p");
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("scenario rho must lie in [0, 1)");
    if (family == SimFamily::LinearEx1 && !(sigma > 0.0)) throw ValidationError("scenario sigma must be > 0");
}

SimScenario SimScenario::replicate(std::uint64_t index) const {
    SimScenario s = *this;
    s.seed = seed ^ index;
    return s;
}

std::string SimScenario::label() const {
    std::ostringstream os;
    os << to_string(family) << "/p" << p << "/q" << resolved_q() << "/n" << n << "/rho" << rho;
    if (family == SimFamily::LinearEx1) os << "/sigma" << sigma;
    os << "/seed" << seed;
    return os.str();
}

FidelityModel SimDataset::model() const { return FidelityModel(DesignMatrix(x, scenario.has_intercept()), response); }

Eigen::MatrixXd covariance_ar1(std::size_t p, double rho) {
    if (!(std::abs(rho) < 1.0)) throw ValidationError("AR(1) correlation must satisfy |rho| < 1");
    const auto n = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd s(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) s(j, k) = std::pow(rho, static_cast<double>(std::abs(j - k)));
    return s;
}

Eigen::MatrixXd covariance_equicorr(std::size_t p, double rho, double scale) {
    if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("equicorrelation rho must lie in [0, 1)");
    if (!(scale > 0.0)) throw ValidationError("covariance scale must be > 0");
    const auto n = static_cast<Eigen::Index>(p);
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(n, n, rho);
    s.diagonal().setOnes();
    return scale * s;
}

Eigen::VectorXd true_coefficients(const SimScenario& scenario) {
    const auto p = static_cast<Eigen::Index>(scenario.p);
    const auto q = static_cast<Eigen::Index>(scenario.resolved_q());
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < q; ++j) {
        switch (scenario.family) {
            case SimFamily::LinearEx1:
                beta[j] = 3.0;
                break;
            case SimFamily::LogisticEx2: {
                const double j1 = static_cast<double>(j + 1);  // 1-based index
                beta[j] = 3.0 * ((j + 1) % 2 == 0 ? 1.0 : -1.0) * std::exp(-2.0 * (j1 - 1.0) / 200.0);
                break;
            }
            case SimFamily::CoxSynthetic:
                beta[j] = 1.0;
                break;
        }
    }
    return beta;
}

namespace {

Eigen::MatrixXd draw_ar1_design(const SimScenario& sc, CounterRng& rng) {
    const auto n = static_cast<Eigen::Index>(sc.n);
    const auto p = static_cast<Eigen::Index>(sc.p);
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_ar1(sc.p, sc.rho));
    if (llt.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd z(p);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
        x.row(i) = (l * z).transpose();
    }
    return x;
}

// x = sqrt(scale) * (sqrt(rho) z0 1 + sqrt(1 - rho) z)
Eigen::MatrixXd draw_equicorr_design(const SimScenario& sc, CounterRng& rng, double scale) {
    const auto n = static_cast<Eigen::Index>(sc.n);
    const auto p = static_cast<Eigen::Index>(sc.p);
    const double a = std::sqrt(scale * sc.rho);
    const double b = std::sqrt(scale * (1.0 - sc.rho));
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double shared = rng.normal();
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = a * shared + b * rng.normal();
    }
    return x;
}

}  // namespace

SimDataset gen_dataset(const SimScenario& scenario) {
    scenario.validate();
    CounterRng rng(scenario.seed);
    SimDataset ds;
    ds.scenario = scenario;
    ds.beta_true = true_coefficients(scenario);
    const auto n = static_cast<Eigen::Index>(scenario.n);

    switch (scenario.family) {
        case SimFamily::LinearEx1: {
            ds.x = draw_ar1_design(scenario, rng);
            Eigen::VectorXd y = ds.x * ds.beta_true;
            for (Eigen::Index i = 0; i < n; ++i) y[i] += scenario.sigma * rng.normal();
            ds.response = Response::gaussian(std::move(y));
            break;
        }
        case SimFamily::LogisticEx2: {
            ds.x = draw_equicorr_design(scenario, rng, 1.0 / 9.0);
            const Eigen::VectorXd eta = ds.x * ds.beta_true;
            Eigen::VectorXd y(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                const double prob = 1.0 / (1.0 + std::exp(-eta[i]));
                y[i] = rng.uniform() < prob ? 1.0 : 0.0;
            }
            ds.response = Response::logistic(std::move(y));
            break;
        }
        case SimFamily::CoxSynthetic: {
            ds.x = draw_ar1_design(scenario, rng);
            const Eigen::VectorXd eta = ds.x * ds.beta_true;
            Eigen::VectorXd event(n), censor_u(n);
            for (Eigen::Index i = 0; i < n; ++i) event[i] = -std::log(rng.uniform()) / std::exp(eta[i]);
            for (Eigen::Index i = 0; i < n; ++i) censor_u[i] = rng.uniform();
            // C_i = c * U_i with c chosen (bisection in log c) for ~40% censoring
            auto censored_fraction = [&](double c) {
                Eigen::Index k = 0;
                for (Eigen::Index i = 0; i < n; ++i) k += (c * censor_u[i] < event[i]) ? 1 : 0;
                return static_cast<double>(k) / static_cast<double>(n);
            };
            double lo = std::log(1e-8), hi = std::log(1e8);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (censored_fraction(std::exp(mid)) > 0.4 ? lo : hi) = mid;
            }
            const double c = std::exp(hi);
            Eigen::VectorXd time(n);
            std::vector<int> status(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const double cens = c * censor_u[i];
                status[static_cast<std::size_t>(i)] = event[i] <= cens ? 1 : 0;
                time[i] = std::min(event[i], cens);
            }
            if (std::find(status.begin(), status.end(), 1) == status.end())
                status[static_cast<std::size_t>(std::min_element(event.begin(), event.end()) - event.begin())] = 1;
            ds.response = Response::cox(std::move(time), std::move(status));
            break;
        }
    }
    return ds;
}

ComparisonRecord compare_solutions(const FitResult& a, const FitResult& b, const Problem& problem) {
    const Eigen::VectorXd pa = a.coef.packed();
    const Eigen::VectorXd pb = b.coef.packed();
    if (pa.size() != pb.size() || pa.size() != problem.dim())
        throw DimensionError("compare_solutions: coefficient vectors differ in length");
    ComparisonRecord rec;
    rec.norm_diff = (pa - pb).norm();
    rec.obj_a = total_objective(problem, pa);
    rec.obj_b = total_objective(problem, pb);
    rec.a_leq_b = rec.obj_a <= rec.obj_b + 1e-10;
    return rec;
}

}  // namespace mist
