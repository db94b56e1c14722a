#include "mist/fidelity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mist/errors.hpp"

namespace mist {

namespace {

// exp() overflows just above 709.78
constexpr double kMaxExponent = 700.0;

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

void require_dim(const FidelityModel& m, const Eigen::VectorXd& packed) {
    if (packed.size() != m.dim()) {
        std::ostringstream os;
        os << "coefficient vector has length " << packed.size() << ", model expects " << m.dim();
        throw DimensionError(os.str());
    }
}

}  // namespace

std::string_view to_string(Family f) {
    switch (f) {
        case Family::Gaussian: return "gaussian";
        case Family::Logistic: return "logistic";
        case Family::Poisson: return "poisson";
        case Family::Cox: return "cox";
    }
    return "unknown";
}

Family family_from_string(std::string_view name) {
    if (name == "gaussian") return Family::Gaussian;
    if (name == "logistic" || name == "binomial") return Family::Logistic;
    if (name == "poisson") return Family::Poisson;
    if (name == "cox") return Family::Cox;
    throw ValidationError("unknown fidelity family '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// DesignMatrix

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, bool has_intercept) : x_(std::move(x)), intercept_(has_intercept) {
    if (x_.rows() < 1 || x_.cols() < 1) throw ValidationError("design matrix must have N >= 1 and p >= 1");
    if (!x_.allFinite()) throw ValidationError("design matrix contains non-finite entries");
}

Eigen::MatrixXd DesignMatrix::augmented_matrix() const {
    if (!intercept_) return x_;
    Eigen::MatrixXd a(x_.rows(), x_.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x_.cols()) = x_;
    return a;
}

Eigen::VectorXd DesignMatrix::times(const Eigen::VectorXd& packed) const {
    if (!intercept_) return x_ * packed;
    Eigen::VectorXd eta = x_ * packed.tail(x_.cols());
    eta.array() += packed[0];
    return eta;
}

Eigen::VectorXd DesignMatrix::transpose_times(const Eigen::VectorXd& resid) const {
    if (!intercept_) return x_.transpose() * resid;
    Eigen::VectorXd out(dim());
    out[0] = resid.sum();
    out.tail(x_.cols()) = x_.transpose() * resid;
    return out;
}

// ---------------------------------------------------------------------------
// Response

Response Response::gaussian(Eigen::VectorXd y) {
    Response r;
    r.family = Family::Gaussian;
    r.y = std::move(y);
    r.validate();
    return r;
}

Response Response::logistic(Eigen::VectorXd y) {
    Response r;
    r.family = Family::Logistic;
    r.y = std::move(y);
    r.validate();
    return r;
}

Response Response::poisson(Eigen::VectorXd y, std::optional<Eigen::VectorXd> offsets) {
    Response r;
    r.family = Family::Poisson;
    r.offsets = offsets ? std::move(*offsets) : Eigen::VectorXd::Ones(y.size());
    r.y = std::move(y);
    r.validate();
    return r;
}

Response Response::cox(Eigen::VectorXd time, std::vector<int> status) {
    Response r;
    r.family = Family::Cox;
    r.time = std::move(time);
    r.status = std::move(status);
    r.validate();
    return r;
}

void Response::validate() const {
    switch (family) {
        case Family::Gaussian:
            if (!y.allFinite()) throw ValidationError("gaussian response contains non-finite values");
            break;
        case Family::Logistic:
            for (double v : y)
                if (v != 0.0 && v != 1.0) throw ValidationError("logistic response must be 0/1");
            break;
        case Family::Poisson:
            for (double v : y)
                if (!(v >= 0.0) || v != std::floor(v)) throw ValidationError("poisson response must be nonnegative integers");
            if (offsets.size() != y.size()) throw DimensionError("poisson offsets length differs from response");
            for (double d : offsets)
                if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("poisson offsets must be positive");
            break;
        case Family::Cox: {
            if (static_cast<std::size_t>(time.size()) != status.size())
                throw DimensionError("cox time and status lengths differ");
            for (double t : time)
                if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("cox times must be positive");
            bool any_event = false;
            for (int s : status) {
                if (s != 0 && s != 1) throw ValidationError("cox status must be 0/1");
                any_event = any_event || s == 1;
            }
            if (!any_event) throw ValidationError("cox response needs at least one event");
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Coefficients

Eigen::VectorXd Coefficients::packed() const {
    if (!intercept) return beta;
    Eigen::VectorXd out(beta.size() + 1);
    out[0] = *intercept;
    out.tail(beta.size()) = beta;
    return out;
}

Coefficients Coefficients::unpack(const Eigen::VectorXd& packed, bool has_intercept) {
    Coefficients c;
    if (has_intercept) {
        c.intercept = packed[0];
        c.beta = packed.tail(packed.size() - 1);
    } else {
        c.beta = packed;
    }
    return c;
}

Coefficients Coefficients::zero(Eigen::Index p, bool has_intercept) {
    Coefficients c;
    if (has_intercept) c.intercept = 0.0;
    c.beta = Eigen::VectorXd::Zero(p);
    return c;
}

// ---------------------------------------------------------------------------
// FidelityModel

FidelityModel::FidelityModel(DesignMatrix design, Response response)
    : design_(std::move(design)), response_(std::move(response)) {
    response_.validate();
    if (response_.size() != design_.rows()) throw DimensionError("response length differs from design rows");

    if (family() == Family::Cox) {
        if (design_.has_intercept())
            throw ValidationError("cox partial likelihood is invariant to an intercept; build the design without one");
        const auto n = static_cast<std::size_t>(design_.rows());
        order_.resize(n);
        std::iota(order_.begin(), order_.end(), Eigen::Index{0});
        std::stable_sort(order_.begin(), order_.end(),
                         [this](Eigen::Index a, Eigen::Index b) { return response_.time[a] > response_.time[b]; });
        std::size_t begin = 0;
        while (begin < n) {
            std::size_t end = begin + 1;
            while (end < n && response_.time[order_[end]] == response_.time[order_[begin]]) ++end;
            tie_groups_.emplace_back(begin, end);
            begin = end;
        }
        events_ = static_cast<std::size_t>(std::count(response_.status.begin(), response_.status.end(), 1));
    }

    if (family() == Family::Poisson) {
        const Eigen::MatrixXd xt = design_.augmented_matrix();
        theta_ = xt.cwiseAbs();
        for (Eigen::Index i = 0; i < theta_.rows(); ++i) {
            const double s = theta_.row(i).sum();
            if (!(s > 0.0)) throw ValidationError("poisson majorizer needs every design row to have a nonzero entry");
            theta_.row(i) /= s;
        }
    }
}

Eigen::VectorXd FidelityModel::checked_eta(const Eigen::VectorXd& packed) const {
    require_dim(*this, packed);
    Eigen::VectorXd eta = design_.times(packed);
    if (family() == Family::Poisson && eta.maxCoeff() > kMaxExponent) {
        std::ostringstream os;
        os << "poisson linear predictor overflow (max eta = " << eta.maxCoeff() << ", ||theta|| = " << packed.norm()
           << ")";
        throw OverflowError(os.str(), packed);
    }
    return eta;
}

double FidelityModel::neg_loglik(const Eigen::VectorXd& packed) const {
    const Eigen::VectorXd eta = checked_eta(packed);
    const auto& y = response_.y;
    switch (family()) {
        case Family::Gaussian:
            return 0.5 * (eta - y).squaredNorm();
        case Family::Logistic: {
            double s = 0.0;
            for (Eigen::Index i = 0; i < eta.size(); ++i) s += softplus(eta[i]) - y[i] * eta[i];
            return s;
        }
        case Family::Poisson:
            return (response_.offsets.array() * eta.array().exp() - y.array() * eta.array()).sum();
        case Family::Cox:
            return cox_neg_loglik(eta);
    }
    return 0.0;
}

Eigen::VectorXd FidelityModel::gradient(const Eigen::VectorXd& packed) const {
    const Eigen::VectorXd eta = checked_eta(packed);
    const auto& y = response_.y;
    switch (family()) {
        case Family::Gaussian:
            return design_.transpose_times(y - eta);
        case Family::Logistic: {
            Eigen::VectorXd r(eta.size());
            for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = y[i] - sigmoid(eta[i]);
            return design_.transpose_times(r);
        }
        case Family::Poisson:
            return design_.transpose_times(y - (response_.offsets.array() * eta.array().exp()).matrix());
        case Family::Cox:
            return cox_score(eta);
    }
    return {};
}

Eigen::MatrixXd FidelityModel::neg_hessian(const Eigen::VectorXd& packed) const {
    const Eigen::VectorXd eta = checked_eta(packed);
    if (family() == Family::Cox) return cox_neg_hessian(eta);
    Eigen::VectorXd w(eta.size());
    switch (family()) {
        case Family::Gaussian:
            w.setOnes();
            break;
        case Family::Logistic:
            for (Eigen::Index i = 0; i < eta.size(); ++i) {
                const double s = sigmoid(eta[i]);
                w[i] = s * (1.0 - s);
            }
            break;
        case Family::Poisson:
            w = response_.offsets.array() * eta.array().exp();
            break;
        case Family::Cox:
            break;
    }
    const Eigen::MatrixXd xt = design_.augmented_matrix();
    return xt.transpose() * w.asDiagonal() * xt;
}

// Breslow: every event at time t shares the risk set {k : t_k >= t}.  Subjects
// are visited in decreasing time so risk-set sums accumulate.
double FidelityModel::cox_neg_loglik(const Eigen::VectorXd& eta) const {
    const double shift = eta.maxCoeff();
    double risk = 0.0;
    double nll = 0.0;
    for (const auto& [b, e] : tie_groups_) {
        for (std::size_t k = b; k < e; ++k) risk += std::exp(eta[order_[k]] - shift);
        const double log_risk = shift + std::log(risk);
        for (std::size_t k = b; k < e; ++k) {
            const Eigen::Index i = order_[k];
            if (response_.status[i] == 1) nll -= eta[i] - log_risk;
        }
    }
    return nll;
}

Eigen::VectorXd FidelityModel::cox_score(const Eigen::VectorXd& eta) const {
    const Eigen::MatrixXd& x = design_.x();
    const double shift = eta.maxCoeff();
    double risk = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(x.cols());
    Eigen::VectorXd score = Eigen::VectorXd::Zero(x.cols());
    for (const auto& [b, e] : tie_groups_) {
        for (std::size_t k = b; k < e; ++k) {
            const Eigen::Index i = order_[k];
            const double w = std::exp(eta[i] - shift);
            risk += w;
            s1 += w * x.row(i).transpose();
        }
        for (std::size_t k = b; k < e; ++k) {
            const Eigen::Index i = order_[k];
            if (response_.status[i] == 1) score += x.row(i).transpose() - s1 / risk;
        }
    }
    return score;
}

Eigen::MatrixXd FidelityModel::cox_neg_hessian(const Eigen::VectorXd& eta) const {
    const Eigen::MatrixXd& x = design_.x();
    const auto p = x.cols();
    const double shift = eta.maxCoeff();
    double risk = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(p, p);
    for (const auto& [b, e] : tie_groups_) {
        for (std::size_t k = b; k < e; ++k) {
            const Eigen::Index i = order_[k];
            const double w = std::exp(eta[i] - shift);
            risk += w;
            s1 += w * x.row(i).transpose();
            s2.noalias() += w * x.row(i).transpose() * x.row(i);
        }
        std::size_t d = 0;
        for (std::size_t k = b; k < e; ++k) d += response_.status[order_[k]] == 1 ? 1 : 0;
        if (d == 0) continue;
        const Eigen::VectorXd mean = s1 / risk;
        h += static_cast<double>(d) * (s2 / risk - mean * mean.transpose());
    }
    return h;
}

double neg_loglik(const FidelityModel& model, const Coefficients& coef) { return model.neg_loglik(coef.packed()); }

Eigen::VectorXd gradient(const FidelityModel& model, const Coefficients& coef) {
    return model.gradient(coef.packed());
}

// ---------------------------------------------------------------------------
// Curvature

namespace {

template <typename Apply>
double power_iteration(Eigen::Index n, Apply&& gram, double tol, int max_iter) {
    if (!(tol > 0.0)) throw ValidationError("spectral_norm: tol must be > 0");
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd w = gram(v);
    if (w.norm() == 0.0) {
        // start vector in the null space; use a deterministic alternating vector
        for (Eigen::Index i = 0; i < n; ++i) v[i] = (i % 2 == 0 ? 1.0 : -1.0) * (1.0 + static_cast<double>(i) / n);
        v.normalize();
        w = gram(v);
        if (w.norm() == 0.0) return 0.0;
    }
    double rq = v.dot(w);
    for (int it = 0; it < max_iter; ++it) {
        v = w / w.norm();
        w = gram(v);
        const double next = v.dot(w);
        if (std::abs(next - rq) <= tol * std::abs(next)) return next;
        rq = next;
    }
    throw ConvergenceError("spectral_norm: power iteration did not converge", v, rq);
}

}  // namespace

double spectral_norm(const DesignMatrix& design, double tol, int max_iter) {
    return power_iteration(
        design.dim(), [&design](const Eigen::VectorXd& v) { return design.transpose_times(design.times(v)); }, tol,
        max_iter);
}

double spectral_norm(const Eigen::MatrixXd& a, double tol, int max_iter) {
    return power_iteration(
        a.cols(), [&a](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a.transpose() * (a * v); }, tol,
        max_iter);
}

double curvature_bound(const FidelityModel& model) {
    switch (model.family()) {
        case Family::Gaussian:
            return spectral_norm(model.design());
        case Family::Logistic:
            return 0.25 * spectral_norm(model.design());
        case Family::Cox: {
            const double max_row = model.design().x().rowwise().squaredNorm().maxCoeff();
            return static_cast<double>(model.event_count()) * max_row;
        }
        case Family::Poisson:
            throw NotGloballyLipschitz(
                "poisson log-likelihood has no global curvature bound; use the separable majorizer "
                "(poisson_mm_fit) or supply a region radius");
    }
    return 0.0;
}

double poisson_region_curvature_bound(const FidelityModel& model, double radius) {
    if (model.family() != Family::Poisson) throw ValidationError("region curvature bound applies to poisson only");
    if (!(radius > 0.0)) throw ValidationError("region radius must be > 0");
    Eigen::MatrixXd xt = model.design().augmented_matrix();
    const auto& d = model.response().offsets;
    for (Eigen::Index i = 0; i < xt.rows(); ++i) {
        // |eta_i| <= ||x~_i|| * radius on the ball
        const double expo = xt.row(i).norm() * radius;
        if (expo > kMaxExponent) throw OverflowError("region radius too large for a finite poisson bound", {});
        xt.row(i) *= std::sqrt(d[i] * std::exp(expo));
    }
    return spectral_norm(xt);
}

// ---------------------------------------------------------------------------
// Poisson separable majorizer

PoissonMajorizer::PoissonMajorizer(const FidelityModel& model, Eigen::VectorXd alpha)
    : model_(&model), alpha_(std::move(alpha)) {
    if (model.family() != Family::Poisson) throw ValidationError("poisson majorizer requires a poisson model");
    require_dim(model, alpha_);
    eta_ = model.design().times(alpha_);
}

std::pair<double, double> PoissonMajorizer::component(Eigen::Index j, double b) const {
    if (j < 0 || j >= model_->dim()) throw DimensionError("majorizer coordinate out of range");
    const auto& design = model_->design();
    const auto& theta = model_->poisson_weights();
    const auto& y = model_->response().y;
    const auto& d = model_->response().offsets;
    const double step = b - alpha_[j];
    double value = 0.0;
    double deriv = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double x = design.augmented(i, j);
        if (x == 0.0) continue;
        const double t = theta(i, j);
        const double u = x / t * step + eta_[i];
        if (u > kMaxExponent) {
            std::ostringstream os;
            os << "poisson majorizer exponent overflow at coordinate " << j << " (u = " << u << ")";
            Eigen::VectorXd where = alpha_;
            where[j] = b;
            throw OverflowError(os.str(), where);
        }
        const double mu = d[i] * std::exp(u);
        value += t * (mu - y[i] * u);
        deriv += x * (mu - y[i]);
    }
    return {value, deriv};
}

double PoissonMajorizer::derivative(Eigen::Index j, double b) const noexcept {
    const auto& design = model_->design();
    const auto& theta = model_->poisson_weights();
    const auto& y = model_->response().y;
    const auto& d = model_->response().offsets;
    const double step = b - alpha_[j];
    double deriv = 0.0;
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double x = design.augmented(i, j);
        if (x == 0.0) continue;
        const double u = x / theta(i, j) * step + eta_[i];
        deriv += x * (d[i] * std::exp(u) - y[i]);
    }
    return deriv;
}

double PoissonMajorizer::total(const Eigen::VectorXd& theta) const {
    require_dim(*model_, theta);
    double s = 0.0;
    for (Eigen::Index j = 0; j < theta.size(); ++j) s += component(j, theta[j]).first;
    return s;
}

std::pair<double, double> poisson_majorizer_component(const FidelityModel& model, const Eigen::VectorXd& alpha,
                                                      Eigen::Index j, double beta_j) {
    return PoissonMajorizer(model, alpha).component(j, beta_j);
}

// ---------------------------------------------------------------------------
// Unpenalized MLE

Eigen::VectorXd maximum_likelihood(const FidelityModel& model, double tol, int max_iter) {
    const auto k = model.dim();
    if (model.design().rows() <= k)
        throw ValidationError("unpenalized MLE needs more observations than coefficients (N > p)");

    if (model.family() == Family::Gaussian) {
        const Eigen::MatrixXd xt = model.design().augmented_matrix();
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xt);
        if (qr.rank() < k) throw ValidationError("design is rank deficient; least squares estimate is not unique");
        return qr.solve(model.response().y);
    }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
    double f = model.neg_loglik(theta);
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXd g = model.gradient(theta);  // gradient of l, descent direction for -l
        const Eigen::MatrixXd h = model.neg_hessian(theta);
        Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
            (ldlt.vectorD().array() <= 1e-14 * std::max(1.0, h.diagonal().maxCoeff())).any())
            throw ValidationError("hessian is singular; the unpenalized MLE does not exist");
        const Eigen::VectorXd dir = ldlt.solve(g);
        double step = 1.0;
        Eigen::VectorXd next;
        double fn = f;
        int halvings = 0;
        for (;; ++halvings) {
            next = theta + step * dir;
            try {
                fn = model.neg_loglik(next);
            } catch (const OverflowError&) {
                fn = std::numeric_limits<double>::infinity();
            }
            if (fn <= f + 1e-12 * std::max(1.0, std::abs(f))) break;
            if (halvings >= 60) throw ConvergenceError("MLE line search failed", theta, dir.norm());
            step *= 0.5;
        }
        const double change = (next - theta).norm();
        theta = next;
        f = fn;
        if (!theta.allFinite() || theta.norm() > 1e8)
            throw ConvergenceError("MLE diverges (complete separation?)", theta, change);
        if (change <= tol * (1.0 + theta.norm())) return theta;
    }
    throw ConvergenceError("MLE Newton iterations exhausted", theta, 0.0);
}

}  // namespace mist
