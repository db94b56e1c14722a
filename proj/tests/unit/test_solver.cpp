#include <doctest.h>

#include <cmath>
#include <random>

#include "mist/errors.hpp"
#include "mist/solver.hpp"
#include "oracles.hpp"

using namespace mist;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

PenaltySpec lasso(double lambda) {
    PenaltySpec s;
    s.lambda = lambda;
    return s;
}

PenaltySpec family(PenaltyFamily f, double lambda, std::size_t p) {
    PenaltySpec s;
    s.family = f;
    s.lambda = lambda;
    if (f == PenaltyFamily::ElasticNet || f == PenaltyFamily::AdaptiveElasticNet) s.epsilon = 0.1;
    if (s.adaptive()) {
        s.weights.assign(p, 1.0);
        s.weights[0] = 0.5;
        if (p > 2) s.weights[p - 1] = kInf;
    }
    if (f == PenaltyFamily::Log || f == PenaltyFamily::Geman) s.delta = 1.5;
    return s;
}

SolverConfig tight() {
    SolverConfig c;
    c.coef_tol = 1e-11;
    c.obj_tol = 1e-300;
    c.inner_tol = 1e-13;
    return c;
}

bool monotone(const std::vector<double>& trace) {
    for (std::size_t k = 1; k < trace.size(); ++k)
        if (trace[k] > trace[k - 1] + 1e-12) return false;
    return true;
}

const PenaltyFamily kAll[] = {PenaltyFamily::Lasso, PenaltyFamily::AdaptiveLasso, PenaltyFamily::ElasticNet,
                              PenaltyFamily::AdaptiveElasticNet, PenaltyFamily::Scad, PenaltyFamily::Mcp,
                              PenaltyFamily::Geman, PenaltyFamily::Log};

}  // namespace

TEST_CASE("soft thresholding") {
    CHECK(soft_threshold(3, 1) == 2);
    CHECK(soft_threshold(-0.5, 1) == 0);
    for (double u : {-2.5, 0.0, 7.0}) CHECK(soft_threshold(u, 0) == u);
    CHECK(soft_threshold(1e300, kInf) == 0.0);
    CHECK(soft_threshold_vec(vec({3, -3}), vec({1, 1})) == vec({2, -2}));
    CHECK(soft_threshold_vec(vec({0.2, 5}), vec({1, 0})) == vec({0, 5}));
    CHECK(soft_threshold_vec(Eigen::VectorXd(0), Eigen::VectorXd(0)).size() == 0);
    CHECK_THROWS_AS(soft_threshold_vec(vec({1}), vec({1, 2})), DimensionError);
}

TEST_CASE("total objective examples") {
    FidelityModel m(DesignMatrix(Eigen::MatrixXd::Identity(1, 1), false), Response::gaussian(vec({0})));
    CHECK(total_objective(Problem(m, lasso(1)), Coefficients{{}, vec({1})}) == doctest::Approx(1.5));
    PenaltySpec en = lasso(1);
    en.family = PenaltyFamily::ElasticNet;
    en.epsilon = 1;
    CHECK(total_objective(Problem(m, en), Coefficients{{}, vec({1})}) == doctest::Approx(2.5));
    CHECK(total_objective(Problem(m, lasso(1)), Coefficients{{}, vec({0})}) == m.neg_loglik(vec({0})));
    // the intercept is not penalized
    FidelityModel mi(DesignMatrix(Eigen::MatrixXd::Identity(1, 1), true), Response::gaussian(vec({0})));
    CHECK(total_objective(Problem(mi, lasso(5)), Coefficients{2.0, vec({0})}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(total_objective(Problem(mi, lasso(5)), Coefficients{{}, vec({0})}), DimensionError);
}

TEST_CASE("ist_minimize examples") {
    const auto unit = [](std::size_t) { return 1.0; };
    GradientOracle g = [](const Eigen::VectorXd& b) -> Eigen::VectorXd { return b - vec({3}); };
    auto r = ist_minimize(g, vec({1}), 1.0, vec({0}), unit, 1e-12, 100);
    CHECK(r.b[0] == doctest::Approx(2.0).epsilon(1e-12));

    std::mt19937_64 rng(3);
    const Eigen::MatrixXd a = oracle::gaussian_matrix(rng, 8, 4);
    const Eigen::MatrixXd q = a.transpose() * a + Eigen::MatrixXd::Identity(4, 4);
    const Eigen::VectorXd c = oracle::gaussian_vector(rng, 4);
    GradientOracle gq = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd { return q * b - c; };
    const double omega = 1.9 / spectral_norm(Eigen::MatrixXd(q.llt().matrixU()));
    auto rq = ist_minimize(gq, Eigen::VectorXd::Zero(4), omega, Eigen::VectorXd::Zero(4), unit, 1e-13, 1'000'000);
    CHECK((rq.b - q.ldlt().solve(c)).norm() < 1e-10);

    auto rf = ist_minimize(g, vec({1}), 1.0, vec({2}), unit, 1e-12, 100);
    CHECK(rf.iterations == 1);
    CHECK(rf.b[0] == 2.0);

    // relaxed updates reach the same limit
    auto rr = ist_minimize(g, vec({1}), 1.0, vec({0}), [](std::size_t) { return 0.5; }, 1e-13, 1000);
    CHECK(rr.b[0] == doctest::Approx(2.0).epsilon(1e-11));

    CHECK_THROWS_AS(ist_minimize(g, vec({1}), 1.0, vec({0}), [](std::size_t) { return 0.01; }, 1e-14, 5),
                    ConvergenceError);
    CHECK_THROWS_AS(ist_minimize(g, vec({1, 1}), 1.0, vec({0}), unit, 1e-12, 5), DimensionError);
}

TEST_CASE("ist contraction on quadratic m") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 20; ++rep) {
        const Eigen::MatrixXd a = oracle::gaussian_matrix(rng, 10, 5);
        const Eigen::MatrixXd q = a.transpose() * a;
        const Eigen::VectorXd c = oracle::gaussian_vector(rng, 5, 3.0);
        const Eigen::VectorXd tau = Eigen::VectorXd::Constant(5, 0.7);
        const double omega = 1.9 / spectral_norm(a);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(5);
        double prev = kInf;
        for (int n = 0; n < 200; ++n) {
            const Eigen::VectorXd next = soft_threshold_vec(b - omega * (q * b - c), omega * tau);
            const double step = (next - b).norm();
            CHECK(step <= prev * (1 + 1e-12) + 1e-15);
            prev = step;
            b = next;
        }
    }
}

TEST_CASE("orthonormal gaussian lasso matches the closed form") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
        const Eigen::MatrixXd x = oracle::orthonormal_columns(rng, 40, 6);
        const Eigen::VectorXd y = oracle::gaussian_vector(rng, 40, 2.0);
        Problem prob(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), lasso(0.8));
        const Eigen::VectorXd closed = oracle::orthogonal_lasso(x, y, 0.8);
        const auto start = Coefficients::zero(6, false);
        auto r1 = mm_outer(prob, tight(), start);
        auto r2 = glm_mm_fit(prob, tight(), start);
        CHECK((r1.coef.beta - closed).norm() < 1e-8);
        CHECK((r2.coef.beta - closed).norm() < 1e-8);
        CHECK(kkt_residual(prob, Coefficients{{}, closed}) <= 1e-10);
    }
}

TEST_CASE("large lambda returns zero") {
    std::mt19937_64 rng(6);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 20, 4);
    const Eigen::VectorXd y = oracle::gaussian_vector(rng, 20);
    Problem prob(FidelityModel(DesignMatrix(x, true), Response::gaussian(y)), lasso(1.0));
    const double ybar = y.mean();
    const double lmax = (x.transpose() * (y - Eigen::VectorXd::Constant(20, ybar))).cwiseAbs().maxCoeff();
    Problem big = prob.with_penalty(lasso(lmax * 1.01));
    auto r = mm_outer(big, tight(), Coefficients::zero(4, true));
    CHECK(r.coef.beta.isZero(0.0));
    CHECK(*r.coef.intercept == doctest::Approx(ybar).epsilon(1e-9));
    auto rg = glm_mm_fit(big, tight(), Coefficients::zero(4, true));
    CHECK(rg.coef.beta.isZero(0.0));
}

TEST_CASE("starting at a stationary point stays there") {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd x = oracle::orthonormal_columns(rng, 30, 4);
    const Eigen::VectorXd y = oracle::gaussian_vector(rng, 30, 2.0);
    Problem prob(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), lasso(0.5));
    const Coefficients sol{{}, oracle::orthogonal_lasso(x, y, 0.5)};
    for (auto fit : {&mm_outer, &glm_mm_fit}) {
        auto r = fit(prob, tight(), sol);
        CHECK(r.outer_iters == 1);
        CHECK((r.coef.beta - sol.beta).norm() < 1e-12);
        CHECK(r.termination == Termination::CoefTol);
    }
}

TEST_CASE("glm update examples") {
    // X=[1], y=3, lambda=1, omega=2 (= 2/lambda*): the first update is exact
    FidelityModel m(DesignMatrix(Eigen::MatrixXd::Ones(1, 1), false), Response::gaussian(vec({3})));
    Problem prob(m, lasso(1));
    CHECK(glm_surrogate_minimizer(prob, 2.0, vec({0}))[0] == doctest::Approx(2.0));
    SolverConfig cfg;
    cfg.step_omega = 2.0;
    auto r = glm_mm_fit(prob, cfg, Coefficients::zero(1, false));
    CHECK(r.coef.beta[0] == doctest::Approx(2.0));
    CHECK(r.trace.size() >= 2);
    cfg.step_omega = 2.5;
    CHECK_THROWS_AS(glm_mm_fit(prob, cfg, Coefficients::zero(1, false)), ValidationError);

    // SCAD beyond a*lambda: pure gradient step
    std::mt19937_64 rng(8);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 15, 3);
    const Eigen::VectorXd y = oracle::gaussian_vector(rng, 15);
    PenaltySpec scad;
    scad.family = PenaltyFamily::Scad;
    scad.lambda = 0.1;
    Problem ps(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), scad);
    const Eigen::VectorXd alpha = vec({5, -5, 6});
    const double omega = 0.3;
    const Eigen::VectorXd expected = alpha + 0.5 * omega * ps.model().gradient(alpha);
    CHECK((glm_surrogate_minimizer(ps, omega, alpha) - expected).norm() < 1e-14);

    // epsilon > 0, zero gradient, tau = 0: pure shrinkage by 1/(1 + omega lambda eps)
    FidelityModel z(DesignMatrix(Eigen::MatrixXd::Identity(2, 2), false), Response::gaussian(vec({5, 6})));
    PenaltySpec sc2 = scad;
    sc2.epsilon = 0.5;
    Problem pz(z, sc2);
    CHECK((glm_surrogate_minimizer(pz, 0.4, vec({5, 6})) - vec({5, 6}) / (1.0 + 0.4 * 0.1 * 0.5)).norm() < 1e-14);
}

TEST_CASE("surrogate touches the objective and strictly majorizes") {
    std::mt19937_64 rng(9);
    for (Family fam : {Family::Gaussian, Family::Logistic}) {
        for (auto pf : kAll) {
            const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 20, 4);
            Eigen::VectorXd y = oracle::gaussian_vector(rng, 20);
            if (fam == Family::Logistic)
                for (Eigen::Index i = 0; i < 20; ++i) y[i] = y[i] > 0 ? 1 : 0;
            Response resp = fam == Family::Gaussian ? Response::gaussian(y) : Response::logistic(y);
            Problem prob(FidelityModel(DesignMatrix(x, true), resp), family(pf, 0.3, 4));
            const double omega = 0.95 * 2.0 / curvature_bound(prob.model());
            Eigen::VectorXd alpha = project_pinned(prob, oracle::gaussian_vector(rng, 5));
            CHECK(glm_surrogate(prob, omega, alpha, alpha) ==
                  doctest::Approx(total_objective(prob, alpha)).epsilon(1e-12));
            const Eigen::VectorXd star = glm_surrogate_minimizer(prob, omega, alpha);
            CHECK(total_objective(prob, star) <= glm_surrogate(prob, omega, alpha, star) + 1e-10);
            for (int k = 0; k < 10; ++k) {
                Eigen::VectorXd kappa = project_pinned(prob, oracle::gaussian_vector(rng, 5));
                kappa *= std::uniform_real_distribution<double>(0, 1)(rng) / std::max(kappa.norm(), 1e-300);
                const double gap =
                    glm_surrogate(prob, omega, alpha, star + kappa) - glm_surrogate(prob, omega, alpha, star);
                CHECK(gap >= kappa.squaredNorm() / omega - 1e-10);
            }
        }
    }
}

TEST_CASE("descent, stationarity and fixed points across penalties") {
    std::mt19937_64 rng(10);
    for (Family fam : {Family::Gaussian, Family::Logistic, Family::Cox}) {
        for (auto pf : kAll) {
            const int n = 40, p = 5;
            const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, n, p, 0.5);
            const Eigen::VectorXd beta = vec({1.5, -1, 0, 0, 0.5});
            const Eigen::VectorXd eta = x * beta;
            Response resp;
            std::uniform_real_distribution<double> u(0, 1);
            if (fam == Family::Gaussian) {
                resp = Response::gaussian(eta + oracle::gaussian_vector(rng, n, 0.5));
            } else if (fam == Family::Logistic) {
                Eigen::VectorXd y(n);
                for (int i = 0; i < n; ++i) y[i] = u(rng) < 1 / (1 + std::exp(-eta[i])) ? 1 : 0;
                resp = Response::logistic(y);
            } else {
                Eigen::VectorXd t(n);
                std::vector<int> s(n);
                for (int i = 0; i < n; ++i) {
                    t[i] = -std::log(u(rng)) / std::exp(eta[i]);
                    s[i] = u(rng) < 0.75;
                }
                s[0] = 1;
                resp = Response::cox(t, s);
            }
            const double lam = fam == Family::Gaussian ? 2.0 : 0.5;
            Problem prob(FidelityModel(DesignMatrix(x, fam != Family::Cox), resp), family(pf, lam, p));
            const auto zero = Coefficients::zero(p, fam != Family::Cox);
            for (auto fit : {&mm_outer, &glm_mm_fit}) {
                auto r = fit(prob, tight(), zero);
                CAPTURE(to_string(fam));
                CAPTURE(to_string(pf));
                CHECK(monotone(r.trace));
                CHECK(r.termination != Termination::MaxIter);
                CHECK(r.kkt_residual <= 1e-5);
                CHECK(r.objective == r.trace.back());
                if (prob.penalty().adaptive()) CHECK(r.coef.beta[p - 1] == 0.0);
                auto map = make_map(prob, tight(), fit == &mm_outer ? MapKind::Generic : MapKind::Glm);
                const Eigen::VectorXd again = map->apply(r.coef.packed());
                // an objective-tolerance stop leaves the iterate short of the coefficient tolerance
                const double bound = r.termination == Termination::CoefTol ? 10 * tight().coef_tol : 1e-6;
                CHECK((again - r.coef.packed()).norm() <= bound);
            }
        }
    }
}

TEST_CASE("stopping rule reports the criterion") {
    std::mt19937_64 rng(11);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 30, 5);
    const Eigen::VectorXd y = oracle::gaussian_vector(rng, 30);
    Problem prob(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), lasso(0.5));
    SolverConfig c;
    c.max_outer = 1;
    auto r = glm_mm_fit(prob, c, Coefficients::zero(5, false));
    CHECK(r.termination == Termination::MaxIter);
    CHECK(r.outer_iters == 1);
    CHECK(r.map_evals == 1);
    CHECK(r.trace.size() == 2);
    c = SolverConfig{};
    c.coef_tol = 1e-300;
    c.obj_tol = 1e-3;
    CHECK(glm_mm_fit(prob, c, Coefficients::zero(5, false)).termination == Termination::ObjTol);
    c.record_trace = false;
    CHECK(glm_mm_fit(prob, c, Coefficients::zero(5, false)).trace.empty());
    SolverConfig bad;
    bad.coef_tol = 0;
    CHECK_THROWS_AS(glm_mm_fit(prob, bad, Coefficients::zero(5, false)), ValidationError);
    CHECK_THROWS_AS(glm_mm_fit(prob, SolverConfig{}, Coefficients::zero(4, false)), DimensionError);
}

TEST_CASE("descent safeguard halves a too-long step") {
    // a Poisson model with a deliberately small region radius: the bound
    // underestimates curvature far from the origin
    std::mt19937_64 rng(12);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 30, 3);
    Eigen::VectorXd y(30);
    std::poisson_distribution<int> pd(6.0);
    for (int i = 0; i < 30; ++i) y[i] = pd(rng);
    Problem prob(FidelityModel(DesignMatrix(x, true), Response::poisson(y)), lasso(0.1));
    SolverConfig c = tight();
    c.coef_tol = 1e-9;
    c.poisson_radius = 0.3;
    auto r = glm_mm_fit(prob, c, Coefficients::zero(3, true));
    CHECK(r.step_halvings > 0);
    CHECK(monotone(r.trace));
    CHECK(r.kkt_residual <= 1e-5);
    SolverConfig nor;
    CHECK_THROWS_AS(glm_mm_fit(prob, nor, Coefficients::zero(3, true)), NotGloballyLipschitz);
}

TEST_CASE("poisson componentwise MM") {
    // coordinates are bisected to 1e-10, so successive iterates cannot agree to 1e-11
    auto tight = [] {
        SolverConfig c = ::tight();
        c.coef_tol = 1e-9;
        return c;
    };
    // e^b - b at the single observation: minimizer 0; adaptive weight 0 disables the penalty
    FidelityModel one(DesignMatrix(Eigen::MatrixXd::Ones(1, 1), false), Response::poisson(vec({1})));
    PenaltySpec free;
    free.family = PenaltyFamily::AdaptiveLasso;
    free.weights = {0.0};
    auto r = poisson_mm_fit(Problem(one, free), tight(), Coefficients{{}, vec({0.7})});
    CHECK(std::abs(r.coef.beta[0]) < 1e-9);

    std::mt19937_64 rng(13);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 25, 3, 0.5);
    FidelityModel zeros(DesignMatrix(x, false), Response::poisson(Eigen::VectorXd::Zero(25)));
    auto rz = poisson_mm_fit(Problem(zeros, lasso(100)), tight(), Coefficients{{}, vec({0.3, -0.2, 0.1})});
    CHECK(rz.coef.beta.isZero(0.0));
    CHECK(monotone(rz.trace));

    Eigen::VectorXd y(25);
    std::poisson_distribution<int> pd(3.0);
    for (int i = 0; i < 25; ++i) y[i] = pd(rng);
    FidelityModel m(DesignMatrix(x, true), Response::poisson(y));
    PenaltySpec none;
    none.family = PenaltyFamily::AdaptiveLasso;
    none.weights = {0.0, 0.0, 0.0};
    const Eigen::VectorXd mle = maximum_likelihood(m);
    auto rm = poisson_mm_fit(Problem(m, none), tight(), Coefficients::unpack(mle, true));
    CHECK((rm.coef.packed() - mle).norm() < 1e-8);
    CHECK(rm.outer_iters <= 2);

    for (auto pf : kAll) {
        Problem prob(m, family(pf, 1.0, 3));
        auto rf = poisson_mm_fit(prob, tight(), Coefficients::zero(3, true));
        CAPTURE(to_string(pf));
        CHECK(monotone(rf.trace));
        CHECK(rf.kkt_residual <= 1e-5);
    }
    Problem gauss(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), lasso(1));
    CHECK_THROWS_AS(poisson_mm_fit(gauss, tight(), Coefficients::zero(3, false)), ValidationError);
}

TEST_CASE("one-step estimator") {
    std::mt19937_64 rng(14);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 30, 4);
    const Eigen::VectorXd y = x * vec({3, 0, -3, 0}) + oracle::gaussian_vector(rng, 30);
    FidelityModel m(DesignMatrix(x, false), Response::gaussian(y));

    // lasso: the surrogate is the lasso itself, so one step is the lasso solution
    Problem pl(m, lasso(2.0));
    auto r1 = one_step_fit(pl, tight());
    const auto cd = oracle::cd_lasso(x, y, 2.0);
    CHECK((r1.coef.beta - cd.beta).norm() < 1e-8);
    CHECK(r1.outer_iters == 1);
    CHECK(r1.map_evals == 1);

    // SCAD with every |mle_j| > a*lambda: tau = 0 and one step returns the MLE
    const Eigen::MatrixXd xo = oracle::orthonormal_columns(rng, 30, 3);
    const Eigen::VectorXd yo = xo * vec({5, -5, 6}) + oracle::gaussian_vector(rng, 30, 0.1);
    FidelityModel mo(DesignMatrix(xo, false), Response::gaussian(yo));
    PenaltySpec scad;
    scad.family = PenaltyFamily::Scad;
    scad.lambda = 0.1;
    auto r2 = one_step_fit(Problem(mo, scad), tight());
    CHECK((r2.coef.beta - maximum_likelihood(mo)).norm() < 1e-9);

    FidelityModel wide(DesignMatrix(oracle::gaussian_matrix(rng, 3, 5), false),
                       Response::gaussian(oracle::gaussian_vector(rng, 3)));
    CHECK_THROWS_AS(one_step_fit(Problem(wide, lasso(1)), tight()), ValidationError);

    // poisson path of the one-step estimator
    Eigen::VectorXd yp(30);
    std::poisson_distribution<int> pd(2.0);
    for (int i = 0; i < 30; ++i) yp[i] = pd(rng);
    Problem pp(FidelityModel(DesignMatrix(oracle::gaussian_matrix(rng, 30, 3, 0.3), true), Response::poisson(yp)),
               lasso(0.5));
    auto r3 = one_step_fit(pp, tight());
    CHECK(r3.kkt_residual <= 1e-6);  // lasso: the one-step point is the lasso solution
}

TEST_CASE("kkt residual examples") {
    FidelityModel m(DesignMatrix(Eigen::MatrixXd::Identity(2, 2), false), Response::gaussian(vec({0.5, -1.5})));
    Problem p(m, lasso(1.0));
    CHECK(kkt_residual(p, Coefficients{{}, vec({0, 0})}) == doctest::Approx(0.5));
    Problem big(m, lasso(2.0));
    CHECK(kkt_residual(big, Coefficients{{}, vec({0, 0})}) == 0.0);
    CHECK(kkt_residual(p, Coefficients{{}, vec({0, -0.5})}) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("starts and pinned coordinates") {
    std::mt19937_64 rng(15);
    const Eigen::MatrixXd x = oracle::gaussian_matrix(rng, 30, 3);
    const Eigen::VectorXd y = oracle::gaussian_vector(rng, 30);
    PenaltySpec al;
    al.family = PenaltyFamily::AdaptiveLasso;
    al.weights = {1.0, kInf, 1.0};
    Problem p(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), al);
    CHECK(start_point(p, tight(), StartKind::Zero).beta.isZero(0.0));
    CHECK(start_point(p, tight(), StartKind::Mle).beta[1] == 0.0);
    CHECK(start_point(p, tight(), StartKind::OneStep).beta[1] == 0.0);
    auto r = glm_mm_fit(p, tight(), Coefficients{{}, vec({1, 1, 1})});
    CHECK(r.coef.beta[1] == 0.0);
    CHECK(start_kind_from_string("one-step") == StartKind::OneStep);
    CHECK_THROWS_AS(start_kind_from_string("random"), ValidationError);
    al.weights = {1.0};
    CHECK_THROWS_AS(Problem(FidelityModel(DesignMatrix(x, false), Response::gaussian(y)), al), DimensionError);
}
