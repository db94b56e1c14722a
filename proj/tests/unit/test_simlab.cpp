#include <doctest.h>

#include <cmath>

#include "mist/errors.hpp"
#include "mist/simlab.hpp"

using namespace mist;

TEST_CASE("ar1 covariance") {
    CHECK(covariance_ar1(4, 0.0).isIdentity());
    const Eigen::MatrixXd s = covariance_ar1(2, 0.5);
    CHECK(s(0, 1) == 0.5);
    CHECK(s(1, 0) == 0.5);
    CHECK(covariance_ar1(3, 0.5)(0, 2) == doctest::Approx(0.25));
    CHECK_THROWS_AS(covariance_ar1(3, 1.0), ValidationError);
}

TEST_CASE("equicorrelated covariance") {
    CHECK(covariance_equicorr(3, 0.0).isApprox(Eigen::MatrixXd::Identity(3, 3) / 9.0));
    const Eigen::MatrixXd s = covariance_equicorr(2, 0.75);
    CHECK(s(0, 0) == doctest::Approx(1.0 / 9.0));
    CHECK(s(0, 1) == doctest::Approx(0.75 / 9.0));
    const Eigen::MatrixXd t = covariance_equicorr(3, 0.5, 1.0);
    CHECK(t(0, 2) == 0.5);
    CHECK(t(1, 2) == 0.5);
    CHECK_THROWS_AS(covariance_equicorr(3, 0.5, 0.0), ValidationError);
}

TEST_CASE("true coefficients") {
    auto ex35 = SimScenario::linear_ex1(35, 0, 1, 1);
    CHECK(ex35.resolved_q() == 9);
    const Eigen::VectorXd b = true_coefficients(ex35);
    CHECK((b.head(9).array() == 3.0).all());
    CHECK(b.tail(26).isZero(0.0));
    CHECK(SimScenario::linear_ex1(81, 0, 1, 1).resolved_q() == 27);

    auto ex2 = SimScenario::logistic_ex2(25, 0.0, 1);
    const Eigen::VectorXd b2 = true_coefficients(ex2);
    CHECK(b2[0] == -3.0);
    CHECK(b2[1] == doctest::Approx(3.0 * std::exp(-0.01)));
    CHECK(b2[1] == doctest::Approx(2.97015).epsilon(1e-6));
    CHECK((b2.array() != 0.0).count() == 25);
    CHECK((true_coefficients(SimScenario::logistic_ex2(75, 0.0, 1)).array() != 0.0).count() == 75);
}

TEST_CASE("counter rng") {
    CounterRng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    CHECK(a.counter() == 100);
    // splitmix64 reference output for seed 0
    CounterRng z(0);
    CHECK(z.next() == 0xE220A8397B1DCDAFULL);
    CounterRng u(9);
    double mean = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double v = u.uniform();
        CHECK((v > 0.0 && v < 1.0));
        mean += v;
    }
    CHECK(mean / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("datasets are deterministic") {
    for (auto sc : {SimScenario::linear_ex1(35, 0.5, 1, 3), SimScenario::logistic_ex2(25, 0.5, 3),
                    SimScenario::cox_synthetic(5, 60, 0.3, 3)}) {
        const auto a = gen_dataset(sc);
        const auto b = gen_dataset(sc);
        CHECK(a.x == b.x);
        CHECK(a.response.y == b.response.y);
        CHECK(a.response.time == b.response.time);
        CHECK(a.response.status == b.response.status);
        const auto c = gen_dataset(sc.replicate(1));
        CHECK(a.x != c.x);
        CHECK(sc.replicate(5).seed == (3u ^ 5u));
    }
}

TEST_CASE("ar1 sample covariance matches") {
    SimScenario sc = SimScenario::linear_ex1(5, 0.5, 2.0, 11);
    sc.n = 100000;
    const auto ds = gen_dataset(sc);
    const Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
    const Eigen::MatrixXd emp = xc.transpose() * xc / static_cast<double>(sc.n - 1);
    CHECK((emp - covariance_ar1(5, 0.5)).cwiseAbs().maxCoeff() <= 0.02);
    // q = 3 * floor(5 / 9) = 0, so y is pure noise with variance sigma^2
    CHECK(ds.beta_true.isZero(0.0));
    const double var = (ds.response.y.array() - ds.response.y.mean()).square().sum() / (sc.n - 1);
    CHECK(var == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("equicorrelated design and logistic response") {
    SimScenario sc = SimScenario::logistic_ex2(25, 0.75, 5);
    sc.n = 50000;
    sc.p = 4;
    sc.q = 2;
    const auto ds = gen_dataset(sc);
    const Eigen::MatrixXd xc = ds.x.rowwise() - ds.x.colwise().mean();
    const Eigen::MatrixXd emp = xc.transpose() * xc / static_cast<double>(sc.n - 1);
    CHECK((emp - covariance_equicorr(4, 0.75)).cwiseAbs().maxCoeff() <= 0.005);
    CHECK(ds.scenario.has_intercept());
    CHECK(ds.model().has_intercept());
    CHECK((ds.response.y.array() == 0.0 || ds.response.y.array() == 1.0).all());
}

TEST_CASE("cox synthetic censoring") {
    const auto ds = gen_dataset(SimScenario::cox_synthetic(5, 500, 0.3, 8));
    const double censored = std::count(ds.response.status.begin(), ds.response.status.end(), 0) / 500.0;
    CHECK(censored == doctest::Approx(0.4).epsilon(0.01));
    CHECK((ds.response.time.array() > 0).all());
    CHECK(ds.model().event_count() == 300);
}

TEST_CASE("scenario validation") {
    SimScenario sc = SimScenario::linear_ex1(10, 0.5, 1, 1);
    sc.q = 11;
    CHECK_THROWS_AS(gen_dataset(sc), ValidationError);
    sc = SimScenario::linear_ex1(10, 1.0, 1, 1);
    CHECK_THROWS_AS(gen_dataset(sc), ValidationError);
    sc = SimScenario::linear_ex1(10, 0.0, 0.0, 1);
    CHECK_THROWS_AS(gen_dataset(sc), ValidationError);
    CHECK(sim_family_from_string("cox") == SimFamily::CoxSynthetic);
    CHECK_THROWS_AS(sim_family_from_string("probit"), ValidationError);
}

TEST_CASE("compare_solutions") {
    auto ds = gen_dataset(SimScenario::linear_ex1(9, 0.0, 1, 2));
    PenaltySpec pen;
    pen.lambda = 1.0;
    Problem prob(ds.model(), pen);
    FitResult a, b;
    a.coef = Coefficients::zero(9, false);
    b.coef = Coefficients::zero(9, false);
    auto same = compare_solutions(a, a, prob);
    CHECK(same.norm_diff == 0.0);
    CHECK(same.a_leq_b);
    b.coef.beta[0] = 3;
    b.coef.beta[1] = 4;
    auto rec = compare_solutions(a, b, prob);
    CHECK(rec.norm_diff == 5.0);
    CHECK(rec.obj_a == doctest::Approx(total_objective(prob, a.coef)));
    b.coef.beta.resize(3);
    CHECK_THROWS_AS(compare_solutions(a, b, prob), DimensionError);

    // strictly convex problem: different starts give the same minimizer
    SolverConfig cfg;
    cfg.coef_tol = 1e-10;
    cfg.obj_tol = 1e-300;
    auto f0 = glm_mm_fit(prob, cfg, Coefficients::zero(9, false));
    auto f1 = glm_mm_fit(prob, cfg, start_point(prob, cfg, StartKind::Mle));
    CHECK(compare_solutions(f0, f1, prob).norm_diff <= 1e-5);
}
