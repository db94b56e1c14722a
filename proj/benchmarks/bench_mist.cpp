#include <benchmark/benchmark.h>

#include "mist/accel.hpp"
#include "mist/simlab.hpp"
#include "mist/solver.hpp"

namespace {

using namespace mist;

void BM_SoftThreshold(benchmark::State& state) {
    const auto n = static_cast<Eigen::Index>(state.range(0));
    CounterRng rng(5);
    Eigen::VectorXd u(n), v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        u[i] = rng.normal();
        v[i] = 0.5 * rng.uniform();
    }
    for (auto _ : state) benchmark::DoNotOptimize(soft_threshold_vec(u, v));
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SoftThreshold)->RangeMultiplier(8)->Range(64, 32768);

// args: scenario (0 = linear-ex1 p=35, 1 = logistic-ex2 q=25), accel (0 plain, 1 squarem)
void BM_LassoFit(benchmark::State& state) {
    const SimScenario sc = state.range(0) == 0 ? SimScenario::linear_ex1(35, 0.5, 1.0, 62)
                                               : SimScenario::logistic_ex2(25, 0.5, 62);
    const auto ds = gen_dataset(sc);
    PenaltySpec pen;
    pen.lambda = 1.0;
    Problem prob(ds.model(), pen);
    SolverConfig cfg;
    cfg.coef_tol = 1e-9;
    cfg.obj_tol = 1e-300;
    cfg.record_trace = false;
    const AccelMode mode = state.range(1) == 0 ? AccelMode::Plain : AccelMode::Squarem;
    const Coefficients zero = Coefficients::zero(prob.model().p(), prob.model().has_intercept());
    std::size_t evals = 0;
    for (auto _ : state) {
        const FitResult r = accelerated_fit(prob, cfg, zero, mode);
        evals = r.map_evals;
        benchmark::DoNotOptimize(r.objective);
    }
    state.counters["map_evals"] = static_cast<double>(evals);
    state.SetLabel(sc.label() + (mode == AccelMode::Plain ? " plain" : " squarem"));
}
BENCHMARK(BM_LassoFit)->ArgsProduct({{0, 1}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
    const SimFamily fam = static_cast<SimFamily>(state.range(0));
    SimScenario sc = fam == SimFamily::LinearEx1      ? SimScenario::linear_ex1(100, 0.5, 1.0, 3)
                     : fam == SimFamily::LogisticEx2 ? SimScenario::logistic_ex2(25, 0.5, 3)
                                                     : SimScenario::cox_synthetic(100, 1000, 0.5, 3);
    sc.n = 1000;
    const auto ds = gen_dataset(sc);
    const FidelityModel m = ds.model();
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(m.dim(), 0.01);
    for (auto _ : state) benchmark::DoNotOptimize(m.gradient(theta));
    state.SetLabel(std::string(to_string(fam)));
}
BENCHMARK(BM_Gradient)->DenseRange(0, 2)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
