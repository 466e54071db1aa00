#include <cstdint>

#include <benchmark/benchmark.h>

#include "ersaa/datagen.hpp"
#include "ersaa/dro.hpp"
#include "ersaa/harness.hpp"
#include "ersaa/regression.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/rng.hpp"
#include "ersaa/stochprog.hpp"

using namespace ersaa;
using linalg::Matrix;

namespace {

datagen::TruthSpec plane_truth() {
    Matrix coef(1, 2);
    coef(0, 0) = 1.0;
    coef(0, 1) = -0.5;
    datagen::VarianceModel variance;
    variance.kind = datagen::VarianceKind::log_linear;
    variance.sigma = {-1.0};
    variance.theta = Matrix(1, 2);
    variance.theta(0, 0) = 0.8;
    variance.theta(0, 1) = 0.6;
    datagen::CovariateModel covariates;
    covariates.lower = {0.0, 0.0};
    covariates.upper = {1.0, 1.0};
    return datagen::TruthSpec({{1.0}, coef}, variance, {}, covariates);
}

const stochprog::NewsvendorProblem kNewsvendor{{1.0}, {1.0}, {-10.0}, {10.0}};
const residuals::SupportBox kSupport{{-50.0}, {50.0}};
const std::vector<double> kQuery{0.5, 0.5};

} // namespace

static void BM_sample(benchmark::State& state) {
    const auto truth = plane_truth();
    const std::size_t n = state.range(0);
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto data = datagen::sample(truth, n, seed++);
        benchmark::DoNotOptimize(data.y);
    }
}
BENCHMARK(BM_sample)->Arg(100)->Arg(1600)->Arg(12800);

static void BM_fit_parametric(benchmark::State& state) {
    const auto truth = plane_truth();
    const auto data = datagen::sample(truth, state.range(0), 7);
    for (auto _ : state) {
        auto models = regression::fit_models(data, regression::MeanKind::ols,
                                             regression::CovKind::parametric_log_linear);
        benchmark::DoNotOptimize(models);
    }
}
BENCHMARK(BM_fit_parametric)->Arg(100)->Arg(1600)->Arg(12800);

static void BM_fit_knn(benchmark::State& state) {
    const auto truth = plane_truth();
    const auto data = datagen::sample(truth, state.range(0), 7);
    for (auto _ : state) {
        auto models = regression::fit_models(data, regression::MeanKind::knn,
                                             regression::CovKind::knn_diag);
        benchmark::DoNotOptimize(models);
    }
}
BENCHMARK(BM_fit_knn)->Arg(100)->Arg(400)->Arg(1600);

static void BM_scenario_solve(benchmark::State& state) {
    const auto truth = plane_truth();
    const auto data = datagen::sample(truth, state.range(0), 7);
    const auto models = regression::fit_models(data, regression::MeanKind::ols,
                                               regression::CovKind::parametric_log_linear);
    const stochprog::Problem problem(kNewsvendor);
    for (auto _ : state) {
        const Matrix eps = residuals::standardized_residuals(data, models);
        const auto scenarios = residuals::build_er_scenarios(models, eps, kQuery, kSupport);
        auto sol = stochprog::solve_saa(problem, scenarios);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_scenario_solve)->Arg(100)->Arg(1600)->Arg(12800);

static void BM_extensive_form(benchmark::State& state) {
    // |y - z| on [0, 1] written with recourse u - v = z - y
    Matrix w(1, 2), tech(1, 1), h(1, 1);
    w(0, 0) = 1.0;
    w(0, 1) = -1.0;
    tech(0, 0) = -1.0;
    h(0, 0) = -1.0;
    Matrix ineq(1, 1);
    ineq(0, 0) = 1.0;
    const auto lp = stochprog::make_two_stage_lp({0.0}, std::move(ineq), {1.0}, {1.0, 1.0},
                                                 std::move(w), std::move(tech), std::move(h),
                                                 {0.0});
    const std::size_t n = state.range(0);
    rng::Stream gen(17);
    residuals::ScenarioSet scen;
    scen.points = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) scen.points(i, 0) = gen.uniform(0.0, 1.0);
    scen.weights.assign(n, 1.0 / static_cast<double>(n));
    const stochprog::Problem problem(lp);
    for (auto _ : state) {
        auto sol = stochprog::solve_saa(problem, scen);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_extensive_form)->Arg(25)->Arg(100)->Arg(400);

static void BM_worst_case(benchmark::State& state) {
    const std::size_t n = state.range(0);
    rng::Stream gen(19);
    std::vector<double> costs(n);
    for (auto& c : costs) c = gen.uniform(-1.0, 5.0);
    for (auto _ : state) {
        auto wc = dro::worst_case_expectation(costs, 0.5);
        benchmark::DoNotOptimize(wc);
    }
}
BENCHMARK(BM_worst_case)->Arg(100)->Arg(1600)->Arg(12800);

static void BM_replication(benchmark::State& state) {
    harness::ExperimentConfig config(plane_truth(), stochprog::Problem(kNewsvendor),
                                     residuals::SupportBox(kSupport));
    config.query_x = kQuery;
    config.n_grid = {static_cast<std::size_t>(state.range(0))};
    config.replications = 1;
    config.m_oracle = 20000;
    const harness::Oracle oracle = harness::compute_oracle(config);
    std::size_t rep = 0;
    for (auto _ : state) {
        auto row = harness::run_replication(config, config.n_grid[0], rep++, oracle);
        benchmark::DoNotOptimize(row);
    }
}
BENCHMARK(BM_replication)->Arg(100)->Arg(1600);

BENCHMARK_MAIN();
