#include <cstdint>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ersaa/linalg.hpp"

using ersaa::linalg::LinearProgram;
using ersaa::linalg::Matrix;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = entry(gen);
    return m;
}

/// Bounded standard-form LP: random rows through a positive point plus a
/// budget row, the same construction the solver tests use.
LinearProgram bounded_lp(std::size_t vars, std::size_t rows, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> entry(-1.0, 1.0);
    std::uniform_real_distribution<double> point(0.0, 2.0);
    LinearProgram lp;
    lp.eq_matrix = Matrix(rows + 1, vars + 1);
    lp.eq_rhs.assign(rows + 1, 0.0);
    std::vector<double> x0(vars);
    for (auto& v : x0) v = point(gen);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < vars; ++c) {
            lp.eq_matrix(r, c) = entry(gen);
            lp.eq_rhs[r] += lp.eq_matrix(r, c) * x0[c];
        }
    double budget = 1.0;
    for (double v : x0) budget += v;
    for (std::size_t c = 0; c <= vars; ++c) lp.eq_matrix(rows, c) = 1.0;
    lp.eq_rhs[rows] = budget;
    lp.objective.assign(vars + 1, 0.0);
    for (std::size_t c = 0; c < vars; ++c) lp.objective[c] = entry(gen);
    return lp;
}

} // namespace

static void BM_least_squares(benchmark::State& state) {
    const std::size_t rows = state.range(0);
    const Matrix design = random_matrix(rows, 6, 11);
    const Matrix targets = random_matrix(rows, 2, 12);
    for (auto _ : state) {
        Matrix coef = ersaa::linalg::least_squares(design, targets);
        benchmark::DoNotOptimize(coef);
    }
}
BENCHMARK(BM_least_squares)->Arg(256)->Arg(4096);

static void BM_solve_lp(benchmark::State& state) {
    const std::size_t vars = state.range(0);
    const LinearProgram lp = bounded_lp(vars, vars / 2, 21);
    for (auto _ : state) {
        auto sol = ersaa::linalg::solve_lp(lp);
        benchmark::DoNotOptimize(sol);
    }
}
BENCHMARK(BM_solve_lp)->Arg(20)->Arg(60)->Arg(120);

static void BM_spectral_norm(benchmark::State& state) {
    const std::size_t d = state.range(0);
    const Matrix a = random_matrix(d, d, 31);
    for (auto _ : state) {
        double norm = ersaa::linalg::spectral_norm(a);
        benchmark::DoNotOptimize(norm);
    }
}
BENCHMARK(BM_spectral_norm)->Arg(4)->Arg(32);
