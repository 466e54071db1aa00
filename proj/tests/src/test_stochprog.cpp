#include <cmath>
#include <random>

#include <doctest.h>

#include "ersaa/datagen.hpp"
#include "ersaa/errors.hpp"
#include "ersaa/stochprog.hpp"
#include "reference_oracles.hpp"

using namespace ersaa;
using linalg::Matrix;
using residuals::ScenarioSet;
using stochprog::NewsvendorProblem;
using stochprog::Problem;

namespace {

ScenarioSet uniform_scenarios(std::initializer_list<double> values) {
    ScenarioSet s;
    s.points = Matrix(values.size(), 1);
    std::size_t i = 0;
    for (double v : values) s.points(i++, 0) = v;
    s.weights.assign(values.size(), 1.0 / double(values.size()));
    return s;
}

NewsvendorProblem newsvendor1(double h, double b, double lo = -100.0, double hi = 100.0) {
    return NewsvendorProblem{{h}, {b}, {lo}, {hi}};
}

} // namespace

TEST_CASE("newsvendor cost and Lipschitz constant") {
    const auto p = newsvendor1(2.0, 3.0);
    CHECK(p.cost(std::vector<double>{1.0}, std::vector<double>{2.0}) == 3.0);
    CHECK(p.cost(std::vector<double>{2.0}, std::vector<double>{1.0}) == 2.0);
    CHECK(p.lipschitz() == 3.0);

    const NewsvendorProblem multi{{1.0, 5.0}, {3.0, 2.0}, {0.0, 0.0}, {1.0, 1.0}};
    CHECK(multi.lipschitz() == doctest::Approx(std::sqrt(34.0)).epsilon(1e-15));

    CHECK_THROWS_AS(stochprog::validate(NewsvendorProblem{{0.0}, {1.0}, {0.0}, {1.0}}),
                    InvalidSpecError);
    CHECK_THROWS_AS(stochprog::validate(NewsvendorProblem{{1.0}, {1.0}, {2.0}, {1.0}}),
                    InvalidSpecError);
}

TEST_CASE("newsvendor scenario solve takes the critical quantile") {
    SUBCASE("symmetric costs pick the median") {
        const auto sol = stochprog::solve_saa(Problem(newsvendor1(1.0, 1.0)),
                                              uniform_scenarios({1.0, 2.0, 3.0, 4.0}));
        CHECK(sol.z[0] == 2.0);
        CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("decision box clamps the quantile") {
        const auto sol = stochprog::solve_saa(Problem(newsvendor1(1.0, 1.0, 0.0, 1.5)),
                                              uniform_scenarios({1.0, 2.0, 3.0, 4.0}));
        CHECK(sol.z[0] == 1.5);
        CHECK(sol.value == doctest::Approx(1.25).epsilon(1e-15));
    }
    SUBCASE("uneven weights shift the quantile") {
        ScenarioSet s;
        s.points = Matrix(2, 1);
        s.points(1, 0) = 10.0;
        s.weights = {0.8, 0.2};
        const auto backorder_heavy = stochprog::solve_saa(Problem(newsvendor1(1.0, 4.0)), s);
        CHECK(backorder_heavy.z[0] == 0.0); // cumulative 0.8 >= tau = 0.8
        CHECK(backorder_heavy.value == doctest::Approx(8.0).epsilon(1e-15));

        const auto holding_heavy = stochprog::solve_saa(Problem(newsvendor1(4.0, 1.0)), s);
        CHECK(holding_heavy.z[0] == 0.0); // tau = 0.2
        CHECK(holding_heavy.value == doctest::Approx(2.0).epsilon(1e-15));
    }
}

TEST_CASE("two-stage construction certifies complete recourse") {
    // u - v = rhs is complete; w = rhs with w >= 0 is not
    Matrix w_complete = Matrix::from_rows({{1.0, -1.0}});
    Matrix w_incomplete = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});

    CHECK_NOTHROW(stochprog::make_two_stage_lp(
        {0.0}, Matrix::from_rows({{1.0}}), {1.0}, {1.0, 1.0}, w_complete,
        Matrix::from_rows({{-1.0}}), Matrix::from_rows({{-1.0}}), {0.0}));

    CHECK_THROWS_AS(stochprog::make_two_stage_lp(
                        {0.0, 0.0}, Matrix::from_rows({{1.0, 1.0}}), {1.0}, {1.0, 1.0},
                        w_incomplete, Matrix(2, 2), Matrix::from_rows({{1.0}, {1.0}}), {0.0, 0.0}),
                    InvalidSpecError);
}

TEST_CASE("two-stage absolute-deviation program") {
    // cost(z, y) = |y - z| for z in [0, 1]
    const auto lp = stochprog::make_two_stage_lp(
        {0.0}, Matrix::from_rows({{1.0}}), {1.0}, {1.0, 1.0}, Matrix::from_rows({{1.0, -1.0}}),
        Matrix::from_rows({{-1.0}}), Matrix::from_rows({{-1.0}}), {0.0});

    CHECK(lp.lipschitz() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(stochprog::scenario_cost(Problem(lp), std::vector<double>{0.3},
                                   std::vector<double>{0.9}) ==
          doctest::Approx(0.6).epsilon(1e-12));

    const auto sol = stochprog::solve_saa(Problem(lp), uniform_scenarios({0.0, 1.0}));
    CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(sol.z[0] >= -1e-9);
    CHECK(sol.z[0] <= 1.0 + 1e-9);

    // scenario count above the extensive-form cap is rejected
    ScenarioSet big;
    big.points = Matrix(501, 1);
    big.weights.assign(501, 1.0 / 501.0);
    CHECK_THROWS_AS(stochprog::solve_saa(Problem(lp), big), InvalidSpecError);
}

TEST_CASE("newsvendor closed form agrees with its extensive-form encoding") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> cost(0.2, 3.0);
    std::uniform_real_distribution<double> point(0.0, 5.0);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t d = 1 + gen() % 2;
        NewsvendorProblem p;
        p.holding.resize(d);
        p.backorder.resize(d);
        p.z_lo.assign(d, 0.0);
        p.z_hi.assign(d, 6.0);
        for (auto& v : p.holding) v = cost(gen);
        for (auto& v : p.backorder) v = cost(gen);

        const std::size_t n = 5 + gen() % 20;
        ScenarioSet s;
        s.points = Matrix(n, d);
        for (auto& v : s.points.data()) v = point(gen);
        s.weights.assign(n, 1.0 / double(n));

        const auto direct = stochprog::solve_saa(Problem(p), s);
        const auto via_lp = stochprog::solve_saa(Problem(refsolve::newsvendor_as_lp(p)), s);
        CHECK(std::fabs(direct.value - via_lp.value) <= 1e-7 * (1.0 + std::fabs(direct.value)));
    }
}

TEST_CASE("oracle value of the absolute-loss newsvendor") {
    Matrix coef(1, 1);
    datagen::VarianceModel v;
    v.kind = datagen::VarianceKind::constant;
    v.values = {1.0};
    datagen::CovariateModel c;
    c.lower = {0.0};
    c.upper = {1.0};
    const datagen::TruthSpec spec({{0.0}, coef}, v, {}, c);

    const auto oracle = stochprog::true_value(Problem(newsvendor1(1.0, 1.0)), spec,
                                              std::vector<double>{0.5}, 100000, 17);
    CHECK(oracle.value == doctest::Approx(std::sqrt(2.0 / 3.141592653589793)).epsilon(0.02));
    CHECK(std::fabs(oracle.z[0]) < 0.02);
    CHECK(oracle.std_error > 0.0);
    CHECK(oracle.std_error < 0.01);

    CHECK_THROWS_AS(
        stochprog::true_value(Problem(newsvendor1(1.0, 1.0)), spec, std::vector<double>{0.5}, 1, 3),
        InsufficientDataError);
}

TEST_CASE("analytic newsvendor optimum uses the error quantile") {
    Matrix coef(1, 1);
    datagen::VarianceModel v;
    v.kind = datagen::VarianceKind::constant;
    v.values = {2.0};
    datagen::CovariateModel c;
    c.lower = {0.0};
    c.upper = {1.0};
    const datagen::TruthSpec spec({{1.0}, coef}, v, {}, c);

    const auto z = stochprog::newsvendor_true_optimum(newsvendor1(1.0, 3.0), spec,
                                                      std::vector<double>{0.5});
    CHECK(z[0] == doctest::Approx(1.0 + 2.0 * 0.6744897501960817).epsilon(1e-8));

    // clamped against a tight decision box
    const auto clamped = stochprog::newsvendor_true_optimum(newsvendor1(1.0, 3.0, 0.0, 2.0), spec,
                                                            std::vector<double>{0.5});
    CHECK(clamped[0] == 2.0);
}
