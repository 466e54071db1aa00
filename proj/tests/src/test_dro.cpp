#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "ersaa/dro.hpp"
#include "ersaa/errors.hpp"
#include "ersaa/stochprog.hpp"
#include "reference_oracles.hpp"

using namespace ersaa;
using linalg::Matrix;
using residuals::ScenarioSet;

namespace {

ScenarioSet uniform_scenarios(std::initializer_list<double> values) {
    ScenarioSet s;
    s.points = Matrix(values.size(), 1);
    std::size_t i = 0;
    for (double v : values) s.points(i++, 0) = v;
    s.weights.assign(values.size(), 1.0 / double(values.size()));
    return s;
}

double divergence(std::span<const double> q) {
    double acc = 0.0;
    for (double qi : q) {
        const double t = double(q.size()) * qi - 1.0;
        acc += t * t;
    }
    return acc / double(q.size());
}

} // namespace

TEST_CASE("zero radius reproduces the plain average") {
    const std::vector<double> costs{1.0, 5.0, 3.0};
    const auto wc = dro::worst_case_expectation(costs, 0.0);
    CHECK(wc.value == doctest::Approx(3.0).epsilon(1e-15));
    for (double qi : wc.weights) CHECK(qi == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("interior radius has the mean-plus-deviation closed form") {
    const std::vector<double> costs{0.5, 1.0};
    const auto wc = dro::worst_case_expectation(costs, 0.25);
    CHECK(wc.value == doctest::Approx(0.875).epsilon(1e-12));
    CHECK(wc.weights[0] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(wc.weights[1] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(divergence(wc.weights) <= 0.25 + 1e-10);
}

TEST_CASE("large radius concentrates on the worst cost") {
    const std::vector<double> costs{3.0, 1.0, 2.0};
    const auto wc = dro::worst_case_expectation(costs, 2.0);
    CHECK(wc.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(wc.weights[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(wc.weights[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("constant costs are radius-invariant") {
    const std::vector<double> costs{2.0, 2.0, 2.0, 2.0};
    for (const double rho : {0.0, 0.3, 7.0})
        CHECK(dro::worst_case_expectation(costs, rho).value ==
              doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("active nonnegativity constraints match grid search") {
    // the unconstrained reweighting would drive the cheapest scenario
    // negative, so the solution lies on the simplex boundary
    const std::vector<double> costs{0.0, 4.9, 5.0};
    const double rho = 1.0;
    const auto wc = dro::worst_case_expectation(costs, rho);

    CHECK(wc.weights[0] == doctest::Approx(0.0).epsilon(1e-8));
    double total = 0.0;
    for (double qi : wc.weights) {
        CHECK(qi >= -1e-12);
        total += qi;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(divergence(wc.weights) <= rho + 1e-8);

    const double ref = refsolve::grid_worst_case(costs, rho, 1e-3);
    CHECK(std::fabs(wc.value - ref) <= 2e-3);
}

TEST_CASE("worst case agrees with grid search on random small instances") {
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> cost(-2.0, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 2 + gen() % 2;
        std::vector<double> costs(n);
        for (auto& v : costs) v = cost(gen);
        for (const double rho : {0.05, 0.3, 1.0, 3.0}) {
            const auto wc = dro::worst_case_expectation(costs, rho);
            const double ref = refsolve::grid_worst_case(costs, rho, 1e-3);
            CHECK(std::fabs(wc.value - ref) <= 2e-3);
        }
    }
}

TEST_CASE("worst case is nondecreasing in the radius and bounded by extremes") {
    std::mt19937_64 gen(99);
    std::uniform_real_distribution<double> cost(-5.0, 5.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 2 + gen() % 7;
        std::vector<double> costs(n);
        double mean = 0.0, worst = -1e300;
        for (auto& v : costs) {
            v = cost(gen);
            mean += v / double(n);
            worst = std::max(worst, v);
        }
        double previous = -1e300;
        for (const double rho : {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
            const auto wc = dro::worst_case_expectation(costs, rho);
            CHECK(wc.value >= previous - 1e-10);
            CHECK(wc.value >= mean - 1e-10);
            CHECK(wc.value <= worst + 1e-10);
            CHECK(divergence(wc.weights) <= rho + 1e-8);
            previous = wc.value;
        }
    }
}

TEST_CASE("ambiguity set validation") {
    auto s = uniform_scenarios({1.0, 2.0});
    CHECK_NOTHROW(dro::make_ambiguity_set(s, 0.5));
    CHECK_THROWS_AS(dro::make_ambiguity_set(s, -0.1), InvalidSpecError);
    s.weights = {0.7, 0.3};
    CHECK_THROWS_AS(dro::make_ambiguity_set(s, 0.5), InvalidSpecError);
}

TEST_CASE("robust newsvendor on two scenarios") {
    const stochprog::NewsvendorProblem p{{1.0}, {1.0}, {-5.0}, {5.0}};

    SUBCASE("point-mass radius plays the worst scenario") {
        const auto set = dro::make_ambiguity_set(uniform_scenarios({0.0, 1.0}), 1.0);
        const auto sol = dro::solve_dro_newsvendor(p, set);
        CHECK(sol.z[0] == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(sol.value == doctest::Approx(0.5).epsilon(1e-6));
    }

    SUBCASE("zero radius reduces to the scenario average") {
        const auto set = dro::make_ambiguity_set(uniform_scenarios({1.0, 2.0, 3.0, 4.0}), 0.0);
        const auto sol = dro::solve_dro_newsvendor(p, set);
        CHECK(sol.value == doctest::Approx(1.0).epsilon(1e-6));
        double total = 0.0;
        for (double qi : sol.worst_weights) total += qi;
        CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("value grows with the radius") {
        double previous = -1.0;
        for (const double rho : {0.0, 0.2, 0.8}) {
            const auto set = dro::make_ambiguity_set(uniform_scenarios({0.0, 2.0, 5.0}), rho);
            const auto sol = dro::solve_dro_newsvendor(p, set);
            CHECK(sol.value >= previous - 1e-8);
            previous = sol.value;
        }
    }
}
