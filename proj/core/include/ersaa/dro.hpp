#pragma once

#include <span>
#include <vector>

#include "ersaa/residuals.hpp"
#include "ersaa/stochprog.hpp"

namespace ersaa::dro {

using residuals::ScenarioSet;

/// Ball of scenario reweightings around the uniform empirical weights:
/// { q in the n-simplex : (1/n) sum_i (n q_i - 1)^2 <= radius }.
struct AmbiguitySet {
    ScenarioSet center;
    double radius = 0.0;
};

/// Validates uniform center weights and a nonnegative radius.
AmbiguitySet make_ambiguity_set(ScenarioSet center, double radius);

struct WorstCase {
    double value = 0.0;
    std::vector<double> weights;
};

/**
 * max_q sum_i q_i costs_i over the ambiguity ball above.
 *
 * When the unconstrained-sign solution q_i = 1/n + sqrt(r)(c_i - mean)/(n sd)
 * stays nonnegative the maximum is mean + sqrt(r) sd in closed form.
 * Otherwise the divergence multiplier is found by bisection, with exact
 * water-filling of the nonnegativity constraints at each trial multiplier.
 * A radius of at least n - 1 admits a point mass on the largest cost.
 */
WorstCase worst_case_expectation(std::span<const double> costs, double radius);

WorstCase worst_case_expectation(const AmbiguitySet& set, std::span<const double> costs);

struct DroSolution {
    std::vector<double> z;
    double value = 0.0;                // worst-case expected cost at z
    std::vector<double> worst_weights; // maximizing reweighting at z
};

/**
 * min_z max_q reweighted newsvendor cost, z in the decision box.
 *
 * The objective is convex in each coordinate; one-dimensional problems use
 * golden-section search, higher dimensions cyclic coordinate descent with a
 * fixed sweep budget. Deterministic for fixed inputs.
 */
DroSolution solve_dro_newsvendor(const stochprog::NewsvendorProblem& p,
                                 const AmbiguitySet& set);

} // namespace ersaa::dro
