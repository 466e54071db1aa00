#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/linalg.hpp"
#include "ersaa/residuals.hpp"

namespace ersaa::stochprog {

using linalg::Matrix;
using residuals::ScenarioSet;

/// Componentwise newsvendor with decision box [z_lo, z_hi]:
/// cost(z, y) = sum_j h_j max(z_j - y_j, 0) + b_j max(y_j - z_j, 0).
struct NewsvendorProblem {
    std::vector<double> holding;   // h_j > 0
    std::vector<double> backorder; // b_j > 0
    std::vector<double> z_lo;
    std::vector<double> z_hi;

    std::size_t dim() const { return holding.size(); }
    double cost(std::span<const double> z, std::span<const double> y) const;

    /// Euclidean Lipschitz constant of y -> cost(z, y), uniform in z.
    double lipschitz() const;
};

void validate(const NewsvendorProblem& p);

/// min c1 . z + E[ min { d . w : W w = H y + h0 - T z, w >= 0 } ]
/// over z >= 0 with A z <= b. Requires complete recourse, certified at
/// construction by make_two_stage_lp.
struct TwoStageLP {
    std::vector<double> first_cost;    // c1, length d_z
    Matrix ineq_matrix;                // A, m_A x d_z
    std::vector<double> ineq_rhs;      // b, length m_A
    std::vector<double> recourse_cost; // d, length n_w
    Matrix recourse_matrix;            // W, m_w x n_w
    Matrix technology_matrix;          // T, m_w x d_z
    Matrix rhs_matrix;                 // H, m_w x d_y
    std::vector<double> rhs_shift;     // h0, length m_w

    std::size_t dim() const { return first_cost.size(); }
    std::size_t outcome_dim() const { return rhs_matrix.cols(); }

    /// Euclidean Lipschitz bound of y -> cost(z, y): the spectral norm of H
    /// times the largest dual-vertex norm of the recourse program.
    double lipschitz() const;
};

/// Validates shapes and certifies complete recourse by solving the second
/// stage for a sample of random right-hand sides. Throws InvalidSpecError.
TwoStageLP make_two_stage_lp(std::vector<double> first_cost, Matrix ineq_matrix,
                             std::vector<double> ineq_rhs, std::vector<double> recourse_cost,
                             Matrix recourse_matrix, Matrix technology_matrix,
                             Matrix rhs_matrix, std::vector<double> rhs_shift,
                             int certificate_samples = 64,
                             std::uint64_t certificate_seed = 0x5ecce55ULL);

using Problem = std::variant<NewsvendorProblem, TwoStageLP>;

std::size_t decision_dim(const Problem& p);
std::size_t outcome_dim(const Problem& p);
double lipschitz(const Problem& p);

/// Cost of decision z under a single outcome y. For the two-stage program
/// this solves the recourse linear program.
double scenario_cost(const Problem& p, std::span<const double> z, std::span<const double> y);

/// Weighted average of scenario_cost over the set.
double evaluate_cost(const Problem& p, std::span<const double> z, const ScenarioSet& scenarios);

struct SaaSolution {
    std::vector<double> z;
    double value = 0.0;
};

/**
 * Minimizes the scenario-average cost.
 *
 * The newsvendor solution is the componentwise smallest weighted
 * b/(h+b)-quantile of the scenario values, clamped to the decision box.
 * The two-stage program is solved as one extensive-form linear program
 * (at most 500 scenarios); infeasibility and unboundedness surface as
 * SaaInfeasibleError and SaaUnboundedError.
 */
SaaSolution solve_saa(const Problem& p, const ScenarioSet& scenarios);

struct OracleValue {
    double value = 0.0;
    double std_error = 0.0;
    std::vector<double> z;
};

/// Plug-in estimate of the optimal value at covariate x: solves the
/// scenario approximation built from m fresh draws of the true errors.
OracleValue true_value(const Problem& p, const datagen::TruthSpec& spec,
                       std::span<const double> x, std::size_t m, std::uint64_t seed);

/// Closed-form newsvendor optimum under the true model, componentwise
/// clamp(f*_j(x) + q*_j(x) F^{-1}(b_j / (h_j + b_j))).
std::vector<double> newsvendor_true_optimum(const NewsvendorProblem& p,
                                            const datagen::TruthSpec& spec,
                                            std::span<const double> x);

} // namespace ersaa::stochprog
