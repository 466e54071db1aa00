#pragma once

#include <array>
#include <span>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/linalg.hpp"
#include "ersaa/regression.hpp"

namespace ersaa::residuals {

using datagen::Dataset;
using datagen::TruthSpec;
using linalg::Matrix;
using regression::ModelPair;

/// Componentwise box for the outcome support; entries may be infinite.
struct SupportBox {
    std::vector<double> lower;
    std::vector<double> upper;

    static SupportBox unbounded(std::size_t dim);

    std::size_t dim() const { return lower.size(); }
    bool contains(std::span<const double> v) const;
    std::vector<double> clamp(std::span<const double> v) const;
};

void validate(const SupportBox& box);

enum class Provenance { estimated, full_information };

/// Finite collection of outcome points with probability weights.
struct ScenarioSet {
    Matrix points;               // n x d_y
    std::vector<double> weights; // nonnegative, sums to one
    Provenance provenance = Provenance::estimated;

    std::size_t size() const { return points.rows(); }
    std::size_t dim() const { return points.cols(); }
};

/// eps_hat^i = Qhat(x^i)^{-1} (y^i - fhat(x^i)), one row per observation.
Matrix standardized_residuals(const Dataset& data, const ModelPair& models);

/// Scenario points proj_box(fhat(x) + Qhat(x) eps_hat^i) with uniform weights.
ScenarioSet build_er_scenarios(const ModelPair& models, const Matrix& std_residuals,
                               std::span<const double> x_new, const SupportBox& box);

/// Benchmark points f*(x) + Q*(x) eps^i from the true errors, no projection.
ScenarioSet build_fi_scenarios(const TruthSpec& spec, const Matrix& errors,
                               std::span<const double> x_new);

/**
 * Distance between the estimated and full-information scenario clouds at a
 * query point, with two certified overestimates.
 *
 * The deviation of scenario i is the unprojected difference
 *   (fhat(x) + Qhat(x) eps_hat^i) - (f*(x) + Q*(x) eps^i).
 * Both bounds decompose the mean deviation into a mean-estimation term at
 * the query, a scale-estimation term at the query, and two training-sample
 * moment products; the first splits moments by the Cauchy-Schwarz
 * inequality, the second pulls out a uniform bound on the inverted fitted
 * scale. Matrix norms are spectral, which for the diagonal scale matrices
 * here is the largest absolute diagonal entry.
 */
struct DeviationReport {
    double mean_dev = 0.0; // average deviation norm
    double rms_dev = 0.0;  // root mean squared deviation norm

    std::array<double, 4> bound6_terms{}; // moment-split bound
    std::array<double, 4> bound7_terms{}; // uniform-inverse bound

    /// max of the inverted fitted scale over training covariates and the
    /// query; a grid under-approximation of the supremum over all x.
    double sup_inv_scale = 0.0;
    bool sup_is_grid_max = true;

    /// Triangle inequality for averaged inverted scales:
    /// lemma_lhs <= lemma_rhs must hold up to roundoff.
    double lemma_lhs = 0.0;
    double lemma_rhs = 0.0;

    double bound6() const;
    double bound7() const;
    double bound6_slack() const { return bound6() - mean_dev; }
    double bound7_slack() const { return bound7() - mean_dev; }
    double lemma_slack() const { return lemma_rhs - lemma_lhs; }
};

/// Requires ground truth on the dataset; throws TruthUnavailableError.
DeviationReport deviation_report(const ModelPair& models, const Dataset& data,
                                 const TruthSpec& spec, std::span<const double> x_new);

} // namespace ersaa::residuals
