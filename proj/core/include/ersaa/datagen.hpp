#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ersaa/linalg.hpp"

namespace ersaa::datagen {

using linalg::Matrix;

/// Conditional mean f*(x) = intercept + coef x.
struct LinearMeanModel {
    std::vector<double> intercept; // length d_y
    Matrix coef;                   // d_y x d_x
};

enum class VarianceKind {
    constant,     // q_j(x) = values[j]
    linear_scale, // q_j(x)^2 = sigma_j^2 (1 + theta_j . x)^2
    log_linear,   // q_j(x)^2 = exp(sigma_j + theta_j . x)
    log_log,      // q_j(x)^2 = exp(sigma_j + theta_j . log x), componentwise log
};

struct VarianceModel {
    VarianceKind kind = VarianceKind::constant;
    std::vector<double> values; // constant only, length d_y
    std::vector<double> sigma;  // length d_y
    Matrix theta;               // d_y x d_x
};

enum class ErrorDist { standard_normal, uniform, scaled_student_t };

struct ErrorModel {
    ErrorDist kind = ErrorDist::standard_normal;
    double dof = 6.0; // scaled_student_t only, must exceed 4
};

enum class CovariateDist { uniform_box, standard_normal };

struct CovariateModel {
    CovariateDist kind = CovariateDist::uniform_box;
    std::vector<double> lower; // uniform_box only
    std::vector<double> upper;
};

/**
 * Validated generative model: Y = f*(X) + Q*(X) eps with diagonal Q*,
 * eps componentwise zero mean and unit variance.
 *
 * Construction rejects any variance model that is not strictly positive on
 * the covariate support (analytically where the support is a box, plus a
 * sampled check), and any log_log model whose covariates can reach a
 * nonpositive coordinate.
 */
class TruthSpec {
  public:
    TruthSpec(LinearMeanModel mean, VarianceModel variance, ErrorModel errors,
              CovariateModel covariates);

    std::size_t dim_x() const { return mean_.coef.cols(); }
    std::size_t dim_y() const { return mean_.intercept.size(); }

    std::vector<double> mean_at(std::span<const double> x) const;

    /// Diagonal of Q*(x); throws DomainError outside the model domain.
    std::vector<double> cov_diag_at(std::span<const double> x) const;

    const LinearMeanModel& mean_model() const { return mean_; }
    const VarianceModel& variance_model() const { return variance_; }
    const ErrorModel& error_model() const { return errors_; }
    const CovariateModel& covariate_model() const { return covariates_; }

    /// Quantile of one error component (all components share the law).
    double error_quantile(double tau) const;

  private:
    LinearMeanModel mean_;
    VarianceModel variance_;
    ErrorModel errors_;
    CovariateModel covariates_;
};

/// i.i.d. sample plus the ground-truth values it was generated from.
struct Dataset {
    Matrix x; // n x d_x
    Matrix y; // n x d_y

    struct Truth {
        Matrix mean;     // f*(x^i), n x d_y
        Matrix cov_diag; // q*_j(x^i), n x d_y
        Matrix errors;   // eps^i, n x d_y
    };
    std::optional<Truth> truth;

    std::size_t size() const { return x.rows(); }
    bool has_truth() const { return truth.has_value(); }
};

/// Draws n observations; the same (spec, n, seed) reproduce bytes exactly.
Dataset sample(const TruthSpec& spec, std::size_t n, std::uint64_t seed);

/// Draws m rows of the error distribution alone (m x d_y).
Matrix sample_errors(const TruthSpec& spec, std::size_t m, std::uint64_t seed);

/// (f*(x), diag Q*(x)) at one covariate point.
std::pair<std::vector<double>, std::vector<double>> eval_truth(const TruthSpec& spec,
                                                               std::span<const double> x);

/// Writes "x1..xdx,y1..ydy" rows. Numbers round-trip exactly.
void write_dataset_csv(const Dataset& data, const std::string& path);

/// Writes the ground-truth sidecar "f1..fdy,q1..qdy,e1..edy".
void write_truth_csv(const Dataset& data, const std::string& path);

/// Reads a dataset written by write_dataset_csv; dims come from the header.
Dataset read_dataset_csv(const std::string& path);

} // namespace ersaa::datagen
