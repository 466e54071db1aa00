#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/linalg.hpp"

namespace ersaa::regression {

using datagen::Dataset;
using linalg::Matrix;

enum class MeanKind { ols, fwls, knn };
enum class CovKind { parametric_log_linear, knn_diag };

/// Default neighborhood size ceil(n^(2/(2+d_x))).
std::size_t default_knn_k(std::size_t n, std::size_t d_x);

/// Indices of the k nearest training rows to x in Euclidean distance,
/// ordered by (distance, original index). Ties go to the smaller index.
std::vector<std::size_t> nearest_indices(const Matrix& train_x, std::span<const double> x,
                                         std::size_t k);

/// Fitted conditional-mean model, either linear (ols / fwls coefficients)
/// or a k-nearest-neighbor average over a stored training set.
class MeanEstimator {
  public:
    static MeanEstimator linear(MeanKind kind, std::vector<double> intercept, Matrix coef);
    static MeanEstimator knn(std::size_t k, Matrix train_x, Matrix train_y);

    MeanKind kind() const { return kind_; }
    std::size_t dim_x() const;
    std::size_t dim_y() const;

    std::vector<double> predict(std::span<const double> x) const;

    const std::vector<double>& intercept() const { return intercept_; }
    const Matrix& coef() const { return coef_; }
    std::size_t k() const { return k_; }
    const Matrix& train_x() const { return train_x_; }
    const Matrix& train_y() const { return train_y_; }

  private:
    MeanKind kind_ = MeanKind::ols;
    std::vector<double> intercept_; // linear kinds
    Matrix coef_;                   // d_y x d_x
    std::size_t k_ = 0;             // knn
    Matrix train_x_, train_y_;
};

/// Fitted diagonal scale model for Q(x).
///
/// parametric_log_linear regresses log squared residuals on (1, x) and
/// rescales each component so the standardized training residuals have unit
/// second moment. knn_diag averages squared residuals over the neighborhood.
/// Predictions are floored at delta_min componentwise.
class CovEstimator {
  public:
    static CovEstimator parametric(std::vector<double> intercept, Matrix slope,
                                   std::vector<double> scale, std::vector<double> delta_min);
    static CovEstimator knn(std::size_t k, Matrix train_x, Matrix train_sq_res,
                            std::vector<double> delta_min);

    CovKind kind() const { return kind_; }
    std::size_t dim_y() const;

    /// Diagonal of the fitted Q(x); every entry is at least delta_min.
    std::vector<double> predict_diag(std::span<const double> x) const;

    const std::vector<double>& intercept() const { return intercept_; }
    const Matrix& slope() const { return slope_; }
    const std::vector<double>& scale() const { return scale_; }
    const std::vector<double>& delta_min() const { return delta_min_; }
    std::size_t k() const { return k_; }
    const Matrix& train_x() const { return train_x_; }
    const Matrix& train_sq_res() const { return train_sq_res_; }

  private:
    CovKind kind_ = CovKind::parametric_log_linear;
    std::vector<double> intercept_; // parametric, per component
    Matrix slope_;                  // d_y x d_x
    std::vector<double> scale_;     // unit-second-moment rescale factors
    std::vector<double> delta_min_; // prediction floor, per component
    std::size_t k_ = 0;             // knn_diag
    Matrix train_x_, train_sq_res_;
};

struct ModelPair {
    MeanEstimator mean;
    CovEstimator cov;
};

/// Fits the conditional mean. k = 0 picks the default neighborhood size.
/// Kind fwls runs ols, a parametric scale fit, and one reweighted pass.
MeanEstimator fit_mean(const Dataset& data, MeanKind kind, std::size_t k = 0);

/// Fits the scale model to the squared residuals of a mean fit.
CovEstimator fit_cov(const Dataset& data, const MeanEstimator& mean, CovKind kind,
                     std::size_t k = 0);

/// Weighted least squares with rows scaled by the fitted 1 / q_j(x^i).
MeanEstimator refit_fwls(const Dataset& data, const CovEstimator& cov);

/// Full pipeline. For the fwls mean the scale model is refitted on the
/// final residuals, so the pair keeps standardized residuals at unit
/// second moment.
ModelPair fit_models(const Dataset& data, MeanKind mean_kind, CovKind cov_kind,
                     std::size_t mean_k = 0, std::size_t cov_k = 0);

} // namespace ersaa::regression
