#include "ersaa/regression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ersaa/errors.hpp"

namespace ersaa::regression {

namespace {

constexpr double kLogFloor = 1e-12;   // floor under squared residuals inside log
constexpr double kDeltaMinFactor = 1e-6;

Matrix design_with_intercept(const Matrix& x) {
    Matrix d(x.rows(), x.cols() + 1, 1.0);
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) d(i, j + 1) = x(i, j);
    return d;
}

Matrix residual_matrix(const Dataset& data, const MeanEstimator& mean) {
    Matrix r(data.size(), data.y.cols());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const std::vector<double> f = mean.predict(data.x.row(i));
        for (std::size_t j = 0; j < r.cols(); ++j) r(i, j) = data.y(i, j) - f[j];
    }
    return r;
}

double median_abs(std::vector<double> v) {
    for (double& x : v) x = std::fabs(x);
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lower = *std::max_element(v.begin(), v.begin() + mid);
        m = 0.5 * (m + lower);
    }
    return m;
}

} // namespace

std::size_t default_knn_k(std::size_t n, std::size_t d_x) {
    const double v = std::pow(static_cast<double>(n), 2.0 / (2.0 + static_cast<double>(d_x)));
    std::size_t k = static_cast<std::size_t>(std::ceil(v - 1e-12));
    return std::clamp<std::size_t>(k, 1, n);
}

std::vector<std::size_t> nearest_indices(const Matrix& train_x, std::span<const double> x,
                                         std::size_t k) {
    const std::size_t n = train_x.rows();
    if (k == 0 || k > n) throw InvalidSpecError("nearest_indices: k outside [1, n]");
    std::vector<std::pair<double, std::size_t>> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d2 = 0.0;
        const auto row = train_x.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            const double d = row[j] - x[j];
            d2 += d * d;
        }
        order[i] = {d2, i};
    }
    std::nth_element(order.begin(), order.begin() + (k - 1), order.end());
    std::sort(order.begin(), order.begin() + k);
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = order[i].second;
    return idx;
}

MeanEstimator MeanEstimator::linear(MeanKind kind, std::vector<double> intercept, Matrix coef) {
    if (kind == MeanKind::knn) throw InvalidSpecError("linear estimator with knn kind");
    if (coef.rows() != intercept.size()) throw InvalidSpecError("coefficient shape mismatch");
    MeanEstimator m;
    m.kind_ = kind;
    m.intercept_ = std::move(intercept);
    m.coef_ = std::move(coef);
    return m;
}

MeanEstimator MeanEstimator::knn(std::size_t k, Matrix train_x, Matrix train_y) {
    if (train_x.rows() != train_y.rows() || train_x.rows() == 0)
        throw InvalidSpecError("knn estimator: bad training set");
    if (k == 0 || k > train_x.rows()) throw InvalidSpecError("knn estimator: k outside [1, n]");
    MeanEstimator m;
    m.kind_ = MeanKind::knn;
    m.k_ = k;
    m.train_x_ = std::move(train_x);
    m.train_y_ = std::move(train_y);
    return m;
}

std::size_t MeanEstimator::dim_x() const {
    return kind_ == MeanKind::knn ? train_x_.cols() : coef_.cols();
}

std::size_t MeanEstimator::dim_y() const {
    return kind_ == MeanKind::knn ? train_y_.cols() : intercept_.size();
}

std::vector<double> MeanEstimator::predict(std::span<const double> x) const {
    if (x.size() != dim_x()) throw DomainError("mean predict: dimension mismatch");
    if (kind_ != MeanKind::knn) {
        std::vector<double> f = linalg::matvec(coef_, x);
        for (std::size_t j = 0; j < f.size(); ++j) f[j] += intercept_[j];
        return f;
    }
    const std::vector<std::size_t> idx = nearest_indices(train_x_, x, k_);
    std::vector<double> f(train_y_.cols(), 0.0);
    for (std::size_t i : idx)
        for (std::size_t j = 0; j < f.size(); ++j) f[j] += train_y_(i, j);
    for (double& v : f) v /= static_cast<double>(k_);
    return f;
}

CovEstimator CovEstimator::parametric(std::vector<double> intercept, Matrix slope,
                                      std::vector<double> scale,
                                      std::vector<double> delta_min) {
    const std::size_t d_y = intercept.size();
    if (slope.rows() != d_y || scale.size() != d_y || delta_min.size() != d_y)
        throw InvalidSpecError("parametric scale model: shape mismatch");
    CovEstimator c;
    c.kind_ = CovKind::parametric_log_linear;
    c.intercept_ = std::move(intercept);
    c.slope_ = std::move(slope);
    c.scale_ = std::move(scale);
    c.delta_min_ = std::move(delta_min);
    return c;
}

CovEstimator CovEstimator::knn(std::size_t k, Matrix train_x, Matrix train_sq_res,
                               std::vector<double> delta_min) {
    if (train_x.rows() != train_sq_res.rows() || train_x.rows() == 0)
        throw InvalidSpecError("knn scale model: bad training set");
    if (k == 0 || k > train_x.rows()) throw InvalidSpecError("knn scale model: k outside [1, n]");
    if (delta_min.size() != train_sq_res.cols())
        throw InvalidSpecError("knn scale model: floor dimension mismatch");
    CovEstimator c;
    c.kind_ = CovKind::knn_diag;
    c.k_ = k;
    c.train_x_ = std::move(train_x);
    c.train_sq_res_ = std::move(train_sq_res);
    c.delta_min_ = std::move(delta_min);
    return c;
}

std::size_t CovEstimator::dim_y() const {
    return kind_ == CovKind::knn_diag ? train_sq_res_.cols() : intercept_.size();
}

std::vector<double> CovEstimator::predict_diag(std::span<const double> x) const {
    std::vector<double> q(dim_y());
    if (kind_ == CovKind::parametric_log_linear) {
        for (std::size_t j = 0; j < q.size(); ++j) {
            double arg = 0.5 * (intercept_[j] + linalg::dot(slope_.row(j), x));
            arg = std::clamp(arg, -700.0, 700.0); // keep exp finite
            q[j] = std::max(scale_[j] * std::exp(arg), delta_min_[j]);
        }
        return q;
    }
    const std::vector<std::size_t> idx = nearest_indices(train_x_, x, k_);
    for (std::size_t j = 0; j < q.size(); ++j) {
        double s = 0.0;
        for (std::size_t i : idx) s += train_sq_res_(i, j);
        s /= static_cast<double>(k_);
        q[j] = std::max(std::sqrt(s), delta_min_[j]);
    }
    return q;
}

MeanEstimator fit_mean(const Dataset& data, MeanKind kind, std::size_t k) {
    const std::size_t n = data.size();
    const std::size_t d_x = data.x.cols();
    if (kind == MeanKind::knn) {
        if (k == 0) k = default_knn_k(n, d_x);
        return MeanEstimator::knn(k, data.x, data.y);
    }
    if (n <= d_x + 1)
        throw InsufficientDataError("linear mean fit needs n > d_x + 1");
    if (kind == MeanKind::fwls) {
        const MeanEstimator pilot = fit_mean(data, MeanKind::ols);
        const CovEstimator w = fit_cov(data, pilot, CovKind::parametric_log_linear);
        return refit_fwls(data, w);
    }
    const Matrix design = design_with_intercept(data.x);
    const Matrix beta = linalg::least_squares(design, data.y); // (1+d_x) x d_y
    std::vector<double> intercept(data.y.cols());
    Matrix coef(data.y.cols(), d_x);
    for (std::size_t j = 0; j < data.y.cols(); ++j) {
        intercept[j] = beta(0, j);
        for (std::size_t c = 0; c < d_x; ++c) coef(j, c) = beta(c + 1, j);
    }
    return MeanEstimator::linear(MeanKind::ols, std::move(intercept), std::move(coef));
}

CovEstimator fit_cov(const Dataset& data, const MeanEstimator& mean, CovKind kind,
                     std::size_t k) {
    const std::size_t n = data.size();
    const std::size_t d_y = data.y.cols();
    const Matrix res = residual_matrix(data, mean);

    std::vector<double> delta_min(d_y);
    for (std::size_t j = 0; j < d_y; ++j) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = res(i, j);
        const double med = median_abs(std::move(col));
        delta_min[j] = kDeltaMinFactor * (med > 0.0 ? med : 1.0);
    }

    if (kind == CovKind::knn_diag) {
        if (k == 0) k = default_knn_k(n, data.x.cols());
        Matrix sq(n, d_y);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d_y; ++j) sq(i, j) = res(i, j) * res(i, j);
        return CovEstimator::knn(k, data.x, std::move(sq), std::move(delta_min));
    }

    if (n <= data.x.cols() + 1)
        throw InsufficientDataError("parametric scale fit needs n > d_x + 1");
    for (std::size_t j = 0; j < d_y; ++j) {
        bool any = false;
        for (std::size_t i = 0; i < n && !any; ++i) any = res(i, j) * res(i, j) > kLogFloor;
        if (!any)
            throw DegenerateResidualsError("component " + std::to_string(j) +
                                           ": all squared residuals at the log floor");
    }

    const Matrix design = design_with_intercept(data.x);
    Matrix target(n, d_y);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d_y; ++j)
            target(i, j) = std::log(std::max(res(i, j) * res(i, j), kLogFloor));
    const Matrix beta = linalg::least_squares(design, target);

    std::vector<double> intercept(d_y);
    Matrix slope(d_y, data.x.cols());
    for (std::size_t j = 0; j < d_y; ++j) {
        intercept[j] = beta(0, j);
        for (std::size_t c = 0; c < data.x.cols(); ++c) slope(j, c) = beta(c + 1, j);
    }

    // Rescale so standardized training residuals have unit second moment.
    std::vector<double> scale(d_y, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d_y; ++j) {
            const double arg =
                std::clamp(0.5 * (intercept[j] + linalg::dot(slope.row(j), data.x.row(i))),
                           -700.0, 700.0);
            const double raw = std::exp(arg);
            const double z = res(i, j) / raw;
            scale[j] += z * z;
        }
    }
    for (double& s : scale) s = std::sqrt(s / static_cast<double>(n));

    return CovEstimator::parametric(std::move(intercept), std::move(slope), std::move(scale),
                                    std::move(delta_min));
}

MeanEstimator refit_fwls(const Dataset& data, const CovEstimator& cov) {
    const std::size_t n = data.size();
    const std::size_t d_x = data.x.cols();
    const std::size_t d_y = data.y.cols();
    if (n <= d_x + 1)
        throw InsufficientDataError("weighted mean fit needs n > d_x + 1");
    if (cov.dim_y() != d_y) throw InvalidSpecError("refit_fwls: scale model dimension mismatch");

    Matrix weights(n, d_y);
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> q = cov.predict_diag(data.x.row(i));
        for (std::size_t j = 0; j < d_y; ++j) weights(i, j) = 1.0 / q[j];
    }

    std::vector<double> intercept(d_y);
    Matrix coef(d_y, d_x);
    Matrix design(n, d_x + 1);
    Matrix target(n, 1);
    for (std::size_t j = 0; j < d_y; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weights(i, j);
            design(i, 0) = w;
            for (std::size_t c = 0; c < d_x; ++c) design(i, c + 1) = w * data.x(i, c);
            target(i, 0) = w * data.y(i, j);
        }
        const Matrix beta = linalg::least_squares(design, target);
        intercept[j] = beta(0, 0);
        for (std::size_t c = 0; c < d_x; ++c) coef(j, c) = beta(c + 1, 0);
    }
    return MeanEstimator::linear(MeanKind::fwls, std::move(intercept), std::move(coef));
}

ModelPair fit_models(const Dataset& data, MeanKind mean_kind, CovKind cov_kind,
                     std::size_t mean_k, std::size_t cov_k) {
    if (mean_kind == MeanKind::fwls) {
        const MeanEstimator pilot = fit_mean(data, MeanKind::ols);
        const CovEstimator w = fit_cov(data, pilot, cov_kind, cov_k);
        MeanEstimator mean = refit_fwls(data, w);
        CovEstimator cov = fit_cov(data, mean, cov_kind, cov_k);
        return {std::move(mean), std::move(cov)};
    }
    MeanEstimator mean = fit_mean(data, mean_kind, mean_k);
    CovEstimator cov = fit_cov(data, mean, cov_kind, cov_k);
    return {std::move(mean), std::move(cov)};
}

} // namespace ersaa::regression
