#include "ersaa/residuals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ersaa/errors.hpp"

namespace ersaa::residuals {

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::fabs(a[j] - b[j]));
    return m;
}

double max_inv(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, 1.0 / x);
    return m;
}

} // namespace

SupportBox SupportBox::unbounded(std::size_t dim) {
    const double inf = std::numeric_limits<double>::infinity();
    return {std::vector<double>(dim, -inf), std::vector<double>(dim, inf)};
}

void validate(const SupportBox& box) {
    if (box.lower.size() != box.upper.size() || box.lower.empty())
        throw InvalidSpecError("support box: bad dimensions");
    for (std::size_t j = 0; j < box.lower.size(); ++j) {
        if (std::isnan(box.lower[j]) || std::isnan(box.upper[j]) ||
            !(box.lower[j] <= box.upper[j]))
            throw InvalidSpecError("support box: lower must not exceed upper");
    }
}

bool SupportBox::contains(std::span<const double> v) const {
    for (std::size_t j = 0; j < v.size(); ++j)
        if (v[j] < lower[j] || v[j] > upper[j]) return false;
    return true;
}

std::vector<double> SupportBox::clamp(std::span<const double> v) const {
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::min(std::max(out[j], lower[j]), upper[j]);
    return out;
}

Matrix standardized_residuals(const Dataset& data, const ModelPair& models) {
    const std::size_t n = data.size();
    const std::size_t d_y = data.y.cols();
    Matrix eps(n, d_y);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.x.row(i);
        const std::vector<double> f = models.mean.predict(x);
        const std::vector<double> q = models.cov.predict_diag(x);
        for (std::size_t j = 0; j < d_y; ++j) eps(i, j) = (data.y(i, j) - f[j]) / q[j];
    }
    return eps;
}

ScenarioSet build_er_scenarios(const ModelPair& models, const Matrix& std_residuals,
                               std::span<const double> x_new, const SupportBox& box) {
    validate(box);
    const std::size_t n = std_residuals.rows();
    const std::size_t d_y = std_residuals.cols();
    if (n == 0) throw InvalidSpecError("build_er_scenarios: empty residual matrix");
    if (box.dim() != d_y) throw InvalidSpecError("build_er_scenarios: box dimension mismatch");

    const std::vector<double> f = models.mean.predict(x_new);
    const std::vector<double> q = models.cov.predict_diag(x_new);

    ScenarioSet s;
    s.points = Matrix(n, d_y);
    s.weights.assign(n, 1.0 / static_cast<double>(n));
    s.provenance = Provenance::estimated;
    std::vector<double> p(d_y);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d_y; ++j) p[j] = f[j] + q[j] * std_residuals(i, j);
        const std::vector<double> clamped = box.clamp(p);
        for (std::size_t j = 0; j < d_y; ++j) s.points(i, j) = clamped[j];
    }
    return s;
}

ScenarioSet build_fi_scenarios(const TruthSpec& spec, const Matrix& errors,
                               std::span<const double> x_new) {
    const std::size_t n = errors.rows();
    if (n == 0) throw InvalidSpecError("build_fi_scenarios: empty error matrix");
    if (errors.cols() != spec.dim_y())
        throw InvalidSpecError("build_fi_scenarios: error dimension mismatch");

    const std::vector<double> f = spec.mean_at(x_new);
    const std::vector<double> q = spec.cov_diag_at(x_new);

    ScenarioSet s;
    s.points = Matrix(n, spec.dim_y());
    s.weights.assign(n, 1.0 / static_cast<double>(n));
    s.provenance = Provenance::full_information;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < spec.dim_y(); ++j)
            s.points(i, j) = f[j] + q[j] * errors(i, j);
    return s;
}

double DeviationReport::bound6() const {
    return bound6_terms[0] + bound6_terms[1] + bound6_terms[2] + bound6_terms[3];
}

double DeviationReport::bound7() const {
    return bound7_terms[0] + bound7_terms[1] + bound7_terms[2] + bound7_terms[3];
}

DeviationReport deviation_report(const ModelPair& models, const Dataset& data,
                                 const TruthSpec& spec, std::span<const double> x_new) {
    if (!data.has_truth())
        throw TruthUnavailableError("deviation_report needs ground-truth columns");
    const std::size_t n = data.size();
    const std::size_t d_y = data.y.cols();
    const double nd = static_cast<double>(n);

    const std::vector<double> f_hat = models.mean.predict(x_new);
    const std::vector<double> q_hat = models.cov.predict_diag(x_new);
    const std::vector<double> f_star = spec.mean_at(x_new);
    const std::vector<double> q_star = spec.cov_diag_at(x_new);

    const Matrix eps_hat = standardized_residuals(data, models);
    const Matrix& eps_star = data.truth->errors;

    DeviationReport rep;

    // Deviation cloud at the query point, no projection.
    double sum_dev = 0.0, sum_dev2 = 0.0;
    std::vector<double> diff(d_y);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d_y; ++j)
            diff[j] = (f_hat[j] + q_hat[j] * eps_hat(i, j)) -
                      (f_star[j] + q_star[j] * eps_star(i, j));
        const double d = linalg::norm2(diff);
        sum_dev += d;
        sum_dev2 += d * d;
    }
    rep.mean_dev = sum_dev / nd;
    rep.rms_dev = std::sqrt(sum_dev2 / nd);

    // Training-sample moments shared by the bounds.
    double mean_norm_eps = 0.0;   // (1/n) sum ||eps^i||
    double mean_sq_norm_eps = 0.0; // (1/n) sum ||eps^i||^2
    double mean_q4_eps = 0.0;     // (1/n) sum ||eps^i||^4
    double mean_inv_diff_sq = 0.0;  // (1/n) sum ||Qhat^{-1} - Q*^{-1}||^2 at x^i
    double mean_qstar4 = 0.0;       // (1/n) sum ||Q*(x^i)||^4
    double mean_inv_hat_sq = 0.0;   // (1/n) sum ||Qhat(x^i)^{-1}||^2
    double mean_inv_star_sq = 0.0;  // (1/n) sum ||Q*(x^i)^{-1}||^2
    double mean_scale_diff_sq = 0.0; // (1/n) sum ||Q*(x^i) - Qhat(x^i)||^2
    double mean_fdiff = 0.0;         // (1/n) sum ||f*(x^i) - fhat(x^i)||
    double mean_fdiff_sq = 0.0;      // (1/n) sum ||f*(x^i) - fhat(x^i)||^2
    double max_inv_hat = max_inv(q_hat); // grid max includes the query point

    std::vector<double> q_hat_i(d_y), inv_hat(d_y), inv_star(d_y), fd(d_y);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = data.x.row(i);
        const std::vector<double> f_i = models.mean.predict(xi);
        q_hat_i = models.cov.predict_diag(xi);

        const double norm_eps = linalg::norm2(eps_star.row(i));
        mean_norm_eps += norm_eps;
        mean_sq_norm_eps += norm_eps * norm_eps;
        mean_q4_eps += norm_eps * norm_eps * norm_eps * norm_eps;

        double qstar_i_max = 0.0, inv_diff = 0.0, scale_diff = 0.0;
        for (std::size_t j = 0; j < d_y; ++j) {
            const double qs = data.truth->cov_diag(i, j);
            inv_hat[j] = 1.0 / q_hat_i[j];
            inv_star[j] = 1.0 / qs;
            qstar_i_max = std::max(qstar_i_max, qs);
            inv_diff = std::max(inv_diff, std::fabs(inv_hat[j] - inv_star[j]));
            scale_diff = std::max(scale_diff, std::fabs(qs - q_hat_i[j]));
            fd[j] = data.truth->mean(i, j) - f_i[j];
        }
        mean_inv_diff_sq += inv_diff * inv_diff;
        mean_qstar4 += qstar_i_max * qstar_i_max * qstar_i_max * qstar_i_max;
        mean_inv_hat_sq += max_abs(inv_hat) * max_abs(inv_hat);
        mean_inv_star_sq += max_abs(inv_star) * max_abs(inv_star);
        mean_scale_diff_sq += scale_diff * scale_diff;
        const double fdn = linalg::norm2(fd);
        mean_fdiff += fdn;
        mean_fdiff_sq += fdn * fdn;
        max_inv_hat = std::max(max_inv_hat, max_inv(q_hat_i));
    }
    mean_norm_eps /= nd;
    mean_sq_norm_eps /= nd;
    mean_q4_eps /= nd;
    mean_inv_diff_sq /= nd;
    mean_qstar4 /= nd;
    mean_inv_hat_sq /= nd;
    mean_inv_star_sq /= nd;
    mean_scale_diff_sq /= nd;
    mean_fdiff /= nd;
    mean_fdiff_sq /= nd;

    std::vector<double> qdiff(d_y);
    for (std::size_t j = 0; j < d_y; ++j) qdiff[j] = q_hat[j] - q_star[j];
    std::vector<double> fdiff_at_x(d_y);
    for (std::size_t j = 0; j < d_y; ++j) fdiff_at_x[j] = f_hat[j] - f_star[j];

    const double q_hat_norm = max_abs(q_hat);
    rep.sup_inv_scale = max_inv_hat;
    rep.sup_is_grid_max = true;

    rep.bound6_terms[0] = linalg::norm2(fdiff_at_x);
    rep.bound6_terms[1] = max_abs(qdiff) * mean_norm_eps;
    rep.bound6_terms[2] = q_hat_norm * std::sqrt(mean_inv_diff_sq) *
                          std::pow(mean_qstar4, 0.25) * std::pow(mean_q4_eps, 0.25);
    rep.bound6_terms[3] = q_hat_norm * std::sqrt(mean_inv_hat_sq) * std::sqrt(mean_fdiff_sq);

    rep.bound7_terms[0] = rep.bound6_terms[0];
    rep.bound7_terms[1] = rep.bound6_terms[1];
    rep.bound7_terms[2] = q_hat_norm * max_inv_hat * std::sqrt(mean_scale_diff_sq) *
                          std::sqrt(mean_sq_norm_eps);
    rep.bound7_terms[3] = q_hat_norm * max_inv_hat * mean_fdiff;

    rep.lemma_lhs = std::sqrt(mean_inv_hat_sq);
    rep.lemma_rhs = std::sqrt(mean_inv_diff_sq) + std::sqrt(mean_inv_star_sq);

    return rep;
}

} // namespace ersaa::residuals
