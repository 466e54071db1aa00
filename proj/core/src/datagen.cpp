#include "ersaa/datagen.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ersaa/errors.hpp"
#include "ersaa/rng.hpp"
#include "ersaa/stats.hpp"

namespace ersaa::datagen {

namespace {

constexpr double kSqrt3 = 1.7320508075688772935;

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidSpecError(what);
}

bool finite_all(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double draw_covariate_component(rng::Stream& stream, const CovariateModel& m, std::size_t j) {
    switch (m.kind) {
        case CovariateDist::uniform_box: return stream.uniform(m.lower[j], m.upper[j]);
        case CovariateDist::standard_normal: return stream.normal();
    }
    throw InvalidSpecError("unknown covariate distribution");
}

double draw_error_component(rng::Stream& stream, const ErrorModel& m) {
    switch (m.kind) {
        case ErrorDist::standard_normal: return stream.normal();
        case ErrorDist::uniform: return stream.uniform(-kSqrt3, kSqrt3);
        case ErrorDist::scaled_student_t: return stream.student_t_unit_variance(m.dof);
    }
    throw InvalidSpecError("unknown error distribution");
}

} // namespace

TruthSpec::TruthSpec(LinearMeanModel mean, VarianceModel variance, ErrorModel errors,
                     CovariateModel covariates)
    : mean_(std::move(mean)),
      variance_(std::move(variance)),
      errors_(std::move(errors)),
      covariates_(std::move(covariates)) {
    const std::size_t d_y = mean_.intercept.size();
    const std::size_t d_x = mean_.coef.cols();
    require(d_y >= 1 && d_x >= 1, "dimensions must be positive");
    require(mean_.coef.rows() == d_y, "mean coefficient shape mismatch");
    require(finite_all(mean_.intercept) && mean_.coef.all_finite(),
            "mean model has non-finite entries");

    if (covariates_.kind == CovariateDist::uniform_box) {
        require(covariates_.lower.size() == d_x && covariates_.upper.size() == d_x,
                "covariate box dimension mismatch");
        require(finite_all(covariates_.lower) && finite_all(covariates_.upper),
                "covariate box has non-finite entries");
        for (std::size_t j = 0; j < d_x; ++j)
            require(covariates_.lower[j] < covariates_.upper[j],
                    "covariate box has empty sides");
    }

    switch (variance_.kind) {
        case VarianceKind::constant:
            require(variance_.values.size() == d_y, "variance values dimension mismatch");
            for (double v : variance_.values)
                require(std::isfinite(v) && v > 0.0, "constant scale must be positive");
            break;
        case VarianceKind::linear_scale:
        case VarianceKind::log_linear:
        case VarianceKind::log_log:
            require(variance_.sigma.size() == d_y, "variance sigma dimension mismatch");
            require(variance_.theta.rows() == d_y && variance_.theta.cols() == d_x,
                    "variance theta shape mismatch");
            require(finite_all(variance_.sigma) && variance_.theta.all_finite(),
                    "variance model has non-finite entries");
            break;
    }

    if (variance_.kind == VarianceKind::linear_scale) {
        // 1 + theta_j . x must keep one sign over the whole support. Over a
        // box the extremes are attained at corners and reduce to interval
        // arithmetic; over an unbounded Gaussian support any nonzero theta_j
        // crosses zero.
        for (std::size_t j = 0; j < dim_y(); ++j) {
            require(variance_.sigma[j] != 0.0, "linear_scale needs nonzero sigma");
            if (covariates_.kind == CovariateDist::uniform_box) {
                double lo = 1.0, hi = 1.0;
                for (std::size_t k = 0; k < dim_x(); ++k) {
                    const double t = variance_.theta(j, k);
                    const double a = t * covariates_.lower[k];
                    const double b = t * covariates_.upper[k];
                    lo += std::min(a, b);
                    hi += std::max(a, b);
                }
                require(lo > 0.0 || hi < 0.0,
                        "linear_scale factor changes sign on the covariate box");
            } else {
                for (std::size_t k = 0; k < dim_x(); ++k)
                    require(variance_.theta(j, k) == 0.0,
                            "linear_scale with unbounded covariates needs zero theta");
            }
        }
    }

    if (variance_.kind == VarianceKind::log_log) {
        require(covariates_.kind == CovariateDist::uniform_box,
                "log_log needs covariates bounded away from zero");
        for (std::size_t k = 0; k < d_x; ++k)
            require(covariates_.lower[k] > 0.0, "log_log needs a positive covariate box");
    }

    // dof > 4 keeps the fourth error moment finite, which the certified
    // deviation bounds average over.
    if (errors_.kind == ErrorDist::scaled_student_t)
        require(errors_.dof > 4.0, "scaled_student_t needs dof > 4");

    // Sampled defense in depth: positivity of every q_j on support draws.
    rng::Stream probe(0xC0FFEEULL);
    std::vector<double> x(d_x);
    for (int it = 0; it < 1024; ++it) {
        for (std::size_t k = 0; k < d_x; ++k)
            x[k] = draw_covariate_component(probe, covariates_, k);
        const std::vector<double> q = cov_diag_at(x);
        for (double v : q)
            require(std::isfinite(v) && v > 0.0, "scale model is not positive on support");
    }
}

std::vector<double> TruthSpec::mean_at(std::span<const double> x) const {
    if (x.size() != dim_x()) throw DomainError("mean_at: covariate dimension mismatch");
    std::vector<double> f = linalg::matvec(mean_.coef, x);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += mean_.intercept[j];
    return f;
}

std::vector<double> TruthSpec::cov_diag_at(std::span<const double> x) const {
    if (x.size() != dim_x()) throw DomainError("cov_diag_at: covariate dimension mismatch");
    std::vector<double> q(dim_y());
    switch (variance_.kind) {
        case VarianceKind::constant:
            q = variance_.values;
            break;
        case VarianceKind::linear_scale:
            for (std::size_t j = 0; j < dim_y(); ++j) {
                const double lin = 1.0 + linalg::dot(variance_.theta.row(j), x);
                q[j] = std::fabs(variance_.sigma[j] * lin);
            }
            break;
        case VarianceKind::log_linear:
            for (std::size_t j = 0; j < dim_y(); ++j)
                q[j] = std::exp(0.5 * (variance_.sigma[j] + linalg::dot(variance_.theta.row(j), x)));
            break;
        case VarianceKind::log_log: {
            std::vector<double> lx(dim_x());
            for (std::size_t k = 0; k < dim_x(); ++k) {
                if (!(x[k] > 0.0))
                    throw DomainError("log_log scale needs strictly positive covariates");
                lx[k] = std::log(x[k]);
            }
            for (std::size_t j = 0; j < dim_y(); ++j)
                q[j] = std::exp(0.5 * (variance_.sigma[j] + linalg::dot(variance_.theta.row(j), lx)));
            break;
        }
    }
    return q;
}

double TruthSpec::error_quantile(double tau) const {
    switch (errors_.kind) {
        case ErrorDist::standard_normal: return stats::normal_quantile(tau);
        case ErrorDist::uniform: return -kSqrt3 + 2.0 * kSqrt3 * tau;
        case ErrorDist::scaled_student_t:
            return stats::student_t_unit_variance_quantile(tau, errors_.dof);
    }
    throw InvalidSpecError("unknown error distribution");
}

Dataset sample(const TruthSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidSpecError("sample: n must be positive");
    const std::size_t d_x = spec.dim_x();
    const std::size_t d_y = spec.dim_y();

    Dataset data;
    data.x = Matrix(n, d_x);
    data.y = Matrix(n, d_y);
    data.truth = Dataset::Truth{Matrix(n, d_y), Matrix(n, d_y), Matrix(n, d_y)};

    rng::Stream stream(seed);
    std::vector<double> x(d_x);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d_x; ++k) {
            x[k] = draw_covariate_component(stream, spec.covariate_model(), k);
            data.x(i, k) = x[k];
        }
        const std::vector<double> f = spec.mean_at(x);
        const std::vector<double> q = spec.cov_diag_at(x);
        for (std::size_t j = 0; j < d_y; ++j) {
            const double e = draw_error_component(stream, spec.error_model());
            data.truth->mean(i, j) = f[j];
            data.truth->cov_diag(i, j) = q[j];
            data.truth->errors(i, j) = e;
            data.y(i, j) = f[j] + q[j] * e;
        }
    }
    return data;
}

Matrix sample_errors(const TruthSpec& spec, std::size_t m, std::uint64_t seed) {
    if (m == 0) throw InvalidSpecError("sample_errors: m must be positive");
    Matrix errors(m, spec.dim_y());
    rng::Stream stream(seed);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < spec.dim_y(); ++j)
            errors(i, j) = draw_error_component(stream, spec.error_model());
    return errors;
}

std::pair<std::vector<double>, std::vector<double>> eval_truth(const TruthSpec& spec,
                                                               std::span<const double> x) {
    return {spec.mean_at(x), spec.cov_diag_at(x)};
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                      const std::vector<const Matrix*>& blocks) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path);
    for (std::size_t c = 0; c < header.size(); ++c)
        out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t n = blocks.front()->rows();
    for (std::size_t i = 0; i < n; ++i) {
        bool first = true;
        for (const Matrix* m : blocks) {
            for (std::size_t j = 0; j < m->cols(); ++j) {
                if (!first) out << ',';
                out << format_double((*m)(i, j));
                first = false;
            }
        }
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

} // namespace

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::vector<std::string> header;
    for (std::size_t j = 0; j < data.x.cols(); ++j) header.push_back("x" + std::to_string(j + 1));
    for (std::size_t j = 0; j < data.y.cols(); ++j) header.push_back("y" + std::to_string(j + 1));
    write_matrix_csv(path, header, {&data.x, &data.y});
}

void write_truth_csv(const Dataset& data, const std::string& path) {
    if (!data.has_truth()) throw TruthUnavailableError("dataset carries no ground truth");
    std::vector<std::string> header;
    const std::size_t d_y = data.y.cols();
    for (std::size_t j = 0; j < d_y; ++j) header.push_back("f" + std::to_string(j + 1));
    for (std::size_t j = 0; j < d_y; ++j) header.push_back("q" + std::to_string(j + 1));
    for (std::size_t j = 0; j < d_y; ++j) header.push_back("e" + std::to_string(j + 1));
    write_matrix_csv(path, header,
                     {&data.truth->mean, &data.truth->cov_diag, &data.truth->errors});
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

} // namespace

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_csv_line(line);

    std::size_t d_x = 0, d_y = 0;
    for (const std::string& h : header) {
        const std::string want_x = "x" + std::to_string(d_x + 1);
        const std::string want_y = "y" + std::to_string(d_y + 1);
        if (d_y == 0 && h == want_x) ++d_x;
        else if (h == want_y) ++d_y;
        else throw DataError(path + ": unexpected header column '" + h + "'");
    }
    if (d_x == 0 || d_y == 0)
        throw DataError(path + ": header must name x and y columns");

    std::vector<double> values;
    std::size_t n = 0;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != d_x + d_y)
            throw DataError(path + " line " + std::to_string(lineno) + ": expected " +
                            std::to_string(d_x + d_y) + " fields, got " +
                            std::to_string(fields.size()));
        for (const std::string& f : fields) {
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str() || *end != '\0' || !std::isfinite(v))
                throw DataError(path + " line " + std::to_string(lineno) +
                                ": bad number '" + f + "'");
            values.push_back(v);
        }
        ++n;
    }
    if (n == 0) throw DataError(path + ": no data rows");

    Dataset data;
    data.x = Matrix(n, d_x);
    data.y = Matrix(n, d_y);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < d_x; ++k) data.x(i, k) = values[i * (d_x + d_y) + k];
        for (std::size_t j = 0; j < d_y; ++j) data.y(i, j) = values[i * (d_x + d_y) + d_x + j];
    }
    return data;
}

} // namespace ersaa::datagen
