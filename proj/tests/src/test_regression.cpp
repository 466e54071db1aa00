#include <cmath>

#include <doctest.h>

#include "ersaa/datagen.hpp"
#include "ersaa/errors.hpp"
#include "ersaa/regression.hpp"

using namespace ersaa;
using datagen::Dataset;
using linalg::Matrix;
using regression::CovKind;
using regression::MeanKind;

namespace {

Dataset line_dataset() {
    // y = 1/6 + x/2 is the least-squares line through these points
    Dataset data;
    data.x = Matrix(3, 1);
    data.y = Matrix(3, 1);
    data.x(0, 0) = 0.0;
    data.x(1, 0) = 1.0;
    data.x(2, 0) = 2.0;
    data.y(0, 0) = 0.0;
    data.y(1, 0) = 1.0;
    data.y(2, 0) = 1.0;
    return data;
}

datagen::TruthSpec hetero_spec(double sigma, double theta) {
    Matrix coef(1, 1);
    coef(0, 0) = 3.0;
    datagen::VarianceModel v;
    v.kind = datagen::VarianceKind::log_linear;
    v.sigma = {sigma};
    v.theta = Matrix(1, 1);
    v.theta(0, 0) = theta;
    datagen::CovariateModel c;
    c.lower = {0.0};
    c.upper = {2.0};
    return datagen::TruthSpec({{2.0}, coef}, v, {}, c);
}

} // namespace

TEST_CASE("default_knn_k follows the dimension-adapted growth rule") {
    CHECK(regression::default_knn_k(100, 2) == 10);  // 100^(1/2)
    CHECK(regression::default_knn_k(1000, 4) == 10); // 1000^(1/3)
    CHECK(regression::default_knn_k(1, 1) == 1);
    CHECK(regression::default_knn_k(8, 1) == 4); // 8^(2/3)
    CHECK(regression::default_knn_k(2, 8) >= 1);
}

TEST_CASE("nearest_indices breaks distance ties by index") {
    Matrix train(4, 1);
    train(0, 0) = 0.0;
    train(1, 0) = 1.0;
    train(2, 0) = 1.0;
    train(3, 0) = 2.0;
    const std::vector<double> query{1.0};

    const auto two = regression::nearest_indices(train, query, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0] == 1);
    CHECK(two[1] == 2);

    const auto three = regression::nearest_indices(train, query, 3);
    CHECK(three[2] == 0); // equidistant pair {0, 3}: smaller index wins

    CHECK_THROWS_AS(regression::nearest_indices(train, query, 0), InvalidSpecError);
    CHECK_THROWS_AS(regression::nearest_indices(train, query, 5), InvalidSpecError);
}

TEST_CASE("ols matches the hand-solved normal equations") {
    const auto mean = regression::fit_mean(line_dataset(), MeanKind::ols);
    CHECK(mean.intercept()[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(mean.coef()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    const auto at = mean.predict(std::vector<double>{2.0});
    CHECK(at[0] == doctest::Approx(1.0 / 6.0 + 1.0).epsilon(1e-12));
}

TEST_CASE("ols needs more rows than coefficients") {
    Dataset tiny;
    tiny.x = Matrix(2, 1);
    tiny.y = Matrix(2, 1);
    tiny.x(1, 0) = 1.0;
    tiny.y(1, 0) = 1.0;
    CHECK_THROWS_AS(regression::fit_mean(tiny, MeanKind::ols), InsufficientDataError);
}

TEST_CASE("ols recovers an exactly linear map, and the scale fit then degenerates") {
    Dataset data;
    const std::size_t n = 20;
    data.x = Matrix(n, 2);
    data.y = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        data.x(i, 0) = 0.1 * double(i);
        data.x(i, 1) = double(i % 5);
        data.y(i, 0) = 2.0 - 1.5 * data.x(i, 0) + 0.25 * data.x(i, 1);
    }
    const auto mean = regression::fit_mean(data, MeanKind::ols);
    CHECK(mean.intercept()[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(mean.coef()(0, 0) == doctest::Approx(-1.5).epsilon(1e-9));
    CHECK(mean.coef()(0, 1) == doctest::Approx(0.25).epsilon(1e-9));

    // residuals are numerically zero, so no scale model is identifiable
    CHECK_THROWS_AS(regression::fit_cov(data, mean, CovKind::parametric_log_linear),
                    DegenerateResidualsError);
}

TEST_CASE("knn mean with k = n is the global average") {
    Dataset data;
    data.x = Matrix(4, 1);
    data.y = Matrix(4, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        data.x(i, 0) = double(i);
        data.y(i, 0) = double(i) + 1.0;
    }
    const auto mean = regression::fit_mean(data, MeanKind::knn, 4);
    CHECK(mean.predict(std::vector<double>{0.0})[0] == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(mean.predict(std::vector<double>{9.0})[0] == doctest::Approx(2.5).epsilon(1e-15));

    const auto one = regression::fit_mean(data, MeanKind::knn, 1);
    CHECK(one.predict(std::vector<double>{2.2})[0] == doctest::Approx(3.0).epsilon(1e-15));
}

TEST_CASE("parametric scale fit recovers a log-linear variance") {
    const auto spec = hetero_spec(-1.0, 1.2);
    const auto data = datagen::sample(spec, 4000, 19);
    const auto mean = regression::fit_mean(data, MeanKind::ols);
    const auto cov = regression::fit_cov(data, mean, CovKind::parametric_log_linear);

    CHECK(cov.slope()(0, 0) == doctest::Approx(1.2).epsilon(0.15));
    for (const double x : {0.2, 1.0, 1.8}) {
        const double fitted = cov.predict_diag(std::vector<double>{x})[0];
        const double truth = std::exp(0.5 * (-1.0 + 1.2 * x));
        CHECK(fitted == doctest::Approx(truth).epsilon(0.10));
    }

    // the rescale step pins the standardized second moment at one
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = data.y(i, 0) - mean.predict(data.x.row(i))[0];
        const double q = cov.predict_diag(data.x.row(i))[0];
        acc += (r / q) * (r / q);
    }
    CHECK(acc / double(data.size()) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("knn scale fit with k = n uses the pooled residual moment") {
    Dataset data;
    data.x = Matrix(4, 1);
    data.y = Matrix(4, 1);
    for (std::size_t i = 0; i < 4; ++i) {
        data.x(i, 0) = double(i);
        data.y(i, 0) = double(i + 1); // mean 2.5, residuals {-1.5,-0.5,0.5,1.5}
    }
    const auto mean = regression::fit_mean(data, MeanKind::knn, 4);
    const auto cov = regression::fit_cov(data, mean, CovKind::knn_diag, 4);
    const double pooled = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 4.0);
    CHECK(cov.predict_diag(std::vector<double>{1.0})[0] ==
          doctest::Approx(pooled).epsilon(1e-12));
}

TEST_CASE("fwls differs from ols and stays calibrated") {
    const auto spec = hetero_spec(-2.0, 3.0);
    const auto data = datagen::sample(spec, 500, 23);

    const auto ols = regression::fit_models(data, MeanKind::ols, CovKind::parametric_log_linear);
    const auto fwls = regression::fit_models(data, MeanKind::fwls, CovKind::parametric_log_linear);
    CHECK(fwls.mean.kind() == MeanKind::fwls);
    CHECK(fwls.mean.coef()(0, 0) != ols.mean.coef()(0, 0));

    // both pipelines leave standardized residuals with unit second moment
    for (const auto& pair : {ols, fwls}) {
        double acc = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double r = data.y(i, 0) - pair.mean.predict(data.x.row(i))[0];
            const double q = pair.cov.predict_diag(data.x.row(i))[0];
            acc += (r / q) * (r / q);
        }
        CHECK(acc / double(data.size()) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("fit_models wires the requested estimator kinds") {
    const auto spec = hetero_spec(-1.0, 0.5);
    const auto data = datagen::sample(spec, 200, 3);
    const auto knn = regression::fit_models(data, MeanKind::knn, CovKind::knn_diag);
    CHECK(knn.mean.kind() == MeanKind::knn);
    CHECK(knn.cov.kind() == CovKind::knn_diag);
    CHECK(knn.mean.k() == regression::default_knn_k(200, 1));

    const auto forced = regression::fit_models(data, MeanKind::knn, CovKind::knn_diag, 7, 9);
    CHECK(forced.mean.k() == 7);
    CHECK(forced.cov.k() == 9);
}
