#include "ersaa/serialize.hpp"

#include <fstream>
#include <sstream>

#include "ersaa/errors.hpp"
#include "json_util.hpp"

namespace ersaa::serialize {

using jsonutil::json;
using linalg::Matrix;

namespace {

json mean_to_json(const regression::MeanEstimator& mean) {
    json out;
    switch (mean.kind()) {
        case regression::MeanKind::ols:
        case regression::MeanKind::fwls:
            out["kind"] = mean.kind() == regression::MeanKind::ols ? "ols" : "fwls";
            out["intercept"] = mean.intercept();
            out["coef"] = jsonutil::matrix_to_json(mean.coef());
            break;
        case regression::MeanKind::knn:
            out["kind"] = "knn";
            out["k"] = mean.k();
            out["train_x"] = jsonutil::matrix_to_json(mean.train_x());
            out["train_y"] = jsonutil::matrix_to_json(mean.train_y());
            break;
    }
    return out;
}

json cov_to_json(const regression::CovEstimator& cov) {
    json out;
    switch (cov.kind()) {
        case regression::CovKind::parametric_log_linear:
            out["kind"] = "parametric_log_linear";
            out["intercept"] = cov.intercept();
            out["slope"] = jsonutil::matrix_to_json(cov.slope());
            out["scale"] = cov.scale();
            out["delta_min"] = cov.delta_min();
            break;
        case regression::CovKind::knn_diag:
            out["kind"] = "knn_diag";
            out["k"] = cov.k();
            out["delta_min"] = cov.delta_min();
            out["train_x"] = jsonutil::matrix_to_json(cov.train_x());
            out["train_sq_res"] = jsonutil::matrix_to_json(cov.train_sq_res());
            break;
    }
    return out;
}

regression::MeanEstimator mean_from_json(const json& obj) {
    const std::string where = "model.mean";
    const std::string kind = jsonutil::get_string(jsonutil::require_key(obj, "kind", where), where);
    if (kind == "ols" || kind == "fwls") {
        jsonutil::check_keys(obj, {"kind", "intercept", "coef"}, where);
        return regression::MeanEstimator::linear(
            kind == "ols" ? regression::MeanKind::ols : regression::MeanKind::fwls,
            jsonutil::get_vec(jsonutil::require_key(obj, "intercept", where), where + ".intercept"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "coef", where), where + ".coef"));
    }
    if (kind == "knn") {
        jsonutil::check_keys(obj, {"kind", "k", "train_x", "train_y"}, where);
        return regression::MeanEstimator::knn(
            jsonutil::get_size(jsonutil::require_key(obj, "k", where), where + ".k"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "train_x", where), where + ".train_x"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "train_y", where), where + ".train_y"));
    }
    jsonutil::fail(where, "unknown kind '" + kind + "'");
}

regression::CovEstimator cov_from_json(const json& obj) {
    const std::string where = "model.cov";
    const std::string kind = jsonutil::get_string(jsonutil::require_key(obj, "kind", where), where);
    if (kind == "parametric_log_linear") {
        jsonutil::check_keys(obj, {"kind", "intercept", "slope", "scale", "delta_min"}, where);
        return regression::CovEstimator::parametric(
            jsonutil::get_vec(jsonutil::require_key(obj, "intercept", where), where + ".intercept"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "slope", where), where + ".slope"),
            jsonutil::get_vec(jsonutil::require_key(obj, "scale", where), where + ".scale"),
            jsonutil::get_vec(jsonutil::require_key(obj, "delta_min", where), where + ".delta_min"));
    }
    if (kind == "knn_diag") {
        jsonutil::check_keys(obj, {"kind", "k", "delta_min", "train_x", "train_sq_res"}, where);
        return regression::CovEstimator::knn(
            jsonutil::get_size(jsonutil::require_key(obj, "k", where), where + ".k"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "train_x", where), where + ".train_x"),
            jsonutil::get_matrix(jsonutil::require_key(obj, "train_sq_res", where),
                                 where + ".train_sq_res"),
            jsonutil::get_vec(jsonutil::require_key(obj, "delta_min", where), where + ".delta_min"));
    }
    jsonutil::fail(where, "unknown kind '" + kind + "'");
}

} // namespace

std::string model_pair_to_json(const regression::ModelPair& models) {
    json out;
    out["mean"] = mean_to_json(models.mean);
    out["cov"] = cov_to_json(models.cov);
    return out.dump(2);
}

regression::ModelPair model_pair_from_json(const std::string& text) {
    const json doc = jsonutil::parse_or_throw(text, "model");
    jsonutil::check_keys(doc, {"mean", "cov"}, "model");
    return regression::ModelPair{
        mean_from_json(jsonutil::require_key(doc, "mean", "model")),
        cov_from_json(jsonutil::require_key(doc, "cov", "model")),
    };
}

void save_model_pair(const regression::ModelPair& models, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << model_pair_to_json(models) << '\n';
    if (!out.flush()) throw DataError("write failed for '" + path + "'");
}

regression::ModelPair load_model_pair(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_pair_from_json(buf.str());
}

datagen::TruthSpec truth_spec_from_json(const std::string& text) {
    const json doc = jsonutil::parse_or_throw(text, "truth");
    jsonutil::check_keys(doc, {"mean", "variance", "errors", "covariates"}, "truth");

    const json& mean_obj = jsonutil::require_key(doc, "mean", "truth");
    jsonutil::check_keys(mean_obj, {"intercept", "coef"}, "truth.mean");
    datagen::LinearMeanModel mean{
        jsonutil::get_vec(jsonutil::require_key(mean_obj, "intercept", "truth.mean"),
                          "truth.mean.intercept"),
        jsonutil::get_matrix(jsonutil::require_key(mean_obj, "coef", "truth.mean"),
                             "truth.mean.coef"),
    };

    const json& var_obj = jsonutil::require_key(doc, "variance", "truth");
    const std::string var_kind =
        jsonutil::get_string(jsonutil::require_key(var_obj, "kind", "truth.variance"),
                             "truth.variance.kind");
    datagen::VarianceModel variance;
    if (var_kind == "constant") {
        jsonutil::check_keys(var_obj, {"kind", "values"}, "truth.variance");
        variance.kind = datagen::VarianceKind::constant;
        variance.values = jsonutil::get_vec(
            jsonutil::require_key(var_obj, "values", "truth.variance"), "truth.variance.values");
    } else if (var_kind == "linear_scale" || var_kind == "log_linear" || var_kind == "log_log") {
        jsonutil::check_keys(var_obj, {"kind", "sigma", "theta"}, "truth.variance");
        variance.kind = var_kind == "linear_scale" ? datagen::VarianceKind::linear_scale
                        : var_kind == "log_linear" ? datagen::VarianceKind::log_linear
                                                   : datagen::VarianceKind::log_log;
        variance.sigma = jsonutil::get_vec(
            jsonutil::require_key(var_obj, "sigma", "truth.variance"), "truth.variance.sigma");
        variance.theta = jsonutil::get_matrix(
            jsonutil::require_key(var_obj, "theta", "truth.variance"), "truth.variance.theta");
    } else {
        jsonutil::fail("truth.variance", "unknown kind '" + var_kind + "'");
    }

    datagen::ErrorModel errors;
    if (const auto it = doc.find("errors"); it != doc.end() && !it->is_null()) {
        jsonutil::check_keys(*it, {"kind", "dof"}, "truth.errors");
        const std::string err_kind = jsonutil::get_string(
            jsonutil::require_key(*it, "kind", "truth.errors"), "truth.errors.kind");
        if (err_kind == "standard_normal") {
            errors.kind = datagen::ErrorDist::standard_normal;
        } else if (err_kind == "uniform") {
            errors.kind = datagen::ErrorDist::uniform;
        } else if (err_kind == "scaled_student_t") {
            errors.kind = datagen::ErrorDist::scaled_student_t;
        } else {
            jsonutil::fail("truth.errors", "unknown kind '" + err_kind + "'");
        }
        if (const auto dof = it->find("dof"); dof != it->end() && !dof->is_null()) {
            if (errors.kind != datagen::ErrorDist::scaled_student_t)
                jsonutil::fail("truth.errors", "dof only applies to scaled_student_t");
            errors.dof = jsonutil::get_double(*dof, "truth.errors.dof");
        }
    }

    const json& cov_obj = jsonutil::require_key(doc, "covariates", "truth");
    const std::string cov_kind =
        jsonutil::get_string(jsonutil::require_key(cov_obj, "kind", "truth.covariates"),
                             "truth.covariates.kind");
    datagen::CovariateModel covariates;
    if (cov_kind == "uniform_box") {
        jsonutil::check_keys(cov_obj, {"kind", "lower", "upper"}, "truth.covariates");
        covariates.kind = datagen::CovariateDist::uniform_box;
        covariates.lower =
            jsonutil::get_vec(jsonutil::require_key(cov_obj, "lower", "truth.covariates"),
                              "truth.covariates.lower");
        covariates.upper =
            jsonutil::get_vec(jsonutil::require_key(cov_obj, "upper", "truth.covariates"),
                              "truth.covariates.upper");
    } else if (cov_kind == "standard_normal") {
        jsonutil::check_keys(cov_obj, {"kind"}, "truth.covariates");
        covariates.kind = datagen::CovariateDist::standard_normal;
    } else {
        jsonutil::fail("truth.covariates", "unknown kind '" + cov_kind + "'");
    }

    return datagen::TruthSpec(std::move(mean), std::move(variance), errors, std::move(covariates));
}

namespace {

residuals::SupportBox support_from_json(const json& obj, std::size_t dim,
                                        const std::string& where) {
    if (obj.is_null()) return residuals::SupportBox::unbounded(dim);
    jsonutil::check_keys(obj, {"lower", "upper"}, where);
    residuals::SupportBox box = residuals::SupportBox::unbounded(dim);
    const auto read_side = [&](const char* key, bool lower_side, std::vector<double>& dst) {
        const auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) return;
        if (!it->is_array() || it->size() != dim)
            jsonutil::fail(where + "." + key, "expected an array of length " + std::to_string(dim));
        for (std::size_t j = 0; j < dim; ++j)
            dst[j] = jsonutil::get_bound((*it)[j], lower_side, where + "." + key);
    };
    read_side("lower", true, box.lower);
    read_side("upper", false, box.upper);
    residuals::validate(box);
    return box;
}

} // namespace

std::pair<stochprog::Problem, residuals::SupportBox> problem_from_json(const std::string& text) {
    const json doc = jsonutil::parse_or_throw(text, "problem");
    const std::string kind =
        jsonutil::get_string(jsonutil::require_key(doc, "kind", "problem"), "problem.kind");

    if (kind == "newsvendor") {
        jsonutil::check_keys(doc, {"kind", "holding", "backorder", "z_lo", "z_hi", "support"},
                             "problem");
        stochprog::NewsvendorProblem p{
            jsonutil::get_vec(jsonutil::require_key(doc, "holding", "problem"), "problem.holding"),
            jsonutil::get_vec(jsonutil::require_key(doc, "backorder", "problem"),
                              "problem.backorder"),
            jsonutil::get_vec(jsonutil::require_key(doc, "z_lo", "problem"), "problem.z_lo"),
            jsonutil::get_vec(jsonutil::require_key(doc, "z_hi", "problem"), "problem.z_hi"),
        };
        stochprog::validate(p);
        residuals::SupportBox box = support_from_json(
            doc.contains("support") ? doc["support"] : json(nullptr), p.dim(), "problem.support");
        return {stochprog::Problem(std::move(p)), std::move(box)};
    }

    if (kind == "two_stage_lp") {
        jsonutil::check_keys(doc,
                             {"kind", "first_cost", "ineq_matrix", "ineq_rhs", "recourse_cost",
                              "recourse_matrix", "technology_matrix", "rhs_matrix", "rhs_shift",
                              "support"},
                             "problem");
        const auto vec = [&](const char* key) {
            return jsonutil::get_vec(jsonutil::require_key(doc, key, "problem"),
                                     std::string("problem.") + key);
        };
        const auto mat = [&](const char* key) {
            return jsonutil::get_matrix(jsonutil::require_key(doc, key, "problem"),
                                        std::string("problem.") + key);
        };
        stochprog::TwoStageLP p = stochprog::make_two_stage_lp(
            vec("first_cost"), mat("ineq_matrix"), vec("ineq_rhs"), vec("recourse_cost"),
            mat("recourse_matrix"), mat("technology_matrix"), mat("rhs_matrix"), vec("rhs_shift"));
        residuals::SupportBox box =
            support_from_json(doc.contains("support") ? doc["support"] : json(nullptr),
                              p.outcome_dim(), "problem.support");
        return {stochprog::Problem(std::move(p)), std::move(box)};
    }

    jsonutil::fail("problem", "unknown kind '" + kind + "'");
}

} // namespace ersaa::serialize
