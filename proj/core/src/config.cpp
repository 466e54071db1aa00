#include "ersaa/config.hpp"

#include <fstream>
#include <sstream>

#include "ersaa/errors.hpp"
#include "ersaa/serialize.hpp"
#include "json_util.hpp"

namespace ersaa::config {

using jsonutil::json;

namespace {

harness::EstimatorSpec estimators_from_json(const json& obj) {
    const std::string where = "estimators";
    jsonutil::check_keys(obj, {"mean", "mean_k", "cov", "cov_k"}, where);
    harness::EstimatorSpec spec;
    if (const auto it = obj.find("mean"); it != obj.end() && !it->is_null()) {
        const std::string kind = jsonutil::get_string(*it, where + ".mean");
        if (kind == "ols")
            spec.mean_kind = regression::MeanKind::ols;
        else if (kind == "fwls")
            spec.mean_kind = regression::MeanKind::fwls;
        else if (kind == "knn")
            spec.mean_kind = regression::MeanKind::knn;
        else
            jsonutil::fail(where, "unknown mean kind '" + kind + "'");
    }
    if (const auto it = obj.find("cov"); it != obj.end() && !it->is_null()) {
        const std::string kind = jsonutil::get_string(*it, where + ".cov");
        if (kind == "parametric_log_linear")
            spec.cov_kind = regression::CovKind::parametric_log_linear;
        else if (kind == "knn_diag")
            spec.cov_kind = regression::CovKind::knn_diag;
        else
            jsonutil::fail(where, "unknown cov kind '" + kind + "'");
    }
    if (const auto it = obj.find("mean_k"); it != obj.end() && !it->is_null())
        spec.mean_k = jsonutil::get_size(*it, where + ".mean_k");
    if (const auto it = obj.find("cov_k"); it != obj.end() && !it->is_null())
        spec.cov_k = jsonutil::get_size(*it, where + ".cov_k");
    return spec;
}

GenerateSection generate_from_json(const json& obj) {
    const std::string where = "generate";
    jsonutil::check_keys(obj, {"n", "seed", "output"}, where);
    GenerateSection section;
    section.n = jsonutil::get_size(jsonutil::require_key(obj, "n", where), where + ".n");
    if (const auto it = obj.find("seed"); it != obj.end() && !it->is_null())
        section.seed = jsonutil::get_u64(*it, where + ".seed");
    section.output =
        jsonutil::get_string(jsonutil::require_key(obj, "output", where), where + ".output");
    if (section.n == 0) jsonutil::fail(where, "n must be positive");
    return section;
}

ExperimentSection experiment_from_json(const json& obj) {
    const std::string where = "experiment";
    jsonutil::check_keys(obj,
                         {"n_grid", "replications", "base_seed", "m_oracle", "oracle_seed",
                          "tail_thresholds", "output_prefix"},
                         where);
    ExperimentSection section;
    section.n_grid = jsonutil::get_size_vec(jsonutil::require_key(obj, "n_grid", where),
                                            where + ".n_grid");
    if (const auto it = obj.find("replications"); it != obj.end() && !it->is_null())
        section.replications = jsonutil::get_size(*it, where + ".replications");
    if (const auto it = obj.find("base_seed"); it != obj.end() && !it->is_null())
        section.base_seed = jsonutil::get_u64(*it, where + ".base_seed");
    if (const auto it = obj.find("m_oracle"); it != obj.end() && !it->is_null())
        section.m_oracle = jsonutil::get_size(*it, where + ".m_oracle");
    if (const auto it = obj.find("oracle_seed"); it != obj.end() && !it->is_null())
        section.oracle_seed = jsonutil::get_u64(*it, where + ".oracle_seed");
    if (const auto it = obj.find("tail_thresholds"); it != obj.end() && !it->is_null())
        section.tail_thresholds = jsonutil::get_vec(*it, where + ".tail_thresholds");
    section.output_prefix = jsonutil::get_string(
        jsonutil::require_key(obj, "output_prefix", where), where + ".output_prefix");
    if (section.output_prefix.empty()) jsonutil::fail(where, "output_prefix must be nonempty");
    return section;
}

} // namespace

CliConfig config_from_json(const std::string& text) {
    const json doc = jsonutil::parse_or_throw(text, "config");
    jsonutil::check_keys(
        doc, {"truth", "problem", "estimators", "query_x", "dro", "generate", "experiment"},
        "config");

    CliConfig cli;
    if (const auto it = doc.find("truth"); it != doc.end() && !it->is_null())
        cli.truth = serialize::truth_spec_from_json(it->dump());
    if (const auto it = doc.find("problem"); it != doc.end() && !it->is_null()) {
        auto [problem, support] = serialize::problem_from_json(it->dump());
        cli.problem = std::move(problem);
        cli.support = std::move(support);
    }
    if (const auto it = doc.find("estimators"); it != doc.end() && !it->is_null())
        cli.estimators = estimators_from_json(*it);
    if (const auto it = doc.find("query_x"); it != doc.end() && !it->is_null())
        cli.query_x = jsonutil::get_vec(*it, "config.query_x");
    if (const auto it = doc.find("dro"); it != doc.end() && !it->is_null()) {
        jsonutil::check_keys(*it, {"radius"}, "dro");
        cli.dro_radius =
            jsonutil::get_double(jsonutil::require_key(*it, "radius", "dro"), "dro.radius");
        if (!(*cli.dro_radius >= 0.0)) jsonutil::fail("dro", "radius must be nonnegative");
    }
    if (const auto it = doc.find("generate"); it != doc.end() && !it->is_null())
        cli.generate = generate_from_json(*it);
    if (const auto it = doc.find("experiment"); it != doc.end() && !it->is_null())
        cli.experiment = experiment_from_json(*it);
    return cli;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

harness::ExperimentConfig make_experiment_config(const CliConfig& cli) {
    if (!cli.truth) throw ConfigError("experiment requires a 'truth' section");
    if (!cli.problem || !cli.support) throw ConfigError("experiment requires a 'problem' section");
    if (!cli.experiment) throw ConfigError("experiment requires an 'experiment' section");
    if (cli.query_x.empty()) throw ConfigError("experiment requires 'query_x'");

    harness::ExperimentConfig config(*cli.truth, *cli.problem, *cli.support);
    config.estimators = cli.estimators;
    config.query_x = cli.query_x;
    config.n_grid = cli.experiment->n_grid;
    config.replications = cli.experiment->replications;
    config.base_seed = cli.experiment->base_seed;
    config.m_oracle = cli.experiment->m_oracle;
    config.oracle_seed = cli.experiment->oracle_seed;
    config.tail_thresholds = cli.experiment->tail_thresholds;
    harness::validate(config);
    return config;
}

} // namespace ersaa::config
