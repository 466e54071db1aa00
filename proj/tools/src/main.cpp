// ersaa: scenario generation and decision solving for contextual stochastic
// programs, with a Monte Carlo experiment harness.
//
// Exit codes: 0 success, 1 configuration, 2 data, 3 bound audit, 4 solver.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ersaa/config.hpp"
#include "ersaa/datagen.hpp"
#include "ersaa/dro.hpp"
#include "ersaa/errors.hpp"
#include "ersaa/harness.hpp"
#include "ersaa/regression.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/serialize.hpp"
#include "ersaa/stochprog.hpp"

namespace {

using namespace ersaa;

int exit_code_for(const Error& e) {
    if (dynamic_cast<const BoundViolationError*>(&e)) return 3;
    if (dynamic_cast<const DataError*>(&e)) return 2;
    if (dynamic_cast<const SaaInfeasibleError*>(&e) || dynamic_cast<const SaaUnboundedError*>(&e) ||
        dynamic_cast<const RecourseInfeasibleError*>(&e) ||
        dynamic_cast<const NumericalBreakdownError*>(&e) ||
        dynamic_cast<const RankDeficientError*>(&e) ||
        dynamic_cast<const DegenerateResidualsError*>(&e))
        return 4;
    return 1; // ConfigError, InvalidSpecError, DomainError, and the rest
}

std::string fmt(double v, const char* spec = "%.17g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

/// data.csv -> data_truth.csv, keeping the directory part intact.
std::string truth_sidecar_path(const std::string& path) {
    const auto dot = path.rfind('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + "_truth";
    return path.substr(0, dot) + "_truth" + path.substr(dot);
}

double parse_dro_radius(const std::string& raw) {
    const std::string prefix = "rho=";
    if (raw.rfind(prefix, 0) != 0) throw ConfigError("--dro expects rho=<radius>");
    const std::string num = raw.substr(prefix.size());
    char* end = nullptr;
    const double radius = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || !std::isfinite(radius) || radius < 0.0)
        throw ConfigError("--dro radius must be a nonnegative number, got '" + num + "'");
    return radius;
}

struct GenerateArgs {
    std::string config_path;
};

int run_generate(const GenerateArgs& args) {
    const config::CliConfig cli = config::load_config(args.config_path);
    if (!cli.truth) throw ConfigError("generate requires a 'truth' section");
    if (!cli.generate) throw ConfigError("generate requires a 'generate' section");

    const datagen::Dataset data = datagen::sample(*cli.truth, cli.generate->n, cli.generate->seed);
    datagen::write_dataset_csv(data, cli.generate->output);
    const std::string sidecar = truth_sidecar_path(cli.generate->output);
    datagen::write_truth_csv(data, sidecar);

    std::cout << "generated " << data.size() << " rows (d_x=" << cli.truth->dim_x()
              << ", d_y=" << cli.truth->dim_y() << ", seed=" << cli.generate->seed << ")\n"
              << "data  -> " << cli.generate->output << "\n"
              << "truth -> " << sidecar << "\n";
    return 0;
}

struct FitArgs {
    std::string config_path;
    std::string data_path;
    std::string out_path;
};

int run_fit(const FitArgs& args) {
    config::CliConfig cli;
    if (!args.config_path.empty()) cli = config::load_config(args.config_path);
    const datagen::Dataset data = datagen::read_dataset_csv(args.data_path);
    const regression::ModelPair models =
        regression::fit_models(data, cli.estimators.mean_kind, cli.estimators.cov_kind,
                               cli.estimators.mean_k, cli.estimators.cov_k);
    serialize::save_model_pair(models, args.out_path);
    std::cout << "fitted on " << data.size() << " rows\nmodel -> " << args.out_path << "\n";
    return 0;
}

struct SolveArgs {
    std::string config_path;
    std::string data_path;
    std::string model_path;
    std::string dro_raw;
    std::string format = "csv";
    std::string out_path;
};

void write_solution(const SolveArgs& args, const std::vector<double>& z, double value,
                    std::size_t scenario_count, std::optional<double> radius) {
    std::string text;
    if (args.format == "json") {
        nlohmann::json doc;
        doc["z"] = z;
        doc["value"] = value;
        doc["scenarios"] = scenario_count;
        if (radius) doc["dro_radius"] = *radius;
        text = doc.dump(2) + "\n";
    } else {
        std::string header, row;
        for (std::size_t j = 0; j < z.size(); ++j) {
            header += "z" + std::to_string(j + 1) + ",";
            row += fmt(z[j]) + ",";
        }
        text = header + "value\n" + row + fmt(value) + "\n";
    }
    if (args.out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(args.out_path);
        if (!out) throw DataError("cannot open '" + args.out_path + "' for writing");
        out << text;
        if (!out.flush()) throw DataError("write failed for '" + args.out_path + "'");
    }
}

int run_solve(const SolveArgs& args) {
    if (args.format != "csv" && args.format != "json")
        throw ConfigError("--format must be csv or json");
    const config::CliConfig cli = config::load_config(args.config_path);
    if (!cli.problem || !cli.support) throw ConfigError("solve requires a 'problem' section");
    if (cli.query_x.empty()) throw ConfigError("solve requires 'query_x'");

    std::optional<double> radius;
    if (!args.dro_raw.empty()) radius = parse_dro_radius(args.dro_raw);
    if (!radius) radius = cli.dro_radius;

    const datagen::Dataset data = datagen::read_dataset_csv(args.data_path);
    const regression::ModelPair models =
        args.model_path.empty()
            ? regression::fit_models(data, cli.estimators.mean_kind, cli.estimators.cov_kind,
                                     cli.estimators.mean_k, cli.estimators.cov_k)
            : serialize::load_model_pair(args.model_path);

    const linalg::Matrix eps = residuals::standardized_residuals(data, models);
    const residuals::ScenarioSet scenarios =
        residuals::build_er_scenarios(models, eps, cli.query_x, *cli.support);

    if (radius) {
        const auto* nv = std::get_if<stochprog::NewsvendorProblem>(&*cli.problem);
        if (!nv)
            throw ConfigError("distributionally robust solve supports only newsvendor problems");
        const dro::DroSolution sol =
            dro::solve_dro_newsvendor(*nv, dro::make_ambiguity_set(scenarios, *radius));
        write_solution(args, sol.z, sol.value, scenarios.size(), radius);
    } else {
        const stochprog::SaaSolution sol = stochprog::solve_saa(*cli.problem, scenarios);
        write_solution(args, sol.z, sol.value, scenarios.size(), std::nullopt);
    }
    return 0;
}

struct ExperimentArgs {
    std::string config_path;
    std::size_t threads = 0;
    bool corrupt_bound_fixture = false;
};

int run_experiment_cmd(const ExperimentArgs& args) {
    const config::CliConfig cli = config::load_config(args.config_path);
    const harness::ExperimentConfig config = config::make_experiment_config(cli);
    const std::string& prefix = cli.experiment->output_prefix;

    harness::ExperimentReport report = harness::run_experiment(config, args.threads);

    if (args.corrupt_bound_fixture) {
        for (harness::ReplicationRow& row : report.rows) {
            if (row.ok()) {
                row.bound6_slack -= 1.0;
                break;
            }
        }
    }

    std::size_t failures = 0;
    for (const harness::ReplicationRow& row : report.rows)
        if (!row.ok()) ++failures;

    const harness::AuditResult audit = harness::audit_bounds(report); // throws -> exit 3

    harness::write_rows_csv(report, prefix + "_rows.csv");
    harness::write_aggregates_csv(report, prefix + "_aggregates.csv");
    harness::write_slopes_csv(report, prefix + "_slopes.csv");

    std::cout << "experiment: " << config.n_grid.size() << " grid points x "
              << config.replications << " replications, " << failures << " failed rows\n";
    std::cout << "oracle value " << fmt(report.v_true, "%.10g") << " (se "
              << fmt(report.v_true_se, "%.3g") << ", m=" << config.m_oracle << ")\n";
    if (report.has_analytic) {
        std::cout << "analytic optimum (";
        for (std::size_t j = 0; j < report.analytic_z.size(); ++j)
            std::cout << (j ? ", " : "") << fmt(report.analytic_z[j], "%.10g");
        std::cout << ")\n";
    }
    for (const char* metric : {"mean_dev", "rms_dev", "abs_gap", "dist_to_opt"}) {
        try {
            const harness::RateFit rate = harness::estimate_rate(report, metric);
            std::cout << "slope " << metric << " " << fmt(rate.slope, "%.4f") << " (se "
                      << fmt(rate.std_error, "%.4f") << ", points=" << rate.points << ")\n";
        } catch (const InsufficientDataError&) {
            std::cout << "slope " << metric << " skipped (insufficient data)\n";
        }
    }
    std::cout << "audit: " << audit.rows_checked << " rows, worst slack "
              << fmt(audit.worst_slack, "%.3g") << " (" << audit.worst_kind
              << ", n=" << audit.worst_n << ", rep=" << audit.worst_rep << ")\n";
    if (!config.tail_thresholds.empty()) {
        try {
            const std::vector<harness::TailCell> cells =
                harness::estimate_tails(report, config.tail_thresholds);
            for (const harness::TailCell& cell : cells) {
                std::cout << "tail kappa=" << fmt(cell.kappa, "%.6g") << " n=" << cell.n << " "
                          << cell.exceed << "/" << cell.total << " freq "
                          << fmt(cell.freq, "%.4f") << " wilson [" << fmt(cell.wilson_lo, "%.4f")
                          << ", " << fmt(cell.wilson_hi, "%.4f") << "]\n";
            }
        } catch (const InsufficientDataError& e) {
            std::cout << "tails skipped (" << e.what() << ")\n";
        }
    }
    std::cout << "rows       -> " << prefix << "_rows.csv\n"
              << "aggregates -> " << prefix << "_aggregates.csv\n"
              << "slopes     -> " << prefix << "_slopes.csv\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"residuals-based scenario generation for contextual stochastic programs"};
    app.require_subcommand(1);

    GenerateArgs gen_args;
    CLI::App* gen = app.add_subcommand("generate", "sample a dataset from a ground-truth model");
    gen->add_option("--config", gen_args.config_path, "JSON configuration file")->required();

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand("fit", "fit mean and scale models to a dataset");
    fit->add_option("--config", fit_args.config_path, "JSON configuration file");
    fit->add_option("--data", fit_args.data_path, "input dataset CSV")->required();
    fit->add_option("--out", fit_args.out_path, "output model JSON path")->required();

    SolveArgs solve_args;
    CLI::App* solve = app.add_subcommand("solve", "solve the decision problem at query_x");
    solve->add_option("--config", solve_args.config_path, "JSON configuration file")->required();
    solve->add_option("--data", solve_args.data_path, "input dataset CSV")->required();
    solve->add_option("--model", solve_args.model_path, "fitted model JSON (skips fitting)");
    solve->add_option("--dro", solve_args.dro_raw, "robust solve over a rho=<radius> ball");
    solve->add_option("--format", solve_args.format, "output format: csv or json");
    solve->add_option("--out", solve_args.out_path, "output path (default stdout)");

    ExperimentArgs exp_args;
    CLI::App* exp = app.add_subcommand("experiment", "run the Monte Carlo study");
    exp->add_option("--config", exp_args.config_path, "JSON configuration file")->required();
    exp->add_option("--threads", exp_args.threads, "worker threads (0 = hardware)");
    exp->add_flag("--corrupt-bound-fixture", exp_args.corrupt_bound_fixture)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) return run_generate(gen_args);
        if (fit->parsed()) return run_fit(fit_args);
        if (solve->parsed()) return run_solve(solve_args);
        if (exp->parsed()) return run_experiment_cmd(exp_args);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
