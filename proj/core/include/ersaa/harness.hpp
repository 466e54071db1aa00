#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/regression.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/stochprog.hpp"

namespace ersaa::harness {

struct EstimatorSpec {
    regression::MeanKind mean_kind = regression::MeanKind::ols;
    std::size_t mean_k = 0; // 0 picks the default neighborhood size
    regression::CovKind cov_kind = regression::CovKind::parametric_log_linear;
    std::size_t cov_k = 0;
};

/// Everything one Monte Carlo study needs. Replication (n, rep) always
/// draws from the seed derived from (base_seed, n, rep), so results do not
/// depend on scheduling or thread count.
struct ExperimentConfig {
    datagen::TruthSpec truth;
    stochprog::Problem problem;
    residuals::SupportBox support;
    EstimatorSpec estimators;
    std::vector<double> query_x;
    std::vector<std::size_t> n_grid;
    std::size_t replications = 0;
    std::uint64_t base_seed = 1;
    std::size_t m_oracle = 100000;
    std::uint64_t oracle_seed = 0x0eac1eULL;
    std::vector<double> tail_thresholds;

    /// Test hook: skip fitting and use these models in every replication.
    std::optional<regression::ModelPair> forced_models;

    ExperimentConfig(datagen::TruthSpec t, stochprog::Problem p, residuals::SupportBox s)
        : truth(std::move(t)), problem(std::move(p)), support(std::move(s)) {}
};

void validate(const ExperimentConfig& config);

/// One row of the replication table. Metric fields are NaN when the
/// replication failed (status != "ok").
struct ReplicationRow {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::string status = "ok";
    double mean_dev = 0.0;
    double rms_dev = 0.0;
    double bound6_slack = 0.0;
    double bound7_slack = 0.0;
    double v_er = 0.0;      // scenario-approximation value from fitted models
    double v_fi = 0.0;      // value from the true-error scenario set
    double v_true = 0.0;    // oracle optimal value at the query point
    double abs_gap = 0.0;   // |v_er - v_true|
    double g_at_zhat = 0.0; // true expected cost of the fitted decision
    double dist_to_opt = 0.0; // distance to the analytic optimum, if known
    std::uint64_t seed = 0;

    double lemma_slack = 0.0; // audited in memory, not part of the CSV schema

    bool ok() const { return status == "ok"; }
};

/// Oracle quantities computed once per experiment and shared by rows.
struct Oracle {
    stochprog::OracleValue value;      // plug-in optimal value and decision
    residuals::ScenarioSet scenarios;  // the draws behind it, reused for g
    std::vector<double> analytic_z;    // closed-form optimum when available
    bool has_analytic = false;
};

Oracle compute_oracle(const ExperimentConfig& config);

struct ExperimentReport {
    std::vector<ReplicationRow> rows; // ordered by (n, rep)
    double v_true = 0.0;
    double v_true_se = 0.0;
    std::vector<double> z_true;
    std::vector<double> analytic_z;
    bool has_analytic = false;
};

ReplicationRow run_replication(const ExperimentConfig& config, std::size_t n, std::size_t rep,
                               const Oracle& oracle);

/// Runs the full grid. threads = 0 uses the hardware concurrency. Output
/// is identical for every thread count.
ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t threads = 0);

struct RateFit {
    double slope = 0.0;
    double std_error = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log(mean metric over replications) against log n.
/// Metrics: mean_dev, rms_dev, abs_gap, dist_to_opt, subopt. Needs at least
/// four usable grid points and ten successful replications per point.
RateFit estimate_rate(const ExperimentReport& report, std::string_view metric);

struct TailCell {
    std::size_t n = 0;
    double kappa = 0.0;
    std::size_t exceed = 0;
    std::size_t total = 0;
    double freq = 0.0;
    double wilson_lo = 0.0;
    double wilson_hi = 0.0;
};

/// Exceedance frequencies of mean_dev with Wilson 95% intervals. Needs at
/// least 100 successful replications per grid point.
std::vector<TailCell> estimate_tails(const ExperimentReport& report,
                                     std::span<const double> kappas);

struct AuditResult {
    double worst_slack = 0.0;
    std::string worst_kind;
    std::size_t worst_n = 0;
    std::size_t worst_rep = 0;
    std::size_t rows_checked = 0;
};

/// Asserts every certified-bound slack in the report is above -1e-9.
/// Throws BoundViolationError naming the offending row.
AuditResult audit_bounds(const ExperimentReport& report);

void write_rows_csv(const ExperimentReport& report, const std::string& path);
void write_aggregates_csv(const ExperimentReport& report, const std::string& path);
void write_slopes_csv(const ExperimentReport& report, const std::string& path);

} // namespace ersaa::harness
