#include "ersaa/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include "ersaa/errors.hpp"
#include "ersaa/rng.hpp"
#include "ersaa/stats.hpp"

namespace ersaa::harness {

namespace {

constexpr double kAuditSlack = -1e-9;
const double kNan = std::numeric_limits<double>::quiet_NaN();

std::string failure_slug(const Error& e) {
    if (dynamic_cast<const DegenerateResidualsError*>(&e)) return "degenerate_residuals";
    if (dynamic_cast<const RankDeficientError*>(&e)) return "rank_deficient";
    if (dynamic_cast<const SaaInfeasibleError*>(&e)) return "saa_infeasible";
    if (dynamic_cast<const SaaUnboundedError*>(&e)) return "saa_unbounded";
    if (dynamic_cast<const RecourseInfeasibleError*>(&e)) return "recourse_infeasible";
    if (dynamic_cast<const NumericalBreakdownError*>(&e)) return "numerical_breakdown";
    if (dynamic_cast<const InsufficientDataError*>(&e)) return "insufficient_data";
    return "error";
}

double metric_value(const ReplicationRow& row, std::string_view metric) {
    if (metric == "mean_dev") return row.mean_dev;
    if (metric == "rms_dev") return row.rms_dev;
    if (metric == "abs_gap") return row.abs_gap;
    if (metric == "dist_to_opt") return row.dist_to_opt;
    if (metric == "subopt") return row.g_at_zhat - row.v_true;
    throw InvalidSpecError("unknown metric: " + std::string(metric));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void validate(const ExperimentConfig& config) {
    if (config.query_x.size() != config.truth.dim_x())
        throw InvalidSpecError("experiment: query point dimension mismatch");
    if (stochprog::outcome_dim(config.problem) != config.truth.dim_y())
        throw InvalidSpecError("experiment: problem outcome dimension mismatch");
    if (config.support.dim() != config.truth.dim_y())
        throw InvalidSpecError("experiment: support box dimension mismatch");
    if (config.n_grid.empty()) throw InvalidSpecError("experiment: empty sample-size grid");
    for (std::size_t i = 0; i + 1 < config.n_grid.size(); ++i)
        if (config.n_grid[i] >= config.n_grid[i + 1])
            throw InvalidSpecError("experiment: sample-size grid must increase strictly");
    if (config.n_grid.front() == 0) throw InvalidSpecError("experiment: n must be positive");
    if (config.replications == 0)
        throw InvalidSpecError("experiment: need at least one replication");
    if (config.m_oracle < 2) throw InvalidSpecError("experiment: oracle draw count too small");
    residuals::validate(config.support);
}

Oracle compute_oracle(const ExperimentConfig& config) {
    Oracle oracle;
    const linalg::Matrix errors =
        datagen::sample_errors(config.truth, config.m_oracle, config.oracle_seed);
    oracle.scenarios = residuals::build_fi_scenarios(config.truth, errors, config.query_x);

    const stochprog::SaaSolution sol = stochprog::solve_saa(config.problem, oracle.scenarios);
    oracle.value.value = sol.value;
    oracle.value.z = sol.z;

    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < oracle.scenarios.size(); ++i) {
        const double c =
            stochprog::scenario_cost(config.problem, sol.z, oracle.scenarios.points.row(i));
        const double delta = c - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (c - mean);
    }
    const double m = static_cast<double>(oracle.scenarios.size());
    oracle.value.std_error = std::sqrt(m2 / (m - 1.0) / m);

    if (const auto* nv = std::get_if<stochprog::NewsvendorProblem>(&config.problem)) {
        oracle.analytic_z = stochprog::newsvendor_true_optimum(*nv, config.truth, config.query_x);
        oracle.has_analytic = true;
    }
    return oracle;
}

ReplicationRow run_replication(const ExperimentConfig& config, std::size_t n, std::size_t rep,
                               const Oracle& oracle) {
    ReplicationRow row;
    row.n = n;
    row.rep = rep;
    row.seed = rng::derive_seed(config.base_seed, {n, rep});
    row.v_true = oracle.value.value;
    row.mean_dev = row.rms_dev = row.bound6_slack = row.bound7_slack = kNan;
    row.v_er = row.v_fi = row.abs_gap = row.g_at_zhat = row.dist_to_opt = kNan;
    row.lemma_slack = kNan;

    try {
        const datagen::Dataset data = datagen::sample(config.truth, n, row.seed);
        const regression::ModelPair models =
            config.forced_models
                ? *config.forced_models
                : regression::fit_models(data, config.estimators.mean_kind,
                                         config.estimators.cov_kind, config.estimators.mean_k,
                                         config.estimators.cov_k);

        const linalg::Matrix eps_hat = residuals::standardized_residuals(data, models);
        const residuals::ScenarioSet er =
            residuals::build_er_scenarios(models, eps_hat, config.query_x, config.support);
        const residuals::ScenarioSet fi =
            residuals::build_fi_scenarios(config.truth, data.truth->errors, config.query_x);

        const stochprog::SaaSolution sol_er = stochprog::solve_saa(config.problem, er);
        const stochprog::SaaSolution sol_fi = stochprog::solve_saa(config.problem, fi);

        const residuals::DeviationReport dev =
            residuals::deviation_report(models, data, config.truth, config.query_x);

        row.mean_dev = dev.mean_dev;
        row.rms_dev = dev.rms_dev;
        row.bound6_slack = dev.bound6_slack();
        row.bound7_slack = dev.bound7_slack();
        row.lemma_slack = dev.lemma_slack();
        row.v_er = sol_er.value;
        row.v_fi = sol_fi.value;
        row.abs_gap = std::fabs(sol_er.value - oracle.value.value);
        row.g_at_zhat = stochprog::evaluate_cost(config.problem, sol_er.z, oracle.scenarios);
        row.dist_to_opt = kNan;
        if (oracle.has_analytic) {
            double s = 0.0;
            for (std::size_t j = 0; j < sol_er.z.size(); ++j) {
                const double d = sol_er.z[j] - oracle.analytic_z[j];
                s += d * d;
            }
            row.dist_to_opt = std::sqrt(s);
        }
    } catch (const Error& e) {
        row.status = failure_slug(e);
    } catch (const std::exception&) {
        row.status = "error";
    }
    return row;
}

ExperimentReport run_experiment(const ExperimentConfig& config, std::size_t threads) {
    validate(config);
    const Oracle oracle = compute_oracle(config);

    ExperimentReport report;
    report.v_true = oracle.value.value;
    report.v_true_se = oracle.value.std_error;
    report.z_true = oracle.value.z;
    report.analytic_z = oracle.analytic_z;
    report.has_analytic = oracle.has_analytic;

    const std::size_t total = config.n_grid.size() * config.replications;
    report.rows.resize(total);

    if (threads == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        threads = hw ? hw : 1;
    }
    threads = std::min<std::size_t>(threads, total);

    // Rows land at fixed indices, so scheduling cannot change the output.
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t t = next.fetch_add(1);
            if (t >= total) return;
            const std::size_t n = config.n_grid[t / config.replications];
            const std::size_t rep = t % config.replications;
            report.rows[t] = run_replication(config, n, rep, oracle);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }
    return report;
}

namespace {

struct GroupStat {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double v) {
        ++count;
        const double d = v - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (v - mean);
    }
    double stderr_of_mean() const {
        if (count < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(count - 1) /
                         static_cast<double>(count));
    }
};

std::map<std::size_t, GroupStat> group_metric(const ExperimentReport& report,
                                              std::string_view metric) {
    std::map<std::size_t, GroupStat> groups;
    for (const ReplicationRow& row : report.rows) {
        if (!row.ok()) continue;
        const double v = metric_value(row, metric);
        if (std::isnan(v)) continue;
        groups[row.n].add(v);
    }
    return groups;
}

} // namespace

RateFit estimate_rate(const ExperimentReport& report, std::string_view metric) {
    const std::map<std::size_t, GroupStat> groups = group_metric(report, metric);

    std::vector<std::pair<double, double>> pts; // (log n, log mean)
    for (const auto& [n, g] : groups) {
        if (g.count < 10) continue;
        if (!(g.mean > 0.0))
            throw InsufficientDataError("estimate_rate: nonpositive mean for metric " +
                                        std::string(metric));
        pts.emplace_back(std::log(static_cast<double>(n)), std::log(g.mean));
    }
    if (pts.size() < 4)
        throw InsufficientDataError(
            "estimate_rate: need at least four grid points with ten successes each");

    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : pts) {
        sx += x;
        sy += y;
    }
    const double mx = sx / pts.size(), my = sy / pts.size();
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    RateFit fit;
    fit.points = pts.size();
    fit.slope = sxy / sxx;
    double rss = 0.0;
    for (const auto& [x, y] : pts) {
        const double r = y - my - fit.slope * (x - mx);
        rss += r * r;
    }
    if (pts.size() > 2)
        fit.std_error = std::sqrt(rss / static_cast<double>(pts.size() - 2) / sxx);
    return fit;
}

std::vector<TailCell> estimate_tails(const ExperimentReport& report,
                                     std::span<const double> kappas) {
    if (kappas.empty()) throw InvalidSpecError("estimate_tails: no thresholds");

    std::map<std::size_t, std::vector<double>> by_n;
    for (const ReplicationRow& row : report.rows)
        if (row.ok()) by_n[row.n].push_back(row.mean_dev);
    for (const auto& [n, v] : by_n)
        if (v.size() < 100)
            throw InsufficientDataError("estimate_tails: needs 100 successes per grid point");

    std::vector<TailCell> cells;
    for (const double kappa : kappas) {
        for (const auto& [n, v] : by_n) {
            TailCell cell;
            cell.n = n;
            cell.kappa = kappa;
            cell.total = v.size();
            for (double d : v)
                if (d > kappa) ++cell.exceed;
            cell.freq = static_cast<double>(cell.exceed) / static_cast<double>(cell.total);
            const stats::Interval ci = stats::wilson_interval(cell.exceed, cell.total);
            cell.wilson_lo = ci.lo;
            cell.wilson_hi = ci.hi;
            cells.push_back(cell);
        }
    }
    return cells;
}

AuditResult audit_bounds(const ExperimentReport& report) {
    AuditResult out;
    out.worst_slack = std::numeric_limits<double>::infinity();
    for (const ReplicationRow& row : report.rows) {
        if (!row.ok()) continue;
        ++out.rows_checked;
        const std::pair<const char*, double> slacks[] = {
            {"bound6", row.bound6_slack},
            {"bound7", row.bound7_slack},
            {"lemma", row.lemma_slack},
        };
        for (const auto& [kind, slack] : slacks) {
            if (slack < out.worst_slack) {
                out.worst_slack = slack;
                out.worst_kind = kind;
                out.worst_n = row.n;
                out.worst_rep = row.rep;
            }
            if (!(slack >= kAuditSlack))
                throw BoundViolationError("certified bound violated: " + std::string(kind) +
                                          " slack " + format_double(slack) + " at n=" +
                                          std::to_string(row.n) + " rep=" +
                                          std::to_string(row.rep));
        }
    }
    if (out.rows_checked == 0) throw InsufficientDataError("audit_bounds: no successful rows");
    return out;
}

namespace {

void open_or_throw(std::ofstream& out, const std::string& path) {
    out.open(path);
    if (!out) throw DataError("cannot open for writing: " + path);
}

} // namespace

void write_rows_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "n,rep,status,mean_dev,rms_dev,bound6_slack,bound7_slack,"
           "v_er,v_fi,v_true,abs_gap,g_at_zhat,dist_to_opt,seed\n";
    for (const ReplicationRow& r : report.rows) {
        out << r.n << ',' << r.rep << ',' << r.status << ',' << format_double(r.mean_dev)
            << ',' << format_double(r.rms_dev) << ',' << format_double(r.bound6_slack) << ','
            << format_double(r.bound7_slack) << ',' << format_double(r.v_er) << ','
            << format_double(r.v_fi) << ',' << format_double(r.v_true) << ','
            << format_double(r.abs_gap) << ',' << format_double(r.g_at_zhat) << ','
            << format_double(r.dist_to_opt) << ',' << r.seed << '\n';
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_aggregates_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "n,metric,mean,stderr\n";
    const char* metrics[] = {"mean_dev", "rms_dev", "abs_gap", "dist_to_opt", "subopt"};
    for (const char* metric : metrics) {
        const auto groups = group_metric(report, metric);
        for (const auto& [n, g] : groups) {
            if (g.count == 0) continue;
            out << n << ',' << metric << ',' << format_double(g.mean) << ','
                << format_double(g.stderr_of_mean()) << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

void write_slopes_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out;
    open_or_throw(out, path);
    out << "metric,slope,stderr\n";
    const char* metrics[] = {"mean_dev", "rms_dev", "abs_gap", "dist_to_opt"};
    for (const char* metric : metrics) {
        try {
            const RateFit fit = estimate_rate(report, metric);
            out << metric << ',' << format_double(fit.slope) << ','
                << format_double(fit.std_error) << '\n';
        } catch (const InsufficientDataError&) {
            // metric not estimable for this run; leave it out
        }
    }
    if (!out) throw DataError("write failed: " + path);
}

} // namespace ersaa::harness
