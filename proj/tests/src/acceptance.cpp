// Monte Carlo acceptance gate. Certifies the deviation bounds, the
// consistency and rate claims, tail decay, estimator efficiency, and
// agreement between independent solver implementations. Prints one verdict
// line per criterion and exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/dro.hpp"
#include "ersaa/errors.hpp"
#include "ersaa/harness.hpp"
#include "ersaa/linalg.hpp"
#include "ersaa/regression.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/rng.hpp"
#include "ersaa/stochprog.hpp"
#include "reference_oracles.hpp"

using namespace ersaa;
using linalg::Matrix;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Gate {
    int failures = 0;

    void verdict(int id, bool ok, const std::string& what) {
        std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
};

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double sample_variance(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size() - 1);
}

double elapsed_s(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

/// Linear truth with log-linear noise scale on [0,1]^2, symmetric
/// newsvendor queried at the box center, fitted by ols + parametric scale.
harness::ExperimentConfig plane_study(std::size_t reps, std::uint64_t seed,
                                      std::size_t m_oracle) {
    Matrix coef(1, 2);
    coef(0, 0) = 1.0;
    coef(0, 1) = -0.5;
    datagen::VarianceModel variance;
    variance.kind = datagen::VarianceKind::log_linear;
    variance.sigma = {-1.0};
    variance.theta = Matrix(1, 2);
    variance.theta(0, 0) = 0.8;
    variance.theta(0, 1) = 0.6;
    datagen::CovariateModel covariates;
    covariates.lower = {0.0, 0.0};
    covariates.upper = {1.0, 1.0};
    datagen::TruthSpec truth({{1.0}, coef}, variance, {}, covariates);

    stochprog::NewsvendorProblem nv{{1.0}, {1.0}, {-10.0}, {10.0}};
    harness::ExperimentConfig config(std::move(truth), stochprog::Problem(nv),
                                     residuals::SupportBox{{-50.0}, {50.0}});
    config.query_x = {0.5, 0.5};
    config.n_grid = {100, 200, 400, 800, 1600, 3200, 6400, 12800};
    config.replications = reps;
    config.base_seed = seed;
    config.m_oracle = m_oracle;
    return config;
}

/// d_x = 4 variant fitted with nearest-neighbor models. The grid stops at
/// 3200 because every neighbor fit costs O(n^2).
harness::ExperimentConfig knn_study() {
    Matrix coef(1, 4);
    coef(0, 0) = 1.0;
    coef(0, 1) = -0.5;
    coef(0, 2) = 0.25;
    coef(0, 3) = 0.8;
    datagen::VarianceModel variance;
    variance.kind = datagen::VarianceKind::log_linear;
    variance.sigma = {-1.0};
    variance.theta = Matrix(1, 4);
    variance.theta(0, 0) = 0.4;
    variance.theta(0, 1) = 0.3;
    variance.theta(0, 2) = 0.2;
    variance.theta(0, 3) = 0.1;
    datagen::CovariateModel covariates;
    covariates.lower = {0.0, 0.0, 0.0, 0.0};
    covariates.upper = {1.0, 1.0, 1.0, 1.0};
    datagen::TruthSpec truth({{1.0}, coef}, variance, {}, covariates);

    stochprog::NewsvendorProblem nv{{1.0}, {1.0}, {-10.0}, {10.0}};
    harness::ExperimentConfig config(std::move(truth), stochprog::Problem(nv),
                                     residuals::SupportBox{{-50.0}, {50.0}});
    config.estimators.mean_kind = regression::MeanKind::knn;
    config.estimators.cov_kind = regression::CovKind::knn_diag;
    config.query_x = {0.5, 0.5, 0.5, 0.5};
    config.n_grid = {100, 200, 400, 800, 1600, 3200};
    config.replications = 30;
    config.base_seed = 3001;
    config.m_oracle = 100000;
    return config;
}

double mean_abs_gap_at(const harness::ExperimentReport& report, std::size_t n) {
    std::vector<double> gaps;
    for (const auto& row : report.rows)
        if (row.n == n && row.ok()) gaps.push_back(row.abs_gap);
    return gaps.empty() ? std::numeric_limits<double>::quiet_NaN() : mean_of(gaps);
}

struct SlackSummary {
    double bound6 = std::numeric_limits<double>::infinity();
    double bound7 = std::numeric_limits<double>::infinity();
    double lemma = std::numeric_limits<double>::infinity();
    std::size_t rows = 0;

    void add(const harness::ExperimentReport& report) {
        for (const auto& row : report.rows) {
            if (!row.ok()) continue;
            ++rows;
            bound6 = std::min(bound6, row.bound6_slack);
            bound7 = std::min(bound7, row.bound7_slack);
            lemma = std::min(lemma, row.lemma_slack);
        }
    }
};

residuals::ScenarioSet random_scenarios(rng::Stream& gen, std::size_t n, std::size_t d,
                                        double lo, double hi) {
    residuals::ScenarioSet scen;
    scen.points = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) scen.points(i, j) = gen.uniform(lo, hi);
    scen.weights.assign(n, 1.0 / static_cast<double>(n));
    return scen;
}

} // namespace

int main() {
    Gate gate;
    const auto t0 = std::chrono::steady_clock::now();
    std::printf("== synthetic studies ==\n");

    const harness::ExperimentConfig rate_config = plane_study(30, 1001, 1000000);
    const harness::ExperimentReport rate = harness::run_experiment(rate_config);
    std::printf("rate study: 8 grid points x 30 reps, v_true=%s se=%s (%.1fs)\n",
                fmt(rate.v_true).c_str(), fmt(rate.v_true_se).c_str(), elapsed_s(t0));

    const auto t1 = std::chrono::steady_clock::now();
    const harness::ExperimentConfig tail_config = plane_study(200, 2001, 100000);
    const harness::ExperimentReport tail_rep = harness::run_experiment(tail_config);
    std::printf("tail study: 8 grid points x 200 reps (%.1fs)\n", elapsed_s(t1));

    const auto t2 = std::chrono::steady_clock::now();
    const harness::ExperimentReport knn_rep = harness::run_experiment(knn_study());
    std::printf("neighbor study: 6 grid points x 30 reps at d_x=4 (%.1fs)\n", elapsed_s(t2));

    std::printf("== verdicts ==\n");

    // 1, 2: every certified bound holds on every successful replication.
    SlackSummary slacks;
    slacks.add(rate);
    slacks.add(tail_rep);
    slacks.add(knn_rep);
    bool audits_pass = true;
    std::string audit_note;
    try {
        harness::audit_bounds(rate);
        harness::audit_bounds(tail_rep);
        harness::audit_bounds(knn_rep);
    } catch (const BoundViolationError& e) {
        audits_pass = false;
        audit_note = std::string(" [") + e.what() + "]";
    }
    gate.verdict(1, audits_pass && slacks.rows >= 2000 && slacks.bound6 >= -1e-9,
                 "moment-split bound audit: " + std::to_string(slacks.rows) +
                     " rows, worst slack " + fmt(slacks.bound6) + audit_note);
    gate.verdict(2,
                 audits_pass && slacks.rows >= 2000 && slacks.bound7 >= -1e-9 &&
                     slacks.lemma >= -1e-9,
                 "uniform-inverse bound and root-mean triangle audit: worst slacks " +
                     fmt(slacks.bound7) + ", " + fmt(slacks.lemma) + audit_note);

    // 3: scenario deviation decays like n^{-1/2} for the parametric pipeline.
    const harness::RateFit dev_rate = harness::estimate_rate(rate, "mean_dev");
    gate.verdict(3, dev_rate.slope >= -0.65 && dev_rate.slope <= -0.35,
                 "mean deviation slope " + fmt(dev_rate.slope) + " +/- " +
                     fmt(dev_rate.std_error) + " in [-0.65, -0.35]");

    // 4: the approximate optimal value converges to the oracle value.
    const double gap_small = mean_abs_gap_at(rate, 100);
    const double gap_large = mean_abs_gap_at(rate, 12800);
    gate.verdict(4, gap_large < 0.25 * gap_small && rate.v_true_se < 0.05 * gap_small,
                 "value gap " + fmt(gap_small) + " -> " + fmt(gap_large) +
                     " (need < 25%), oracle se " + fmt(rate.v_true_se) + " (need < " +
                     fmt(0.05 * gap_small) + ")");

    // 5: the fitted decision approaches the analytic optimum at a root-n-ish rate.
    const harness::RateFit z_rate = harness::estimate_rate(rate, "dist_to_opt");
    gate.verdict(5, z_rate.slope >= -0.7 && z_rate.slope <= -0.3,
                 "decision distance slope " + fmt(z_rate.slope) + " +/- " +
                     fmt(z_rate.std_error) + " in [-0.7, -0.3]");

    // 6: exceedance of the small-sample median deviation dies out along the grid.
    {
        std::vector<double> dev100;
        for (const auto& row : tail_rep.rows)
            if (row.n == 100 && row.ok()) dev100.push_back(row.mean_dev);
        const double kappa = median_of(dev100);
        const std::vector<double> kappas{kappa};
        const auto cells = harness::estimate_tails(tail_rep, kappas);
        int inversions = 0;
        bool disjoint_inversion = false;
        for (std::size_t i = 1; i < cells.size(); ++i) {
            if (cells[i].freq > cells[i - 1].freq + 1e-12) {
                ++inversions;
                if (cells[i].wilson_lo > cells[i - 1].wilson_hi) disjoint_inversion = true;
            }
        }
        const bool ends_at_zero = !cells.empty() && cells.back().n == 12800 &&
                                  cells.back().freq == 0.0;
        gate.verdict(6, inversions <= 1 && !disjoint_inversion && ends_at_zero,
                     "exceedance of kappa=" + fmt(kappa) + " decreasing (" +
                         std::to_string(inversions) + " inversion(s)), final freq " +
                         fmt(cells.empty() ? 1.0 : cells.back().freq));
    }

    // 7: nearest-neighbor models converge visibly slower at d_x = 4.
    const harness::RateFit knn_rate = harness::estimate_rate(knn_rep, "mean_dev");
    gate.verdict(7, knn_rate.slope >= dev_rate.slope + 0.05,
                 "neighbor slope " + fmt(knn_rate.slope) + " vs parametric slope " +
                     fmt(dev_rate.slope) + " (needs to be shallower by 0.05)");

    // 8: the closed-form newsvendor equals its extensive-form LP encoding, and
    // the simplex solver equals brute-force vertex enumeration.
    {
        rng::Stream gen(8001);
        double worst_nv = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t d = 1 + gen.next_u64() % 3;
            const std::size_t n = 3 + gen.next_u64() % 48;
            stochprog::NewsvendorProblem nv;
            nv.holding.resize(d);
            nv.backorder.resize(d);
            nv.z_lo.assign(d, 0.0);
            nv.z_hi.resize(d);
            for (std::size_t j = 0; j < d; ++j) {
                nv.holding[j] = gen.uniform(0.2, 3.0);
                nv.backorder[j] = gen.uniform(0.2, 3.0);
                nv.z_hi[j] = gen.uniform(1.0, 4.0);
            }
            const residuals::ScenarioSet scen = random_scenarios(gen, n, d, -1.0, 5.0);
            const auto direct = stochprog::solve_saa(stochprog::Problem(nv), scen);
            const auto as_lp =
                stochprog::solve_saa(stochprog::Problem(refsolve::newsvendor_as_lp(nv)), scen);
            worst_nv = std::max(worst_nv, std::fabs(direct.value - as_lp.value));
        }

        std::mt19937_64 lp_gen(8002);
        std::uniform_real_distribution<double> entry(-2.0, 2.0);
        std::uniform_real_distribution<double> point(0.0, 2.0);
        double worst_lp = 0.0;
        for (int trial = 0; trial < 200; ++trial) {
            const std::size_t nv_ = 2 + lp_gen() % 4;
            const std::size_t m = 1 + lp_gen() % std::min<std::size_t>(3, nv_ - 1);
            linalg::LinearProgram lp;
            lp.eq_matrix = Matrix(m + 1, nv_ + 1);
            lp.eq_rhs.assign(m + 1, 0.0);
            std::vector<double> x0(nv_);
            for (auto& v : x0) v = point(lp_gen);
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < nv_; ++c) {
                    lp.eq_matrix(r, c) = entry(lp_gen);
                    lp.eq_rhs[r] += lp.eq_matrix(r, c) * x0[c];
                }
            double budget = 1.0;
            for (double v : x0) budget += v;
            for (std::size_t c = 0; c <= nv_; ++c) lp.eq_matrix(m, c) = 1.0;
            lp.eq_rhs[m] = budget;
            lp.objective.assign(nv_ + 1, 0.0);
            for (std::size_t c = 0; c < nv_; ++c) lp.objective[c] = entry(lp_gen);

            const auto ref = refsolve::best_vertex(lp);
            const auto sol = linalg::solve_lp(lp);
            if (!ref.feasible || sol.status != linalg::LpStatus::optimal) {
                worst_lp = std::numeric_limits<double>::infinity();
                break;
            }
            worst_lp = std::max(worst_lp, std::fabs(sol.value - ref.value));
        }
        gate.verdict(8, worst_nv <= 1e-7 && worst_lp <= 1e-8,
                     "solver cross-checks: newsvendor vs LP diff " + fmt(worst_nv) +
                         " (100 instances), simplex vs vertices diff " + fmt(worst_lp) +
                         " (200 LPs)");
    }

    // 9: robust layer sanity against the plain SAA and a brute-force sup.
    {
        rng::Stream gen(9001);
        double worst_zero = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 2 + gen.next_u64() % 29;
            stochprog::NewsvendorProblem nv{{gen.uniform(0.5, 2.0)},
                                            {gen.uniform(0.5, 2.0)},
                                            {-5.0},
                                            {5.0}};
            const residuals::ScenarioSet scen = random_scenarios(gen, n, 1, -2.0, 4.0);
            const auto saa = stochprog::solve_saa(stochprog::Problem(nv), scen);
            const auto robust = dro::solve_dro_newsvendor(nv, dro::make_ambiguity_set(scen, 0.0));
            worst_zero = std::max(worst_zero, std::fabs(saa.value - robust.value));
        }

        bool monotone = true;
        const std::vector<double> radii{0.0, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 2 + gen.next_u64() % 11;
            std::vector<double> costs(n);
            for (auto& c : costs) c = gen.uniform(-1.0, 5.0);
            double prev = -std::numeric_limits<double>::infinity();
            for (const double rho : radii) {
                const double value = dro::worst_case_expectation(costs, rho).value;
                if (value < prev - 1e-9) monotone = false;
                prev = value;
            }
        }

        double worst_grid = 0.0;
        for (int trial = 0; trial < 70; ++trial) {
            const std::size_t n = trial < 40 ? 2 : 3;
            std::vector<double> costs(n);
            for (auto& c : costs) c = gen.uniform(-1.0, 5.0);
            for (const double rho : {0.05, 0.3, 1.0, 2.5}) {
                const double value = dro::worst_case_expectation(costs, rho).value;
                const double ref = refsolve::grid_worst_case(costs, rho, 1e-3);
                worst_grid = std::max(worst_grid, std::fabs(value - ref));
            }
        }
        gate.verdict(9, worst_zero <= 1e-6 && monotone && worst_grid <= 2e-3,
                     "robust layer: zero-radius diff " + fmt(worst_zero) +
                         ", radius-monotone " + (monotone ? "yes" : "NO") +
                         ", brute-force sup diff " + fmt(worst_grid));
    }

    // 10: reweighted least squares is no noisier than plain least squares in
    // any coefficient under strong heteroscedasticity.
    {
        Matrix coef(1, 2);
        coef(0, 0) = 1.0;
        coef(0, 1) = -1.0;
        datagen::VarianceModel variance;
        variance.kind = datagen::VarianceKind::log_linear;
        variance.sigma = {-2.0};
        variance.theta = Matrix(1, 2);
        variance.theta(0, 0) = 3.0;
        variance.theta(0, 1) = 0.0;
        datagen::CovariateModel covariates;
        covariates.lower = {0.0, 0.0};
        covariates.upper = {1.0, 1.0};
        const datagen::TruthSpec truth({{0.5}, coef}, variance, {}, covariates);

        const std::size_t n = 300;
        std::vector<std::vector<double>> ols_coef(3), fwls_coef(3);
        for (std::size_t rep = 0; rep < 200; ++rep) {
            const datagen::Dataset data =
                datagen::sample(truth, n, rng::derive_seed(10001, {n, rep}));
            const auto ols = regression::fit_mean(data, regression::MeanKind::ols);
            const auto fwls = regression::fit_mean(data, regression::MeanKind::fwls);
            ols_coef[0].push_back(ols.intercept()[0]);
            ols_coef[1].push_back(ols.coef()(0, 0));
            ols_coef[2].push_back(ols.coef()(0, 1));
            fwls_coef[0].push_back(fwls.intercept()[0]);
            fwls_coef[1].push_back(fwls.coef()(0, 0));
            fwls_coef[2].push_back(fwls.coef()(0, 1));
        }
        bool efficient = true;
        std::string ratios;
        for (std::size_t j = 0; j < 3; ++j) {
            const double vo = sample_variance(ols_coef[j]);
            const double vf = sample_variance(fwls_coef[j]);
            if (vf > vo) efficient = false;
            ratios += (j ? ", " : "") + fmt(vf / vo);
        }
        gate.verdict(10, efficient,
                     "reweighted vs plain coefficient variance ratios: " + ratios +
                         " (200 reps, all need <= 1)");
    }

    std::printf("== done in %.1fs, %d failure(s) ==\n", elapsed_s(t0), gate.failures);
    return gate.failures == 0 ? 0 : 1;
}
