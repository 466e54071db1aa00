#include "ersaa/stochprog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ersaa/errors.hpp"
#include "ersaa/rng.hpp"

namespace ersaa::stochprog {

namespace {

constexpr std::size_t kExtensiveFormCap = 500;
constexpr double kQuantileSlack = 1e-9; // guards cumulative-weight roundoff

void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidSpecError(what);
}

} // namespace

void validate(const NewsvendorProblem& p) {
    const std::size_t d = p.holding.size();
    require(d >= 1, "newsvendor: empty cost vectors");
    require(p.backorder.size() == d && p.z_lo.size() == d && p.z_hi.size() == d,
            "newsvendor: dimension mismatch");
    for (std::size_t j = 0; j < d; ++j) {
        require(std::isfinite(p.holding[j]) && p.holding[j] > 0.0,
                "newsvendor: holding costs must be positive");
        require(std::isfinite(p.backorder[j]) && p.backorder[j] > 0.0,
                "newsvendor: backorder costs must be positive");
        require(p.z_lo[j] <= p.z_hi[j], "newsvendor: empty decision box");
    }
}

double NewsvendorProblem::cost(std::span<const double> z, std::span<const double> y) const {
    double c = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) {
        const double over = z[j] - y[j];
        c += over >= 0.0 ? holding[j] * over : backorder[j] * (-over);
    }
    return c;
}

double NewsvendorProblem::lipschitz() const {
    double s = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) {
        const double m = std::max(holding[j], backorder[j]);
        s += m * m;
    }
    return std::sqrt(s);
}

namespace {

/// Vertices of {lambda : W^T lambda <= d} by basis enumeration; the largest
/// vertex norm bounds the subgradients of the recourse value in its rhs.
double max_dual_vertex_norm(const Matrix& w, std::span<const double> d) {
    const std::size_t m = w.rows(); // dual dimension
    const std::size_t n = w.cols(); // number of dual constraints
    require(n >= m, "recourse matrix needs at least as many columns as rows");

    double best = -1.0;

    // Iterate over all m-subsets of the n constraints.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    bool done = false;
    while (!done) {
        // Solve the square system W(:, idx)^T lambda = d(idx).
        Matrix a(m, m);
        std::vector<double> rhs(m);
        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t c = 0; c < m; ++c) a(r, c) = w(c, idx[r]);
            rhs[r] = d[idx[r]];
        }
        // Gaussian elimination with partial pivoting.
        bool singular = false;
        std::vector<double> lam(m);
        {
            std::vector<std::size_t> perm(m);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t col = 0; col < m && !singular; ++col) {
                std::size_t piv = col;
                for (std::size_t r = col + 1; r < m; ++r)
                    if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
                if (std::fabs(a(piv, col)) < 1e-11) { singular = true; break; }
                if (piv != col) {
                    for (std::size_t c = 0; c < m; ++c) std::swap(a(col, c), a(piv, c));
                    std::swap(rhs[col], rhs[piv]);
                }
                for (std::size_t r = col + 1; r < m; ++r) {
                    const double f = a(r, col) / a(col, col);
                    if (f == 0.0) continue;
                    for (std::size_t c = col; c < m; ++c) a(r, c) -= f * a(col, c);
                    rhs[r] -= f * rhs[col];
                }
            }
            if (!singular) {
                for (std::size_t r = m; r-- > 0;) {
                    double s = rhs[r];
                    for (std::size_t c = r + 1; c < m; ++c) s -= a(r, c) * lam[c];
                    lam[r] = s / a(r, r);
                }
            }
        }
        if (!singular) {
            bool feasible = true;
            for (std::size_t c = 0; c < n && feasible; ++c) {
                double lhs = 0.0;
                for (std::size_t r = 0; r < m; ++r) lhs += w(r, c) * lam[r];
                feasible = lhs <= d[c] + 1e-8 * (1.0 + std::fabs(d[c]));
            }
            if (feasible) best = std::max(best, linalg::norm2(lam));
        }

        // advance to the next m-subset in lexicographic order
        done = true;
        for (std::size_t i = m; i-- > 0;) {
            if (idx[i] < n - (m - i)) {
                ++idx[i];
                for (std::size_t j2 = i + 1; j2 < m; ++j2) idx[j2] = idx[j2 - 1] + 1;
                done = false;
                break;
            }
        }
    }
    require(best >= 0.0, "dual polytope of the recourse program has no vertex");
    return best;
}

} // namespace

double TwoStageLP::lipschitz() const {
    return linalg::spectral_norm(rhs_matrix) * max_dual_vertex_norm(recourse_matrix, recourse_cost);
}

TwoStageLP make_two_stage_lp(std::vector<double> first_cost, Matrix ineq_matrix,
                             std::vector<double> ineq_rhs, std::vector<double> recourse_cost,
                             Matrix recourse_matrix, Matrix technology_matrix,
                             Matrix rhs_matrix, std::vector<double> rhs_shift,
                             int certificate_samples, std::uint64_t certificate_seed) {
    TwoStageLP p;
    p.first_cost = std::move(first_cost);
    p.ineq_matrix = std::move(ineq_matrix);
    p.ineq_rhs = std::move(ineq_rhs);
    p.recourse_cost = std::move(recourse_cost);
    p.recourse_matrix = std::move(recourse_matrix);
    p.technology_matrix = std::move(technology_matrix);
    p.rhs_matrix = std::move(rhs_matrix);
    p.rhs_shift = std::move(rhs_shift);

    const std::size_t d_z = p.first_cost.size();
    const std::size_t m_w = p.recourse_matrix.rows();
    const std::size_t n_w = p.recourse_matrix.cols();
    require(d_z >= 1 && m_w >= 1 && n_w >= 1, "two-stage: empty blocks");
    require(p.ineq_matrix.cols() == d_z && p.ineq_matrix.rows() == p.ineq_rhs.size(),
            "two-stage: first-stage constraint shape mismatch");
    require(p.recourse_cost.size() == n_w, "two-stage: recourse cost length mismatch");
    require(p.technology_matrix.rows() == m_w && p.technology_matrix.cols() == d_z,
            "two-stage: technology matrix shape mismatch");
    require(p.rhs_matrix.rows() == m_w, "two-stage: rhs matrix shape mismatch");
    require(p.rhs_shift.size() == m_w, "two-stage: rhs shift length mismatch");

    // Complete-recourse certificate: the second stage must be feasible and
    // bounded for arbitrary right-hand sides; we test random ones at a
    // scale matched to the problem data.
    double scale = 1.0;
    for (double v : p.rhs_shift) scale = std::max(scale, std::fabs(v));
    for (double v : p.rhs_matrix.data()) scale = std::max(scale, std::fabs(v));
    for (double v : p.technology_matrix.data()) scale = std::max(scale, std::fabs(v));

    rng::Stream stream(certificate_seed);
    for (int it = 0; it < certificate_samples; ++it) {
        linalg::LinearProgram lp;
        lp.objective = p.recourse_cost;
        lp.eq_matrix = p.recourse_matrix;
        lp.eq_rhs.resize(m_w);
        for (std::size_t r = 0; r < m_w; ++r) lp.eq_rhs[r] = 4.0 * scale * stream.normal();
        const linalg::LpSolution sol = linalg::solve_lp(lp);
        if (sol.status == linalg::LpStatus::infeasible)
            throw InvalidSpecError("two-stage: recourse infeasible for a sampled rhs, "
                                   "complete recourse certificate failed");
        if (sol.status == linalg::LpStatus::unbounded)
            throw InvalidSpecError("two-stage: recourse unbounded below, "
                                   "complete recourse certificate failed");
    }
    return p;
}

std::size_t decision_dim(const Problem& p) {
    return std::visit([](const auto& q) { return q.dim(); }, p);
}

std::size_t outcome_dim(const Problem& p) {
    if (const auto* nv = std::get_if<NewsvendorProblem>(&p)) return nv->dim();
    return std::get<TwoStageLP>(p).outcome_dim();
}

double lipschitz(const Problem& p) {
    return std::visit([](const auto& q) { return q.lipschitz(); }, p);
}

namespace {

double recourse_value(const TwoStageLP& p, std::span<const double> z,
                      std::span<const double> y) {
    const std::size_t m_w = p.recourse_matrix.rows();
    linalg::LinearProgram lp;
    lp.objective = p.recourse_cost;
    lp.eq_matrix = p.recourse_matrix;
    lp.eq_rhs.resize(m_w);
    const std::vector<double> hy = linalg::matvec(p.rhs_matrix, y);
    const std::vector<double> tz = linalg::matvec(p.technology_matrix, z);
    for (std::size_t r = 0; r < m_w; ++r) lp.eq_rhs[r] = hy[r] + p.rhs_shift[r] - tz[r];
    const linalg::LpSolution sol = linalg::solve_lp(lp);
    if (sol.status == linalg::LpStatus::infeasible)
        throw RecourseInfeasibleError("recourse program infeasible at a scenario");
    if (sol.status == linalg::LpStatus::unbounded)
        throw SaaUnboundedError("recourse program unbounded below at a scenario");
    return sol.value;
}

} // namespace

double scenario_cost(const Problem& p, std::span<const double> z, std::span<const double> y) {
    if (const auto* nv = std::get_if<NewsvendorProblem>(&p)) return nv->cost(z, y);
    const auto& ts = std::get<TwoStageLP>(p);
    return linalg::dot(ts.first_cost, z) + recourse_value(ts, z, y);
}

double evaluate_cost(const Problem& p, std::span<const double> z, const ScenarioSet& scenarios) {
    if (scenarios.size() == 0) throw InvalidSpecError("evaluate_cost: empty scenario set");
    double v = 0.0;
    for (std::size_t i = 0; i < scenarios.size(); ++i)
        v += scenarios.weights[i] * scenario_cost(p, z, scenarios.points.row(i));
    return v;
}

namespace {

/// Smallest value at which the cumulative scenario weight reaches tau.
double weighted_quantile(std::vector<std::pair<double, double>>& value_weight, double tau) {
    std::sort(value_weight.begin(), value_weight.end());
    double cum = 0.0;
    for (const auto& [v, w] : value_weight) {
        cum += w;
        if (cum >= tau - kQuantileSlack) return v;
    }
    return value_weight.back().first;
}

SaaSolution solve_newsvendor_saa(const NewsvendorProblem& p, const ScenarioSet& scenarios) {
    validate(p);
    const std::size_t n = scenarios.size();
    SaaSolution sol;
    sol.z.resize(p.dim());
    std::vector<std::pair<double, double>> vw(n);
    for (std::size_t j = 0; j < p.dim(); ++j) {
        const double tau = p.backorder[j] / (p.holding[j] + p.backorder[j]);
        for (std::size_t i = 0; i < n; ++i)
            vw[i] = {scenarios.points(i, j), scenarios.weights[i]};
        const double q = weighted_quantile(vw, tau);
        sol.z[j] = std::clamp(q, p.z_lo[j], p.z_hi[j]);
    }
    sol.value = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sol.value += scenarios.weights[i] * p.cost(sol.z, scenarios.points.row(i));
    return sol;
}

SaaSolution solve_two_stage_saa(const TwoStageLP& p, const ScenarioSet& scenarios) {
    const std::size_t n = scenarios.size();
    if (n > kExtensiveFormCap)
        throw InvalidSpecError("extensive form supports at most " +
                               std::to_string(kExtensiveFormCap) + " scenarios, got " +
                               std::to_string(n));
    const std::size_t d_z = p.dim();
    const std::size_t m_a = p.ineq_matrix.rows();
    const std::size_t m_w = p.recourse_matrix.rows();
    const std::size_t n_w = p.recourse_matrix.cols();

    // Variables: z, slack s for A z <= b, then one recourse block per
    // scenario. Rows: A z + s = b, then T z + W w^i = H y^i + h0.
    const std::size_t nvars = d_z + m_a + n * n_w;
    const std::size_t nrows = m_a + n * m_w;
    linalg::LinearProgram lp;
    lp.objective.assign(nvars, 0.0);
    lp.eq_matrix = Matrix(nrows, nvars, 0.0);
    lp.eq_rhs.assign(nrows, 0.0);

    for (std::size_t j = 0; j < d_z; ++j) lp.objective[j] = p.first_cost[j];
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n_w; ++j)
            lp.objective[d_z + m_a + i * n_w + j] = scenarios.weights[i] * p.recourse_cost[j];

    for (std::size_t r = 0; r < m_a; ++r) {
        for (std::size_t j = 0; j < d_z; ++j) lp.eq_matrix(r, j) = p.ineq_matrix(r, j);
        lp.eq_matrix(r, d_z + r) = 1.0;
        lp.eq_rhs[r] = p.ineq_rhs[r];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const std::vector<double> hy = linalg::matvec(p.rhs_matrix, scenarios.points.row(i));
        for (std::size_t r = 0; r < m_w; ++r) {
            const std::size_t row = m_a + i * m_w + r;
            for (std::size_t j = 0; j < d_z; ++j)
                lp.eq_matrix(row, j) = p.technology_matrix(r, j);
            for (std::size_t j = 0; j < n_w; ++j)
                lp.eq_matrix(row, d_z + m_a + i * n_w + j) = p.recourse_matrix(r, j);
            lp.eq_rhs[row] = hy[r] + p.rhs_shift[r];
        }
    }

    const linalg::LpSolution lps = linalg::solve_lp(lp);
    if (lps.status == linalg::LpStatus::infeasible)
        throw SaaInfeasibleError("extensive form infeasible");
    if (lps.status == linalg::LpStatus::unbounded)
        throw SaaUnboundedError("extensive form unbounded below");

    SaaSolution sol;
    sol.z.assign(lps.x.begin(), lps.x.begin() + d_z);
    Problem as_problem = p;
    sol.value = evaluate_cost(as_problem, sol.z, scenarios);
    return sol;
}

} // namespace

SaaSolution solve_saa(const Problem& p, const ScenarioSet& scenarios) {
    if (scenarios.size() == 0) throw InvalidSpecError("solve_saa: empty scenario set");
    if (scenarios.dim() != outcome_dim(p))
        throw InvalidSpecError("solve_saa: scenario dimension mismatch");
    if (const auto* nv = std::get_if<NewsvendorProblem>(&p))
        return solve_newsvendor_saa(*nv, scenarios);
    return solve_two_stage_saa(std::get<TwoStageLP>(p), scenarios);
}

OracleValue true_value(const Problem& p, const datagen::TruthSpec& spec,
                       std::span<const double> x, std::size_t m, std::uint64_t seed) {
    if (m < 2) throw InsufficientDataError("true_value: need at least two draws");
    const std::size_t d_y = spec.dim_y();
    if (outcome_dim(p) != d_y) throw InvalidSpecError("true_value: outcome dimension mismatch");

    const Matrix errors = datagen::sample_errors(spec, m, seed);
    const ScenarioSet fi = residuals::build_fi_scenarios(spec, errors, x);
    const SaaSolution sol = solve_saa(p, fi);

    // Standard error of the value estimate at the returned decision.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double c = scenario_cost(p, sol.z, fi.points.row(i));
        const double delta = c - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (c - mean);
    }
    OracleValue out;
    out.value = sol.value;
    out.z = sol.z;
    out.std_error = std::sqrt(m2 / static_cast<double>(m - 1) / static_cast<double>(m));
    return out;
}

std::vector<double> newsvendor_true_optimum(const NewsvendorProblem& p,
                                            const datagen::TruthSpec& spec,
                                            std::span<const double> x) {
    validate(p);
    if (p.dim() != spec.dim_y())
        throw InvalidSpecError("newsvendor_true_optimum: dimension mismatch");
    const std::vector<double> f = spec.mean_at(x);
    const std::vector<double> q = spec.cov_diag_at(x);
    std::vector<double> z(p.dim());
    for (std::size_t j = 0; j < p.dim(); ++j) {
        const double tau = p.backorder[j] / (p.holding[j] + p.backorder[j]);
        z[j] = std::clamp(f[j] + q[j] * spec.error_quantile(tau), p.z_lo[j], p.z_hi[j]);
    }
    return z;
}

} // namespace ersaa::stochprog
