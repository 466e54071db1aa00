#include "ersaa/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

namespace ersaa::linalg {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& r : rows) {
        if (r.size() != m.cols()) throw InvalidSpecError("ragged rows in matrix literal");
        std::size_t j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
    return y;
}

Matrix transpose_times(const Matrix& a, const Matrix& b) {
    Matrix out(a.cols(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(k, j) += aik * b(i, j);
        }
    }
    return out;
}

Matrix solve_spd(Matrix gram, const Matrix& rhs, double rank_tol) {
    const std::size_t p = gram.rows();
    if (gram.cols() != p || rhs.rows() != p)
        throw InvalidSpecError("solve_spd: dimension mismatch");

    double max_diag = 0.0;
    for (std::size_t j = 0; j < p; ++j) max_diag = std::max(max_diag, std::fabs(gram(j, j)));
    if (max_diag == 0.0) max_diag = 1.0;

    // In-place lower Cholesky; a pivot within rank_tol of zero relative to
    // the largest diagonal entry means the columns are numerically dependent.
    for (std::size_t j = 0; j < p; ++j) {
        double d = gram(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= gram(j, k) * gram(j, k);
        if (!(d > rank_tol * max_diag))
            throw RankDeficientError("pivot " + std::to_string(j) +
                                     " below tolerance, matrix is rank deficient");
        const double l = std::sqrt(d);
        gram(j, j) = l;
        for (std::size_t i = j + 1; i < p; ++i) {
            double s = gram(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= gram(i, k) * gram(j, k);
            gram(i, j) = s / l;
        }
    }

    Matrix x = rhs;
    // forward solve L y = rhs, column by column
    for (std::size_t c = 0; c < x.cols(); ++c) {
        for (std::size_t i = 0; i < p; ++i) {
            double s = x(i, c);
            for (std::size_t k = 0; k < i; ++k) s -= gram(i, k) * x(k, c);
            x(i, c) = s / gram(i, i);
        }
        // back solve L^T x = y
        for (std::size_t ii = p; ii-- > 0;) {
            double s = x(ii, c);
            for (std::size_t k = ii + 1; k < p; ++k) s -= gram(k, ii) * x(k, c);
            x(ii, c) = s / gram(ii, ii);
        }
    }
    return x;
}

Matrix least_squares(const Matrix& design, const Matrix& targets, double rank_tol) {
    if (design.rows() != targets.rows())
        throw InvalidSpecError("least_squares: row count mismatch");
    if (design.rows() < design.cols())
        throw InvalidSpecError("least_squares: fewer rows than columns");
    if (!design.all_finite() || !targets.all_finite())
        throw InvalidSpecError("least_squares: non-finite entries");
    Matrix gram = transpose_times(design, design);
    Matrix rhs = transpose_times(design, targets);
    return solve_spd(std::move(gram), rhs, rank_tol);
}

std::vector<double> symmetric_eigenvalues(Matrix a) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw InvalidSpecError("symmetric_eigenvalues: not square");

    // Cyclic Jacobi sweeps; adequate for the small matrices used here.
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-28) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

double spectral_norm(const Matrix& a) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    const Matrix g = transpose_times(a, a);
    const std::vector<double> eig = symmetric_eigenvalues(g);
    return std::sqrt(std::max(0.0, eig.back()));
}

namespace {

/// Dense simplex tableau kept in canonical form with respect to the basis.
/// Columns: n structural, m artificial, then the right-hand side.
struct Tableau {
    std::size_t m, n;              // active rows, structural columns
    std::size_t n_art;             // artificial columns, fixed at construction
    Matrix t;                      // n_art x (n + n_art + 1) storage
    std::vector<std::size_t> basis; // basis[i] = column basic in row i
    std::vector<double> red;        // reduced costs, length n + n_art
    double pivot_tol;
    std::size_t pivots = 0;

    std::size_t rhs_col() const { return n + n_art; }

    void pivot(std::size_t r, std::size_t jin) {
        const double piv = t(r, jin);
        if (std::fabs(piv) < pivot_tol)
            throw NumericalBreakdownError("simplex pivot magnitude below tolerance");
        const double inv = 1.0 / piv;
        for (std::size_t j = 0; j <= rhs_col(); ++j) t(r, j) *= inv;
        t(r, jin) = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            if (i == r) continue;
            const double f = t(i, jin);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= rhs_col(); ++j) t(i, j) -= f * t(r, j);
            t(i, jin) = 0.0;
        }
        const double f = red[jin];
        if (f != 0.0) {
            for (std::size_t j = 0; j < red.size(); ++j) red[j] -= f * t(r, j);
            red[jin] = 0.0;
        }
        basis[r] = jin;
        ++pivots;
    }

    /// Recomputes reduced costs for the given full cost vector.
    void reset_costs(std::span<const double> cost) {
        for (std::size_t j = 0; j < red.size(); ++j) red[j] = cost[j];
        for (std::size_t i = 0; i < m; ++i) {
            const double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < red.size(); ++j) red[j] -= cb * t(i, j);
        }
        for (std::size_t i = 0; i < m; ++i) red[basis[i]] = 0.0;
    }

    double objective(std::span<const double> cost) const {
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) v += cost[basis[i]] * t(i, rhs_col());
        return v;
    }
};

} // namespace

LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
    const std::size_t m0 = lp.eq_rhs.size();
    const std::size_t n = lp.objective.size();
    if (lp.eq_matrix.rows() != m0 || lp.eq_matrix.cols() != n)
        throw InvalidSpecError("solve_lp: dimension mismatch");
    if (!lp.eq_matrix.all_finite())
        throw InvalidSpecError("solve_lp: non-finite constraint entries");
    for (double v : lp.objective)
        if (!std::isfinite(v)) throw InvalidSpecError("solve_lp: non-finite objective");
    for (double v : lp.eq_rhs)
        if (!std::isfinite(v)) throw InvalidSpecError("solve_lp: non-finite rhs");

    Tableau tab;
    tab.m = m0;
    tab.n = n;
    tab.n_art = m0;
    tab.pivot_tol = opts.pivot_tol;
    tab.t = Matrix(m0, n + m0 + 1, 0.0);
    tab.basis.resize(m0);
    tab.red.assign(n + m0, 0.0);

    // Rows are normalized to nonnegative right-hand sides so the artificial
    // basis is feasible for phase one.
    for (std::size_t i = 0; i < m0; ++i) {
        const double sign = lp.eq_rhs[i] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < n; ++j) tab.t(i, j) = sign * lp.eq_matrix(i, j);
        tab.t(i, n + i) = 1.0;
        tab.t(i, tab.rhs_col()) = sign * lp.eq_rhs[i];
        tab.basis[i] = n + i;
    }

    const std::size_t max_iters =
        opts.max_iters ? opts.max_iters : 10000 + 200 * (n + 2 * m0);

    // enterable[j] marks columns allowed to enter; artificial columns are
    // frozen once they leave the basis.
    std::vector<char> enterable(n + m0, 1);

    auto run_phase = [&](std::span<const double> cost, bool phase_one) -> bool {
        tab.reset_costs(cost);
        while (true) {
            // Bland entering rule: smallest eligible column index.
            std::size_t jin = tab.red.size();
            for (std::size_t j = 0; j < tab.red.size(); ++j) {
                if (!enterable[j]) continue;
                if (tab.red[j] < -opts.pivot_tol) { jin = j; break; }
            }
            if (jin == tab.red.size()) return true; // optimal for this phase

            // Ratio test; ties resolved by the smallest basis index (Bland).
            std::size_t row = tab.m;
            double best = 0.0;
            for (std::size_t i = 0; i < tab.m; ++i) {
                const double a = tab.t(i, jin);
                if (a <= opts.pivot_tol) continue;
                const double ratio = std::max(tab.t(i, tab.rhs_col()), 0.0) / a;
                if (row == tab.m) {
                    best = ratio;
                    row = i;
                    continue;
                }
                const double slack = 1e-12 * (1.0 + std::fabs(best));
                if (ratio < best - slack ||
                    (std::fabs(ratio - best) <= slack && tab.basis[i] < tab.basis[row])) {
                    best = ratio;
                    row = i;
                }
            }
            if (row == tab.m) {
                if (phase_one)
                    throw NumericalBreakdownError("phase one claims unbounded descent");
                return false; // unbounded
            }
            const std::size_t jout = tab.basis[row];
            tab.pivot(row, jin);
            if (jout >= n) enterable[jout] = 0; // retire the artificial
            if (tab.pivots > max_iters)
                throw NumericalBreakdownError("simplex iteration cap exceeded");
        }
    };

    // Phase one: minimize the sum of artificials.
    std::vector<double> cost1(n + m0, 0.0);
    for (std::size_t j = n; j < n + m0; ++j) cost1[j] = 1.0;
    run_phase(cost1, true);
    if (tab.objective(cost1) > opts.feas_tol) return {LpStatus::infeasible, {}, 0.0};

    // Drive residual artificials out of the basis; rows that offer no
    // structural pivot are redundant and get dropped.
    for (std::size_t i = 0; i < tab.m;) {
        if (tab.basis[i] < n) { ++i; continue; }
        std::size_t jin = n;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::fabs(tab.t(i, j)) > opts.pivot_tol) { jin = j; break; }
        }
        if (jin < n) {
            const std::size_t jout = tab.basis[i];
            tab.pivot(i, jin);
            enterable[jout] = 0;
            ++i;
        } else {
            // swap-remove row i together with its basis entry
            const std::size_t last = tab.m - 1;
            if (i != last) {
                for (std::size_t j = 0; j <= tab.rhs_col(); ++j) tab.t(i, j) = tab.t(last, j);
                tab.basis[i] = tab.basis[last];
            }
            --tab.m;
        }
    }
    for (std::size_t j = n; j < n + m0; ++j) enterable[j] = 0;

    // Phase two on the original objective.
    std::vector<double> cost2(n + m0, 0.0);
    for (std::size_t j = 0; j < n; ++j) cost2[j] = lp.objective[j];
    if (!run_phase(cost2, false)) return {LpStatus::unbounded, {}, 0.0};

    LpSolution sol;
    sol.status = LpStatus::optimal;
    sol.x.assign(n, 0.0);
    for (std::size_t i = 0; i < tab.m; ++i) {
        if (tab.basis[i] < n) sol.x[tab.basis[i]] = std::max(tab.t(i, tab.rhs_col()), 0.0);
    }
    sol.value = dot(lp.objective, sol.x);

    // Final audit against the original constraints.
    const std::vector<double> ax = matvec(lp.eq_matrix, sol.x);
    for (std::size_t i = 0; i < m0; ++i) {
        const double scale = 1.0 + std::fabs(lp.eq_rhs[i]);
        if (std::fabs(ax[i] - lp.eq_rhs[i]) > opts.feas_tol * scale)
            throw NumericalBreakdownError("simplex solution fails feasibility audit");
    }
    return sol;
}

} // namespace ersaa::linalg
