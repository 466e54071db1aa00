#pragma once

// Brute-force reference implementations, deliberately independent of the
// library's algorithms. Exponential or grid-based; tiny instances only.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ersaa/linalg.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/stochprog.hpp"

namespace refsolve {

struct VertexBest {
    bool feasible = false;
    double value = std::numeric_limits<double>::infinity();
    std::vector<double> x;
};

/// Solves B x = rhs by Gaussian elimination with partial pivoting.
inline std::optional<std::vector<double>> solve_square(ersaa::linalg::Matrix b,
                                                       std::vector<double> rhs) {
    const std::size_t m = rhs.size();
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::fabs(b(r, col)) > std::fabs(b(piv, col))) piv = r;
        if (std::fabs(b(piv, col)) < 1e-11) return std::nullopt;
        if (piv != col) {
            for (std::size_t j = 0; j < m; ++j) std::swap(b(piv, j), b(col, j));
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r == col) continue;
            const double factor = b(r, col) / b(col, col);
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < m; ++j) b(r, j) -= factor * b(col, j);
            rhs[r] -= factor * rhs[col];
        }
    }
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = rhs[i] / b(i, i);
    return x;
}

/// Best objective over all basic feasible solutions (vertex enumeration).
inline VertexBest best_vertex(const ersaa::linalg::LinearProgram& lp) {
    const std::size_t m = lp.eq_rhs.size();
    const std::size_t n = lp.objective.size();
    VertexBest best;
    if (m > n) return best;

    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        ersaa::linalg::Matrix basis(m, m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < m; ++c) basis(r, c) = lp.eq_matrix(r, idx[c]);
        if (auto xb = solve_square(basis, lp.eq_rhs)) {
            bool nonneg = true;
            for (double v : *xb)
                if (v < -1e-9) nonneg = false;
            if (nonneg) {
                double value = 0.0;
                for (std::size_t c = 0; c < m; ++c) value += lp.objective[idx[c]] * (*xb)[c];
                if (!best.feasible || value < best.value) {
                    best.feasible = true;
                    best.value = value;
                    best.x.assign(n, 0.0);
                    for (std::size_t c = 0; c < m; ++c) best.x[idx[c]] = (*xb)[c];
                }
            }
        }
        // next m-subset of {0..n-1} in lexicographic order
        std::size_t i = m;
        while (i > 0) {
            --i;
            if (idx[i] < n - (m - i)) {
                ++idx[i];
                for (std::size_t j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
                break;
            }
            if (i == 0) return best;
        }
        if (m == 0) return best;
    }
}

/// max sum q_i c_i over { q in simplex : (1/n) sum (n q_i - 1)^2 <= radius }
/// for n in {1, 2, 3}: a sweep at the given step plus local refinement
/// passes around the incumbent. Refinement cannot get stuck because a
/// linear objective over a convex set has no non-global local maxima.
inline double grid_worst_case(std::span<const double> costs, double radius, double step) {
    const std::size_t n = costs.size();
    const auto divergence_ok = [&](std::span<const double> q) {
        double acc = 0.0;
        for (double qi : q) {
            const double t = static_cast<double>(n) * qi - 1.0;
            acc += t * t;
        }
        return acc / static_cast<double>(n) <= radius + 1e-12;
    };
    if (n == 1) return costs[0];
    if (n == 2) {
        double best = 0.5 * (costs[0] + costs[1]); // uniform weights, always feasible
        double best_q = 0.5;
        double lo = 0.0, hi = 1.0, h = step;
        for (int pass = 0; pass < 4; ++pass) {
            for (double q1 = lo; q1 <= hi + 1e-15; q1 += h) {
                const double q[2] = {q1, 1.0 - q1};
                if (q[1] < 0.0 || !divergence_ok(q)) continue;
                const double value = q[0] * costs[0] + q[1] * costs[1];
                if (value > best) {
                    best = value;
                    best_q = q1;
                }
            }
            lo = std::max(0.0, best_q - 3.0 * h);
            hi = std::min(1.0, best_q + 3.0 * h);
            h /= 16.0;
        }
        return best;
    }
    double best = (costs[0] + costs[1] + costs[2]) / 3.0;
    double b1 = 1.0 / 3.0, b2 = 1.0 / 3.0;
    double lo1 = 0.0, hi1 = 1.0, lo2 = 0.0, hi2 = 1.0, h = step;
    for (int pass = 0; pass < 4; ++pass) {
        for (double q1 = lo1; q1 <= hi1 + 1e-15; q1 += h) {
            const double q2_cap = std::min(hi2, 1.0 - q1);
            for (double q2 = lo2; q2 <= q2_cap + 1e-15; q2 += h) {
                const double q[3] = {q1, q2, 1.0 - q1 - q2};
                if (q[2] < 0.0 || !divergence_ok(q)) continue;
                const double value = q[0] * costs[0] + q[1] * costs[1] + q[2] * costs[2];
                if (value > best) {
                    best = value;
                    b1 = q1;
                    b2 = q2;
                }
            }
        }
        lo1 = std::max(0.0, b1 - 3.0 * h);
        hi1 = std::min(1.0, b1 + 3.0 * h);
        lo2 = std::max(0.0, b2 - 3.0 * h);
        hi2 = std::min(1.0, b2 + 3.0 * h);
        h /= 16.0;
    }
    return best;
}

/// The newsvendor cost written as a two-stage linear program: per component,
/// recourse u - v = z - y at cost h u + b v. Requires z_lo >= 0.
inline ersaa::stochprog::TwoStageLP
newsvendor_as_lp(const ersaa::stochprog::NewsvendorProblem& p) {
    using ersaa::linalg::Matrix;
    const std::size_t d = p.dim();
    Matrix ineq(2 * d, d);
    std::vector<double> rhs(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        ineq(j, j) = 1.0;
        rhs[j] = p.z_hi[j];
        ineq(d + j, j) = -1.0;
        rhs[d + j] = -p.z_lo[j];
    }
    Matrix w(d, 2 * d), tech(d, d), h(d, d);
    std::vector<double> cost(2 * d);
    for (std::size_t j = 0; j < d; ++j) {
        w(j, j) = 1.0;
        w(j, d + j) = -1.0;
        tech(j, j) = -1.0;
        h(j, j) = -1.0;
        cost[j] = p.holding[j];
        cost[d + j] = p.backorder[j];
    }
    return ersaa::stochprog::make_two_stage_lp(std::vector<double>(d, 0.0), std::move(ineq),
                                               std::move(rhs), std::move(cost), std::move(w),
                                               std::move(tech), std::move(h),
                                               std::vector<double>(d, 0.0));
}

} // namespace refsolve
