#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "ersaa/errors.hpp"

namespace ersaa::linalg {

inline constexpr double kDefaultRankTol = 1e-10;

/// Dense row-major matrix of doubles. Deliberately small: just what the
/// estimation and optimization code in this library needs.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);

std::vector<double> matvec(const Matrix& a, std::span<const double> x);

/// Returns A^T * B without forming A^T.
Matrix transpose_times(const Matrix& a, const Matrix& b);

/// Solves gram * X = rhs for symmetric positive definite gram via Cholesky.
/// A diagonal pivot below rank_tol times the largest initial diagonal entry
/// raises RankDeficientError.
Matrix solve_spd(Matrix gram, const Matrix& rhs, double rank_tol = kDefaultRankTol);

/// Minimum-residual solution of design * X ~= targets through the normal
/// equations. Column dimension must not exceed the row count.
Matrix least_squares(const Matrix& design, const Matrix& targets,
                     double rank_tol = kDefaultRankTol);

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi method, ascending.
std::vector<double> symmetric_eigenvalues(Matrix a);

/// Largest singular value of a (any shape).
double spectral_norm(const Matrix& a);

enum class LpStatus { optimal, infeasible, unbounded };

/// min objective . x  subject to  eq_matrix x = eq_rhs, x >= 0.
struct LinearProgram {
    std::vector<double> objective;
    Matrix eq_matrix;
    std::vector<double> eq_rhs;
};

struct SimplexOptions {
    double pivot_tol = 1e-9;  // entries at or below this never pivot
    double feas_tol = 1e-8;   // final feasibility audit of the returned vertex
    std::size_t max_iters = 0; // 0 lets the solver pick a generous cap
};

struct LpSolution {
    LpStatus status = LpStatus::optimal;
    std::vector<double> x;    // empty unless status == optimal
    double value = 0.0;
};

/**
 * Two-phase primal simplex on a dense tableau.
 *
 * Entering and leaving variables follow Bland's smallest-index rule, which
 * rules out cycling, so the solver is deterministic: two calls on the same
 * input return the same vertex. Redundant rows discovered at the end of
 * phase one are dropped. The returned basic solution has at most one
 * nonzero per retained row.
 */
LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

} // namespace ersaa::linalg
