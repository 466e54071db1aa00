#include "ersaa/stats.hpp"

#include <cmath>

#include "ersaa/errors.hpp"

namespace ersaa::stats {

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / 1.4142135623730950488);
}

double normal_quantile(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw DomainError("normal_quantile: tau outside (0,1)");
    double lo = -40.0, hi = 40.0;
    // Bisection on a monotone CDF; 200 halvings reach full double precision.
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::fabs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFloor = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFloor) d = kFloor;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFloor) d = kFloor;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFloor) c = kFloor;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFloor) d = kFloor;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFloor) c = kFloor;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw NumericalBreakdownError("incomplete beta continued fraction stalled");
}

} // namespace

namespace {

/// Same as regularized_incomplete_beta but with the complement 1 - x passed
/// explicitly, so arguments very close to 1 keep their resolution.
double incomplete_beta_with_complement(double a, double b, double x, double xc) {
    if (x <= 0.0) return 0.0;
    if (xc <= 0.0) return 1.0;
    const double ln_x = x > 0.5 ? std::log1p(-xc) : std::log(x);
    const double ln_xc = xc > 0.5 ? std::log1p(-x) : std::log(xc);
    const double ln_bt =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * ln_x + b * ln_xc;
    const double bt = std::exp(ln_bt);
    if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
    return 1.0 - bt * beta_cf(b, a, xc) / b;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    return incomplete_beta_with_complement(a, b, x, 1.0 - x);
}

double student_t_cdf(double t, double dof) {
    if (dof <= 0.0) throw DomainError("student_t_cdf: dof must be positive");
    const double s = t * t;
    const double x = dof / (dof + s);
    const double xc = s / (dof + s); // exact complement; x alone rounds to 1 for tiny t
    const double tail = 0.5 * incomplete_beta_with_complement(dof / 2.0, 0.5, x, xc);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_unit_variance_quantile(double tau, double dof) {
    if (!(tau > 0.0 && tau < 1.0))
        throw DomainError("student_t_quantile: tau outside (0,1)");
    if (dof <= 2.0) throw DomainError("student_t_quantile: dof must exceed 2");
    double lo = -1e8, hi = 1e8;
    for (int it = 0; it < 300 && hi - lo > 1e-13 * (1.0 + std::fabs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, dof) < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi) * std::sqrt((dof - 2.0) / dof);
}

Interval wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw DomainError("wilson_interval: zero trials");
    constexpr double z = 1.959963984540054; // 97.5th normal percentile
    const double nd = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nd;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nd;
    const double center = (p + z2 / (2.0 * nd)) / denom;
    const double half =
        z * std::sqrt(p * (1.0 - p) / nd + z2 / (4.0 * nd * nd)) / denom;
    return {center - half, center + half};
}

} // namespace ersaa::stats
