#include "ersaa/dro.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ersaa/errors.hpp"

namespace ersaa::dro {

namespace {

constexpr double kMultiplierTol = 1e-10; // bisection width on the divergence multiplier
constexpr double kGoldenTol = 1e-8;      // interval width in the outer search
constexpr double kInvPhi = 0.6180339887498948482;

struct WaterFill {
    std::vector<double> q;
    double divergence = 0.0;
};

/// Maximizer structure at a fixed divergence multiplier lam > 0:
/// q_i = max(0, 1 + (c_i - mu)/(2 lam)) / n with mu chosen so the weights
/// sum to one. Solved exactly by activating costs from the largest down.
WaterFill water_fill(std::span<const double> costs, double lam,
                     std::span<const std::size_t> desc) {
    const std::size_t n = costs.size();
    const double nd = static_cast<double>(n);
    WaterFill out;
    out.q.assign(n, 0.0);

    double prefix = 0.0;
    double mu = 0.0;
    std::size_t active = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        prefix += costs[desc[k - 1]];
        const double mu_k = (prefix + 2.0 * lam * (static_cast<double>(k) - nd)) /
                            static_cast<double>(k);
        const double cutoff = mu_k - 2.0 * lam;
        const bool smallest_in = costs[desc[k - 1]] > cutoff;
        const bool next_out = (k == n) || (costs[desc[k]] <= cutoff);
        if (smallest_in && next_out) {
            mu = mu_k;
            active = k;
            break;
        }
    }
    if (active == 0) { // numerical corner, fall back to the full support
        mu = (prefix + 2.0 * lam * (nd - nd)) / nd;
        active = n;
    }

    double div = 0.0;
    for (std::size_t k = 0; k < active; ++k) {
        const std::size_t i = desc[k];
        const double qi = (1.0 + (costs[i] - mu) / (2.0 * lam)) / nd;
        out.q[i] = std::max(qi, 0.0);
    }
    double sum = std::accumulate(out.q.begin(), out.q.end(), 0.0);
    for (double& qi : out.q) qi /= sum; // exact simplex membership
    for (double qi : out.q) {
        const double u = nd * qi - 1.0;
        div += u * u;
    }
    out.divergence = div / nd;
    return out;
}

} // namespace

AmbiguitySet make_ambiguity_set(ScenarioSet center, double radius) {
    if (!(radius >= 0.0) || !std::isfinite(radius))
        throw InvalidSpecError("ambiguity set: radius must be finite and nonnegative");
    const std::size_t n = center.size();
    if (n == 0) throw InvalidSpecError("ambiguity set: empty center");
    for (double w : center.weights)
        if (std::fabs(w - 1.0 / static_cast<double>(n)) > 1e-12)
            throw InvalidSpecError("ambiguity set: center weights must be uniform");
    return {std::move(center), radius};
}

WorstCase worst_case_expectation(std::span<const double> costs, double radius) {
    const std::size_t n = costs.size();
    if (n == 0) throw InvalidSpecError("worst_case_expectation: no costs");
    if (!(radius >= 0.0)) throw InvalidSpecError("worst_case_expectation: negative radius");
    const double nd = static_cast<double>(n);

    WorstCase out;
    out.weights.assign(n, 1.0 / nd);

    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= nd;
    double var = 0.0;
    for (double c : costs) var += (c - mean) * (c - mean);
    var /= nd;
    const double sd = std::sqrt(var);

    double spread = 0.0;
    for (double c : costs) spread = std::max(spread, std::fabs(c - mean));

    // Degenerate rays: zero radius or (numerically) constant costs keep the
    // uniform weights optimal.
    if (radius == 0.0 || spread <= 1e-14 * (1.0 + std::fabs(mean))) {
        out.value = mean;
        return out;
    }

    // The divergence of any simplex point is at most n - 1, attained by a
    // point mass; beyond that the ball is the whole simplex.
    if (radius >= (nd - 1.0) * (1.0 - 1e-12)) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (costs[i] > costs[arg]) arg = i;
        out.weights.assign(n, 0.0);
        out.weights[arg] = 1.0;
        out.value = costs[arg];
        return out;
    }

    // Interior closed form when no nonnegativity constraint binds.
    const double root = std::sqrt(radius);
    bool nonneg = true;
    for (std::size_t i = 0; i < n && nonneg; ++i)
        nonneg = 1.0 + root * (costs[i] - mean) / sd >= 0.0;
    if (nonneg) {
        for (std::size_t i = 0; i < n; ++i)
            out.weights[i] = (1.0 + root * (costs[i] - mean) / sd) / nd;
        out.value = mean + root * sd;
        return out;
    }

    // Otherwise bisect the divergence multiplier; the water-filled
    // divergence is continuous and decreasing in it.
    std::vector<std::size_t> desc(n);
    std::iota(desc.begin(), desc.end(), 0);
    std::sort(desc.begin(), desc.end(), [&](std::size_t a, std::size_t b) {
        return costs[a] != costs[b] ? costs[a] > costs[b] : a < b;
    });

    double lo = sd / (2.0 * root), hi = lo;
    for (int it = 0; it < 200 && water_fill(costs, lo, desc).divergence <= radius; ++it)
        lo *= 0.5;
    for (int it = 0; it < 200 && water_fill(costs, hi, desc).divergence > radius; ++it)
        hi *= 2.0;
    for (int it = 0; it < 500 && hi - lo > kMultiplierTol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (water_fill(costs, mid, desc).divergence > radius ? lo : hi) = mid;
    }
    const WaterFill wf = water_fill(costs, 0.5 * (lo + hi), desc);
    out.weights = wf.q;
    out.value = 0.0;
    for (std::size_t i = 0; i < n; ++i) out.value += wf.q[i] * costs[i];
    return out;
}

WorstCase worst_case_expectation(const AmbiguitySet& set, std::span<const double> costs) {
    if (costs.size() != set.center.size())
        throw InvalidSpecError("worst_case_expectation: cost length mismatch");
    return worst_case_expectation(costs, set.radius);
}

namespace {

double worst_value_at(const stochprog::NewsvendorProblem& p, const AmbiguitySet& set,
                      std::span<const double> z, std::vector<double>& costs) {
    const std::size_t n = set.center.size();
    for (std::size_t i = 0; i < n; ++i) costs[i] = p.cost(z, set.center.points.row(i));
    return worst_case_expectation(costs, set.radius).value;
}

} // namespace

DroSolution solve_dro_newsvendor(const stochprog::NewsvendorProblem& p,
                                 const AmbiguitySet& set) {
    stochprog::validate(p);
    if (set.center.dim() != p.dim())
        throw InvalidSpecError("solve_dro_newsvendor: scenario dimension mismatch");
    const std::size_t d = p.dim();
    const std::size_t n = set.center.size();

    std::vector<double> z(d);
    for (std::size_t j = 0; j < d; ++j) z[j] = 0.5 * (p.z_lo[j] + p.z_hi[j]);
    std::vector<double> costs(n);

    // Golden-section search along one coordinate; the objective is convex,
    // so equal endpoint values always bracket a minimizer.
    auto line_search = [&](std::size_t j) {
        double a = p.z_lo[j], b = p.z_hi[j];
        if (b - a <= kGoldenTol) {
            z[j] = 0.5 * (a + b);
            return;
        }
        double x1 = b - kInvPhi * (b - a);
        double x2 = a + kInvPhi * (b - a);
        z[j] = x1;
        double f1 = worst_value_at(p, set, z, costs);
        z[j] = x2;
        double f2 = worst_value_at(p, set, z, costs);
        while (b - a > kGoldenTol) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - kInvPhi * (b - a);
                z[j] = x1;
                f1 = worst_value_at(p, set, z, costs);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + kInvPhi * (b - a);
                z[j] = x2;
                f2 = worst_value_at(p, set, z, costs);
            }
        }
        z[j] = 0.5 * (a + b);
    };

    if (d == 1) {
        line_search(0);
    } else {
        for (int sweep = 0; sweep < 50; ++sweep)
            for (std::size_t j = 0; j < d; ++j) line_search(j);
    }

    DroSolution sol;
    for (std::size_t i = 0; i < n; ++i) costs[i] = p.cost(z, set.center.points.row(i));
    const WorstCase wc = worst_case_expectation(costs, set.radius);
    sol.z = std::move(z);
    sol.value = wc.value;
    sol.worst_weights = wc.weights;
    return sol;
}

} // namespace ersaa::dro
