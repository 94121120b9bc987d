#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace tcfou {

/// Truncation and tolerance settings shared by the improper integrals of
/// the library.
struct QuadratureConfig {
    double s_max = 60.0;              ///< truncation point for s-integrals when no tail rule applies
    int n_nodes = 24;                 ///< nodes per fixed Gauss panel
    double abs_tol = 1e-11;
    double rel_tol = 1e-11;
    double tail_bound_budget = 1e-9;  ///< admissible truncation error
    double log_step = 0.02;           ///< spacing of the log-scale stable density table

    /// Throws ContractError when an invariant is violated.
    void validate() const;
};

/// Nodes and weights on the reference interval [-1, 1] (or [0, ∞) for
/// Laguerre rules).
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Jacobi rule for the weight (1 - x)^a (1 + x)^b on [-1, 1], a, b > -1.
/// Computed by Golub-Welsch; results are cached and shared.
const QuadratureRule& gauss_jacobi(int n, double a, double b);

/// Gauss-Legendre rule on [-1, 1].
inline const QuadratureRule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Generalized Gauss-Laguerre rule for the weight x^a e^{-x} on [0, ∞).
const QuadratureRule& gauss_laguerre(int n, double a = 0.0);

/// ∫_lo^hi f(x) dx with the Gauss-Legendre rule of size n.
template <class F>
double integrate_gauss_legendre(F&& f, double lo, double hi, int n) {
    const auto& rule = gauss_legendre(n);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return sum * half;
}

/// ∫_lo^hi (x - lo)^beta f(x) dx, integrable power singularity at the left end.
template <class F>
double integrate_left_singular(F&& f, double lo, double hi, double beta, int n) {
    const auto& rule = gauss_jacobi(n, 0.0, beta);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(lo + half * (1.0 + rule.nodes[i]));
    return sum * std::pow(half, beta + 1.0);
}

/// ∫_lo^hi (hi - x)^beta f(x) dx, integrable power singularity at the right end.
template <class F>
double integrate_right_singular(F&& f, double lo, double hi, double beta, int n) {
    const auto& rule = gauss_jacobi(n, beta, 0.0);
    const double half = 0.5 * (hi - lo);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(lo + half * (1.0 + rule.nodes[i]));
    return sum * std::pow(half, beta + 1.0);
}

struct IntegrationResult {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
    bool converged = false;
};

namespace detail {

struct KronrodSegment {
    double lo, hi, value, error;
    bool operator<(const KronrodSegment& other) const { return error < other.error; }
};

// Gauss-Kronrod 7/15 abscissae and weights.
inline constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                  0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
KronrodSegment kronrod15(F& f, double lo, double hi) {
    const double center = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double fc = f(center);
    double kronrod = fc * kWgk[7];
    double gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double f1 = f(center - dx);
        const double f2 = f(center + dx);
        kronrod += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
    }
    return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [lo, hi].
/// Optional interior breakpoints seed the initial partition.
template <class F>
IntegrationResult integrate_adaptive(F&& f, double lo, double hi, double abs_tol, double rel_tol,
                                     int max_intervals = 4000, std::span<const double> breakpoints = {}) {
    IntegrationResult result;
    if (!(hi > lo)) return result;
    std::priority_queue<detail::KronrodSegment> heap;
    double total = 0.0;
    double total_error = 0.0;
    double prev = lo;
    auto push = [&](double a, double b) {
        auto seg = detail::kronrod15(f, a, b);
        total += seg.value;
        total_error += seg.error;
        heap.push(seg);
    };
    for (double bp : breakpoints) {
        if (bp > prev && bp < hi) {
            push(prev, bp);
            prev = bp;
        }
    }
    push(prev, hi);
    int intervals = static_cast<int>(heap.size());
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total)) && intervals < max_intervals) {
        auto worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_error -= worst.error;
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(mid > worst.lo && mid < worst.hi)) {
            // Interval exhausted at machine precision; keep its contribution.
            total += worst.value;
            total_error += worst.error;
            break;
        }
        push(worst.lo, mid);
        push(mid, worst.hi);
        ++intervals;
    }
    // Re-sum to drop the drift of the running totals.
    double value = 0.0;
    double error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    result.value = value;
    result.error = error;
    result.intervals = intervals;
    result.converged = error <= std::max(abs_tol, rel_tol * std::abs(value)) * 1.0000001;
    return result;
}

/// ∫_0^∞ e^{-λt} y(t) dt for the piecewise-linear interpolant of (grid, values),
/// integrated exactly over [grid.front(), grid.back()].
double laplace_piecewise_linear(std::span<const double> grid, std::span<const double> values, double lambda);

/// ∫_a^b e^{-λt} (ya + (yb - ya)(t - a)/(b - a)) dt, exact.
double laplace_linear_segment(double a, double b, double ya, double yb, double lambda);

}  // namespace tcfou
