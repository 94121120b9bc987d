#include "tcfou/caputo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "tcfou/errors.hpp"

namespace tcfou {

namespace {

constexpr int kChebNodes = 16;

struct ChebyshevPoints {
    double x[kChebNodes];
    double w[kChebNodes];
    ChebyshevPoints() {
        for (int k = 0; k < kChebNodes; ++k) {
            const double angle = std::numbers::pi * (k + 0.5) / kChebNodes;
            x[k] = std::cos(angle);
            w[k] = ((k % 2) ? -1.0 : 1.0) * std::sin(angle);
        }
    }
};

const ChebyshevPoints& cheb() {
    static const ChebyshevPoints points;
    return points;
}

double cheb_node(int k) { return cheb().x[k]; }

// Barycentric interpolation at the Chebyshev points of the first kind.
double cheb_eval(const double* values, double x) {
    const auto& c = cheb();
    double num = 0.0, den = 0.0;
    for (int k = 0; k < kChebNodes; ++k) {
        const double diff = x - c.x[k];
        if (diff == 0.0) return values[k];
        const double w = c.w[k] / diff;
        num += w * values[k];
        den += w;
    }
    return num / den;
}

}  // namespace

CaputoWorkspace::CaputoWorkspace(BernsteinSpec spec, std::vector<double> grid, double r_extent)
    : spec_(spec), grid_(std::move(grid)) {
    if (grid_.size() < 2) throw ContractError("CaputoWorkspace: grid needs at least two points");
    double min_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < grid_.size(); ++i) {
        if (!(grid_[i] > grid_[i - 1])) throw ContractError("CaputoWorkspace: grid must be strictly increasing");
        min_step = std::min(min_step, grid_[i] - grid_[i - 1]);
    }
    if (!spec_.is_stable()) {
        const double span = grid_.back() - grid_.front();
        const double r_hi = std::max(r_extent, 2.0 * span);
        // Below e^{−46}, q(r) = r^α ν̄(r) equals q(0) to about μ^α r^α ~ 1e-10.
        y_lo_ = std::min(std::floor(std::log(1e-6 * min_step)), -46.0);
        n_panels_ = static_cast<std::size_t>(std::ceil(std::log(r_hi) - y_lo_));
        table_.resize(n_panels_ * kChebNodes);
        const double a = spec_.alpha();
        for (std::size_t p = 0; p < n_panels_; ++p)
            for (int k = 0; k < kChebNodes; ++k) {
                const double y = y_lo_ + static_cast<double>(p) + 0.5 * (1.0 + cheb_node(k));
                table_[p * kChebNodes + k] = a * y + std::log(tcfou::levy_tail(spec_, std::exp(y)));
            }
    }
    kernel_nodes_.reserve(grid_.size() - 1);
    for (std::size_t k = 1; k < grid_.size(); ++k) kernel_nodes_.push_back(levy_tail(grid_[k] - grid_[0]));
}

double CaputoWorkspace::levy_tail(double r) const {
    if (spec_.is_stable()) return tcfou::levy_tail(spec_, r);
    if (!(r > 0.0)) throw DomainError("levy_tail: t must be positive");
    const double y = std::log(r);
    // Offsets below the table use its left end value of q.
    const double u = std::max(y - y_lo_, 0.0);
    if (u >= 0.0 && u < static_cast<double>(n_panels_)) {
        const auto p = static_cast<std::size_t>(u);
        const double x = 2.0 * (u - static_cast<double>(p)) - 1.0;
        return std::exp(cheb_eval(&table_[p * kChebNodes], x) - spec_.alpha() * y);
    }
    {
        std::lock_guard lock(mutex_);
        auto it = memo_.find(r);
        if (it != memo_.end()) return it->second;
    }
    const double value = tcfou::levy_tail(spec_, r);
    std::lock_guard lock(mutex_);
    return memo_.emplace(r, value).first->second;
}

namespace {

// Cells closer than this many widths to t use the exact moments.
constexpr double kNearCells = 8.0;

// ∫_a^b (t−τ)^{−α}/Γ(1−α) (d_a + (d_b − d_a)(τ−a)/(b−a)) dτ, with A = t−a, B = t−b.
double stable_cell(double alpha, double t, double a, double b, double da, double db) {
    const double h = b - a;
    const double big_a = t - a, big_b = t - b;
    if (big_b < kNearCells * h) {
        const double m0 = (std::pow(big_a, 1.0 - alpha) - std::pow(big_b, 1.0 - alpha)) / std::tgamma(2.0 - alpha);
        const double m1 =
            (big_a * m0 - (std::pow(big_a, 2.0 - alpha) - std::pow(big_b, 2.0 - alpha)) /
                                  ((2.0 - alpha) * std::tgamma(1.0 - alpha))) /
            h;
        return da * m0 + (db - da) * m1;
    }
    const double g = std::tgamma(1.0 - alpha);
    return integrate_gauss_legendre(
        [&](double tau) { return std::pow(t - tau, -alpha) / g * (da + (db - da) * (tau - a) / h); }, a, b, 6);
}

double tempered_cell(const CaputoWorkspace& ws, double t, double a, double b, double da, double db, int n) {
    const double alpha = ws.spec().alpha();
    const double h = b - a;
    auto lin = [&](double tau) { return da + (db - da) * (tau - a) / h; };
    if (t - b <= 0.0) {
        // ν̄(r) = r^{−α} q(r) with q bounded; Jacobi weight on (t−τ)^{−α}.
        // r is formed from the node offset so it stays positive on slivers.
        const auto& rule = gauss_jacobi(n, -alpha, 0.0);
        const double half = 0.5 * h;
        double sum = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double r = half * (1.0 - rule.nodes[k]);
            sum += rule.weights[k] * std::pow(r, alpha) * ws.levy_tail(r) * lin(b - r);
        }
        return sum * std::pow(half, 1.0 - alpha);
    }
    const double gap = t - b;
    const int nodes = gap < kNearCells * h ? n : (gap < 8.0 * kNearCells * h ? 8 : 4);
    return integrate_gauss_legendre([&](double tau) { return ws.levy_tail(t - tau) * lin(tau); }, a, b, nodes);
}

double caputo_impl(const TimeGridFunction& u, const CaputoWorkspace* ws, const BernsteinSpec& spec, double t,
                   const QuadratureConfig& quad) {
    if (!u.has_derivative()) throw ContractError("caputo_phi_derivative: derivative samples are required");
    if (!(t >= 0.0)) throw DomainError("caputo_phi_derivative: t must be non-negative");
    if (t == 0.0) return 0.0;
    if (t > u.t_end() && u.tail().kind != Tail::Kind::Constant)
        throw DomainError("caputo_phi_derivative: t beyond the grid end needs a constant tail");
    const auto& g = u.grid();
    const auto& d = u.derivative_samples();
    const auto& v = u.values();
    const double upper = std::min(t, u.t_end());
    const double alpha = spec.alpha();
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < g.size() && g[i] < upper; ++i) {
        const double a = g[i];
        const double b = std::min(g[i + 1], upper);
        const double width = g[i + 1] - g[i];
        double da = d[i], db = d[i + 1];
        if (!std::isfinite(d[i])) {
            // Singular derivative at t = 0: constant secant slope on the first cell.
            da = db = (v[i + 1] - v[i]) / width;
        }
        if (b < g[i + 1]) db = da + (db - da) * (b - a) / width;
        if (spec.is_stable())
            sum += stable_cell(alpha, t, a, b, da, db);
        else
            sum += tempered_cell(*ws, t, a, b, da, db, quad.n_nodes);
    }
    return sum;
}

}  // namespace

double caputo_phi_derivative(const TimeGridFunction& u, const BernsteinSpec& spec, double t,
                             const QuadratureConfig& quad) {
    if (spec.is_stable()) return caputo_impl(u, nullptr, spec, t, quad);
    CaputoWorkspace ws(spec, u.grid());
    return caputo_impl(u, &ws, spec, t, quad);
}

double caputo_phi_derivative(const TimeGridFunction& u, const CaputoWorkspace& ws, double t,
                             const QuadratureConfig& quad) {
    return caputo_impl(u, &ws, ws.spec(), t, quad);
}

double laplace_caputo_residual(const TimeGridFunction& u, const BernsteinSpec& spec, double lambda,
                               const QuadratureConfig& quad) {
    quad.validate();
    if (!(lambda > 0.0)) throw DomainError("laplace_caputo_residual: lambda must be positive");
    if (u.tail().kind != Tail::Kind::Constant)
        throw ContractError("laplace_caputo_residual: u needs a constant tail");
    const auto& rule = gauss_laguerre(quad.n_nodes);
    const CaputoWorkspace ws(spec, u.grid(), u.t_end() + rule.nodes.back() / lambda);
    // ∂^Φ u(t) grows like t^{1−α} from 0, so the integral over (0, t_lo) is
    // below sup|u'| t_lo^{2−α}; the rest is integrated in y = log t.
    const double t_lo = 1e-9 * std::min(1.0, u.t_end());
    auto integrand = [&](double y) {
        const double t = std::exp(y);
        return t * std::exp(-lambda * t) * caputo_impl(u, &ws, spec, t, quad);
    };
    const auto& g = u.grid();
    std::vector<double> breaks;
    for (double x : {0.1, 1.0, 10.0}) {
        const double b = x / lambda;
        if (b > t_lo && b < u.t_end()) breaks.push_back(std::log(b));
    }
    std::sort(breaks.begin(), breaks.end());
    // ∂^Φ u has weak singularities (t − τ_i)^{2−α} at the grid nodes, so the
    // tolerance is held at the level of the interpolation error of u.
    const auto res = integrate_adaptive(integrand, std::log(t_lo), std::log(g.back()), std::max(quad.abs_tol, 1e-9),
                                        std::max(quad.rel_tol, 1e-9), 600, breaks);
    if (!res.converged && res.error > 1e-7)
        throw NumericError("laplace_caputo_residual: quadrature did not converge", res.value, res.error);
    double lhs = res.value;
    // Beyond the grid: t = T + x/λ with the Gauss-Laguerre weight e^{−x}.
    double tail = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k)
        tail += rule.weights[k] * caputo_impl(u, &ws, spec, u.t_end() + rule.nodes[k] / lambda, quad);
    lhs += std::exp(-lambda * u.t_end()) / lambda * tail;
    const double phi = phi_eval(spec, lambda);
    const double rhs = phi * laplace_transform(u, lambda, quad) - phi / lambda * u(0.0);
    return std::abs(lhs - rhs);
}

ExtremalCheck extremal_point_check(const TimeGridFunction& u, const BernsteinSpec& spec, double t0,
                                   const QuadratureConfig& quad) {
    if (!(t0 > 0.0) || t0 > u.t_end()) throw DomainError("extremal_point_check: t0 must lie in (0, t_end]");
    const auto& vals = u.values();
    const double top = *std::max_element(vals.begin(), vals.end());
    const double tolerance = 1e-9 * std::max(1.0, std::abs(top));
    if (u(t0) < top - tolerance)
        throw ContractError("extremal_point_check: t0 is not a maximum point of u on the grid");
    ExtremalCheck out;
    out.value = caputo_phi_derivative(u, spec, t0, quad);
    out.passed = out.value >= -1e-6;
    return out;
}

}  // namespace tcfou
