#include "tcfou/subordination.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tcfou/errors.hpp"
#include "tcfou/fou_stats.hpp"
#include "tcfou/simulate.hpp"
#include "tcfou/stable_kernels.hpp"

namespace tcfou {

TimeGridFunction::TimeGridFunction(std::vector<double> grid, std::vector<double> values, Tail tail,
                                   std::vector<double> derivative)
    : grid_(std::move(grid)), values_(std::move(values)), derivative_(std::move(derivative)), tail_(tail) {
    if (grid_.size() < 2) throw ContractError("TimeGridFunction: grid needs at least two points");
    if (grid_.size() != values_.size()) throw ContractError("TimeGridFunction: grid and values differ in length");
    if (!derivative_.empty() && derivative_.size() != grid_.size())
        throw ContractError("TimeGridFunction: derivative samples differ in length from the grid");
    if (grid_[0] != 0.0) throw ContractError("TimeGridFunction: grid must start at 0");
    for (std::size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1])) throw ContractError("TimeGridFunction: grid must be strictly increasing");
    for (double v : values_)
        if (!std::isfinite(v)) throw ContractError("TimeGridFunction: values must be finite");
    for (std::size_t i = 1; i < derivative_.size(); ++i)
        if (!std::isfinite(derivative_[i]))
            throw ContractError("TimeGridFunction: derivative samples must be finite away from t = 0");
    if (tail_.kind == Tail::Kind::Constant && !(std::abs(values_.back() - tail_.level) <= tail_.tolerance))
        throw ContractError("TimeGridFunction: last value differs from the constant tail level by more than the "
                            "declared tolerance");
    const double step = grid_.back() / static_cast<double>(grid_.size() - 1);
    bool uniform = true;
    for (std::size_t i = 1; i < grid_.size() && uniform; ++i)
        uniform = std::abs(grid_[i] - step * static_cast<double>(i)) <= 1e-12 * grid_.back();
    if (uniform) inv_step_ = 1.0 / step;
}

std::size_t TimeGridFunction::locate(double t) const {
    // Index i with grid[i] <= t <= grid[i+1], t inside the grid.
    const std::size_t last = grid_.size() - 2;
    if (inv_step_ > 0.0) {
        auto i = static_cast<std::size_t>(t * inv_step_);
        i = std::min(i, last);
        // Guard against rounding at cell boundaries.
        if (i > 0 && grid_[i] > t) --i;
        if (i < last && grid_[i + 1] < t) ++i;
        return i;
    }
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - grid_.begin() - 1, 0));
    return std::min(i, last);
}

double TimeGridFunction::tail_value(double t) const {
    switch (tail_.kind) {
        case Tail::Kind::Constant: return tail_.level;
        case Tail::Kind::Power: return values_.back() * std::pow(t / grid_.back(), tail_.exponent);
        case Tail::Kind::Forbidden: break;
    }
    throw DomainError("TimeGridFunction: evaluation beyond the grid end with a forbidden tail");
}

double TimeGridFunction::operator()(double t) const {
    if (!(t >= 0.0)) throw DomainError("TimeGridFunction: negative time");
    if (t > grid_.back()) return tail_value(t);
    const std::size_t i = locate(t);
    const double f = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    return values_[i] + f * (values_[i + 1] - values_[i]);
}

double TimeGridFunction::derivative(double t) const {
    if (derivative_.empty()) throw ContractError("TimeGridFunction: no derivative samples");
    if (!(t >= 0.0)) throw DomainError("TimeGridFunction: negative time");
    if (t > grid_.back()) {
        switch (tail_.kind) {
            case Tail::Kind::Constant: return 0.0;
            case Tail::Kind::Power:
                return tail_.exponent * values_.back() / grid_.back() *
                       std::pow(t / grid_.back(), tail_.exponent - 1.0);
            case Tail::Kind::Forbidden: throw DomainError("TimeGridFunction: derivative beyond a forbidden tail");
        }
    }
    const std::size_t i = locate(t);
    const double f = (t - grid_[i]) / (grid_[i + 1] - grid_[i]);
    if (i == 0 && !std::isfinite(derivative_[0])) return derivative_[1];
    return derivative_[i] + f * (derivative_[i + 1] - derivative_[i]);
}

double TimeGridFunction::integral(double a, double b) const {
    if (!(a >= 0.0) || !(b >= a)) throw DomainError("TimeGridFunction::integral: need 0 <= a <= b");
    double sum = 0.0;
    const double end = grid_.back();
    if (a < end) {
        const double hi = std::min(b, end);
        std::size_t i = locate(a);
        double lo = a;
        while (lo < hi) {
            const double right = std::min(grid_[i + 1], hi);
            sum += 0.5 * (right - lo) * ((*this)(lo) + (*this)(right));
            lo = right;
            ++i;
        }
    }
    if (b > end) {
        const double lo = std::max(a, end);
        switch (tail_.kind) {
            case Tail::Kind::Constant: sum += tail_.level * (b - lo); break;
            case Tail::Kind::Power: {
                const double p1 = tail_.exponent + 1.0;
                if (std::abs(p1) < 1e-14)
                    sum += values_.back() * end * std::log(b / lo);
                else
                    sum += values_.back() * end / p1 * (std::pow(b / end, p1) - std::pow(lo / end, p1));
                break;
            }
            case Tail::Kind::Forbidden: throw DomainError("TimeGridFunction::integral: range beyond a forbidden tail");
        }
    }
    return sum;
}

double TimeGridFunction::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    if (tail_.kind == Tail::Kind::Constant) m = std::max(m, std::abs(tail_.level));
    if (tail_.kind == Tail::Kind::Power && tail_.exponent > 0.0 && values_.back() != 0.0)
        return std::numeric_limits<double>::infinity();
    return m;
}

TimeGridFunction TimeGridFunction::times_derivative() const {
    if (derivative_.empty()) throw ContractError("TimeGridFunction: no derivative samples");
    std::vector<double> w(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) w[i] = grid_[i] == 0.0 ? 0.0 : grid_[i] * derivative_[i];
    Tail tail = tail_;
    if (tail_.kind == Tail::Kind::Constant) {
        // z v'(z) vanishes beyond the end of a constant tail.
        tail = Tail::constant(0.0, std::max(tail_.tolerance, 0.0));
        if (!(std::abs(w.back()) <= tail.tolerance))
            throw ContractError("TimeGridFunction: z v'(z) does not vanish at the start of the constant tail");
    }
    return {grid_, std::move(w), tail};
}

namespace {

void require_stable(const BernsteinSpec& spec, const char* what) {
    if (!spec.is_stable())
        throw ContractError(std::string(what) + ": density path only available for stable specs, got " + spec.token() +
                            "; use the Monte Carlo estimators");
}

// Σ_j ω_j h(s_j) with s_j = t^α w_j^{−α}, plus the two truncated ends: for
// w > w_max (s < s_W) the density f(s,t) is flat, for w < w_min the mass is
// below 1e-25.
template <class H, class Small>
double g_form_sum(double alpha, double t, const QuadratureConfig& quad, H&& h, Small&& small_end) {
    const auto table = StableDensityTable::get(alpha, quad.log_step);
    const double ta = std::pow(t, alpha);
    const auto& weights = table->weights();
    const auto& inv = table->node_inv_powers();
    double sum = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) sum += weights[j] * h(ta * inv[j]);
    const double s_w = ta * inv.back();
    const double s_l = ta * inv.front();
    sum += table->upper_mass() * small_end(s_w);
    sum += table->lower_mass() * h(s_l);
    return sum;
}

double forbidden_mass_check(const TimeGridFunction& v, double alpha, double t, const QuadratureConfig& quad) {
    const double mass = inverse_stable_tail(alpha, v.t_end(), t);
    if (mass * v.sup_norm() > quad.tail_bound_budget)
        throw ContractError("subordinate: mass of E(t) beyond the grid end exceeds the tail budget for a function "
                            "with a forbidden tail");
    return mass;
}

// Truncation point for the f-form: the discarded mass weighted by |v| is
// within the tail budget.
double f_form_cutoff(const TimeGridFunction& v, double alpha, double t, const QuadratureConfig& quad) {
    const double ta = std::pow(t, alpha);
    double s = std::max(ta, 1e-300);
    const double bound = v.tail().kind == Tail::Kind::Power ? 0.0 : v.sup_norm();
    for (int it = 0; it < 400; ++it) {
        if (v.tail().kind == Tail::Kind::Forbidden && s >= v.t_end()) return v.t_end();
        const double weight = bound > 0.0 ? bound : 4.0 * std::max(std::abs(v(2.0 * s)), 1e-300);
        if (inverse_stable_tail(alpha, s, t) * weight <= 0.1 * quad.tail_bound_budget) return s;
        s *= 1.25;
    }
    throw NumericError("subordinate_f_form: no truncation point found", s, 0.0);
}

// ∫_0^{s_cut} h(s) f(s,t) ds on Gauss-Legendre panels of width ≤ t^α / 4;
// optionally with a Jacobi first panel for an s^beta factor in h.
template <class H>
double f_form_panels(double alpha, double t, double s_cut, const QuadratureConfig& quad, H&& h, double beta = 0.0) {
    const double ta = std::pow(t, alpha);
    const double width = std::min(0.25 * ta, s_cut / 16.0);
    const auto n_panels = static_cast<std::size_t>(std::ceil(s_cut / width));
    const double step = s_cut / static_cast<double>(n_panels);
    auto integrand = [&](double s) { return h(s) * inverse_stable_density_f(alpha, s, t); };
    double sum = 0.0;
    for (std::size_t k = 0; k < n_panels; ++k) {
        const double a = step * static_cast<double>(k), b = a + step;
        if (k == 0 && beta != 0.0)
            sum += integrate_left_singular([&](double s) { return integrand(s) * std::pow(s, -beta); }, a, b, beta,
                                           quad.n_nodes);
        else
            sum += integrate_gauss_legendre(integrand, a, b, quad.n_nodes);
    }
    return sum;
}

}  // namespace

double subordinate_g_form(const TimeGridFunction& v, const BernsteinSpec& spec, double t, const QuadratureConfig& quad) {
    require_stable(spec, "subordinate");
    quad.validate();
    if (!(t >= 0.0)) throw DomainError("subordinate: t must be non-negative");
    if (t == 0.0) return v(0.0);
    const double a = spec.alpha();
    const bool forbidden = v.tail().kind == Tail::Kind::Forbidden;
    if (forbidden) forbidden_mass_check(v, a, t, quad);
    auto h = [&](double s) { return (forbidden && s > v.t_end()) ? 0.0 : v(s); };
    auto small_end = [&](double s_w) { return s_w > 0.0 ? v.integral(0.0, s_w) / s_w : v(0.0); };
    return g_form_sum(a, t, quad, h, small_end);
}

double subordinate_f_form(const TimeGridFunction& v, const BernsteinSpec& spec, double t, const QuadratureConfig& quad) {
    require_stable(spec, "subordinate");
    quad.validate();
    if (!(t >= 0.0)) throw DomainError("subordinate: t must be non-negative");
    if (t == 0.0) return v(0.0);
    const double a = spec.alpha();
    if (v.tail().kind == Tail::Kind::Forbidden) forbidden_mass_check(v, a, t, quad);
    const double s_cut = f_form_cutoff(v, a, t, quad);
    double sum = f_form_panels(a, t, s_cut, quad, [&](double s) { return v(s); });
    if (v.tail().kind == Tail::Kind::Constant) sum += v.tail().level * inverse_stable_tail(a, s_cut, t);
    return sum;
}

double subordinate(const TimeGridFunction& v, const BernsteinSpec& spec, double t, const QuadratureConfig& quad) {
    if (v.tail().kind == Tail::Kind::Constant) return subordinate_g_form(v, spec, t, quad);
    return subordinate_f_form(v, spec, t, quad);
}

double subordinate_bounded(const std::function<double(double)>& v, double level, const BernsteinSpec& spec, double t,
                           const QuadratureConfig& quad) {
    require_stable(spec, "subordinate");
    quad.validate();
    if (!(t >= 0.0)) throw DomainError("subordinate: t must be non-negative");
    if (t == 0.0) return v(0.0);
    auto h = [&](double s) { return std::isinf(s) ? level : v(s); };
    return g_form_sum(spec.alpha(), t, quad, h, [&](double s_w) { return v(0.5 * s_w); });
}

double weighted_subordinate_bounded(const std::function<double(double)>& v, const BernsteinSpec& spec, double hurst,
                                    double theta, double t, const QuadratureConfig& quad) {
    require_stable(spec, "weighted_subordinate");
    quad.validate();
    if (!(t >= 0.0)) throw DomainError("weighted_subordinate: t must be non-negative");
    if (t == 0.0) return 0.0;
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);
    auto h = [&](double s) { return s > 0.0 && std::isfinite(s) ? ev->variance_prime(s) * v(s) : 0.0; };
    // ∫_0^{s_W} V'(s) v(s) ds ≈ v(s_W/2) V(s_W); divided by s_W to match the mass convention.
    auto small_end = [&](double s_w) { return s_w > 0.0 ? v(0.5 * s_w) * ev->variance(s_w) / s_w : 0.0; };
    return g_form_sum(spec.alpha(), t, quad, h, small_end);
}

double weighted_subordinate(const TimeGridFunction& v, const BernsteinSpec& spec, double hurst, double theta, double t,
                            const QuadratureConfig& quad) {
    require_stable(spec, "weighted_subordinate");
    quad.validate();
    if (!(t >= 0.0)) throw DomainError("weighted_subordinate: t must be non-negative");
    if (t == 0.0) return 0.0;
    const double a = spec.alpha();
    if (v.tail().kind == Tail::Kind::Constant)
        return weighted_subordinate_bounded([&](double s) { return v(s); }, spec, hurst, theta, t, quad);
    if (v.tail().kind == Tail::Kind::Forbidden) forbidden_mass_check(v, a, t, quad);
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);
    const double s_cut = f_form_cutoff(v, a, t, quad);
    auto h = [&](double s) { return s > 0.0 ? ev->variance_prime(s) * v(s) : 0.0; };
    return f_form_panels(a, t, s_cut, quad, h, 2.0 * hurst - 1.0);
}

double subordinate_derivative(const TimeGridFunction& v, double alpha, double t, const QuadratureConfig& quad) {
    if (!v.has_derivative()) throw ContractError("subordinate_derivative: derivative samples are required");
    if (!(t > 0.0)) throw DomainError("subordinate_derivative: t must be positive");
    const auto w = v.times_derivative();
    return alpha / t * subordinate(w, BernsteinSpec::stable(alpha), t, quad);
}

double laplace_transform(const TimeGridFunction& v, double eta, const QuadratureConfig& quad) {
    if (!(eta > 0.0)) throw DomainError("laplace_transform: eta must be positive");
    double sum = laplace_piecewise_linear(v.grid(), v.values(), eta);
    const double end = v.t_end();
    const double decay = std::exp(-eta * end) / eta;
    switch (v.tail().kind) {
        case Tail::Kind::Constant: sum += v.tail().level * decay; break;
        case Tail::Kind::Power: {
            // s = T + x/η with the Gauss-Laguerre weight e^{−x}.
            const auto& rule = gauss_laguerre(quad.n_nodes);
            double tail = 0.0;
            for (std::size_t k = 0; k < rule.size(); ++k)
                tail += rule.weights[k] * std::pow(1.0 + rule.nodes[k] / (eta * end), v.tail().exponent);
            sum += v.values().back() * decay * tail;
            break;
        }
        case Tail::Kind::Forbidden:
            if (decay * v.sup_norm() > quad.tail_bound_budget)
                throw ContractError("laplace_transform: forbidden tail with non-negligible Laplace weight beyond the grid");
            break;
    }
    return sum;
}

double weighted_laplace_LH(const TimeGridFunction& v, double hurst, double theta, double lambda,
                           const QuadratureConfig& quad) {
    quad.validate();
    if (!(lambda > 0.0)) throw DomainError("weighted_laplace_LH: lambda must be positive");
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);
    double t_cut = 45.0 / lambda;
    if (v.tail().kind == Tail::Kind::Forbidden && t_cut > v.t_end()) {
        const double bound = ev->sup_variance_prime() * v.sup_norm() * std::exp(-lambda * v.t_end()) / lambda;
        if (bound > quad.tail_bound_budget)
            throw ContractError("weighted_laplace_LH: forbidden tail with non-negligible weight beyond the grid");
        t_cut = v.t_end();
    }
    const double beta = 2.0 * hurst - 1.0;
    const double width = 0.5 * std::min(theta, 1.0 / lambda);
    // First panel: V'(t) = t^{2H−1} × (entire function of t).
    const double first = std::min(width, t_cut);
    double sum = integrate_left_singular(
        [&](double t) { return std::exp(-lambda * t) * ev->variance_prime(t) * std::pow(t, -beta) * v(t); }, 0.0, first,
        beta, quad.n_nodes);
    for (double a = first; a < t_cut; a += width) {
        const double b = std::min(a + width, t_cut);
        sum += integrate_gauss_legendre([&](double t) { return std::exp(-lambda * t) * ev->variance_prime(t) * v(t); },
                                        a, b, quad.n_nodes);
    }
    return sum;
}

namespace {

// ∫_0^∞ e^{−λt} F(t) dt for a bounded F continuous at 0, in y = log t.
template <class F>
double laplace_of_operator(F&& op, double f0, double bound, double lambda, const QuadratureConfig& quad,
                           const char* what) {
    const double t_lo = std::min(1e-6, 1e-3 * quad.tail_bound_budget / std::max(bound, 1e-300));
    auto integrand = [&](double y) {
        const double t = std::exp(y);
        return t * std::exp(-lambda * t) * op(t);
    };
    const auto r = integrate_adaptive(integrand, std::log(t_lo), std::log(45.0 / lambda),
                                      std::max(quad.abs_tol, 1e-12), quad.rel_tol, 4000);
    if (!r.converged && r.error > 1e3 * std::max(quad.abs_tol, quad.rel_tol * std::abs(r.value)))
        throw NumericError(std::string(what) + ": quadrature did not converge", r.value, r.error);
    return r.value + t_lo * f0;
}

}  // namespace

double laplace_subordination_residual(const TimeGridFunction& v, const BernsteinSpec& spec, double lambda,
                                      const QuadratureConfig& quad) {
    require_stable(spec, "laplace_subordination_residual");
    quad.validate();
    if (!(lambda > 0.0)) throw DomainError("laplace_subordination_residual: lambda must be positive");
    const double phi = phi_eval(spec, lambda);
    const double rhs = phi / lambda * laplace_transform(v, phi, quad);
    const double bound = std::isfinite(v.sup_norm()) ? v.sup_norm() : 1.0;
    const double lhs = laplace_of_operator([&](double t) { return subordinate(v, spec, t, quad); }, v(0.0), bound,
                                           lambda, quad, "laplace_subordination_residual");
    return std::abs(lhs - rhs);
}

double weighted_laplace_residual(const TimeGridFunction& v, const BernsteinSpec& spec, double hurst, double theta,
                                 double lambda, const QuadratureConfig& quad) {
    require_stable(spec, "weighted_laplace_residual");
    quad.validate();
    if (!(lambda > 0.0)) throw DomainError("weighted_laplace_residual: lambda must be positive");
    const double phi = phi_eval(spec, lambda);
    const double rhs = phi / lambda * weighted_laplace_LH(v, hurst, theta, phi, quad);
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);
    const double sup = std::isfinite(v.sup_norm()) ? v.sup_norm() : 1.0;
    const double lhs = laplace_of_operator(
        [&](double t) { return weighted_subordinate(v, spec, hurst, theta, t, quad); }, 0.0,
        sup * ev->sup_variance_prime(), lambda, quad, "weighted_laplace_residual");
    return std::abs(lhs - rhs);
}

EmpiricalEstimate subordinate_empirical(const TimeGridFunction& v, const PathEnsemble& inverse_paths,
                                        std::size_t time_index) {
    if (inverse_paths.tag != ProcessTag::InverseSubordinator)
        throw ContractError("subordinate_empirical: ensemble must hold inverse-subordinator paths");
    if (time_index >= inverse_paths.n_times()) throw ContractError("subordinate_empirical: time index out of range");
    const std::size_t n = inverse_paths.n_paths;
    if (n < 2) throw ContractError("subordinate_empirical: need at least two paths");
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
        const double x = v(inverse_paths.at(p, time_index));
        sum += x;
        sum_sq += x * x;
    }
    const double nn = static_cast<double>(n);
    const double mean = sum / nn;
    const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
    return {mean, std::sqrt(var / nn)};
}

}  // namespace tcfou
