#include "tcfou/fou_stats.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "tcfou/errors.hpp"
#include "tcfou/stable_kernels.hpp"
#include "tcfou/subordination.hpp"
#include "tcfou/text.hpp"

namespace tcfou {

namespace {

constexpr std::size_t kCacheLimit = std::size_t{1} << 20;

}  // namespace

VarianceEvaluator::VarianceEvaluator(double hurst, double theta, QuadratureConfig quad)
    : hurst_(hurst), theta_(theta), quad_(quad) {
    if (!(hurst > 0.5 && hurst < 1.0)) throw ContractError("Hurst index must lie in (1/2, 1), got " + format_double(hurst));
    if (!(theta > 0.0) || !std::isfinite(theta)) throw ContractError("relaxation time theta must be positive");
    quad_.validate();
}

std::shared_ptr<VarianceEvaluator> VarianceEvaluator::shared(double hurst, double theta, const QuadratureConfig& quad) {
    static std::mutex mutex;
    static std::map<std::tuple<double, double, int>, std::shared_ptr<VarianceEvaluator>> registry;
    std::lock_guard lock(mutex);
    auto key = std::make_tuple(hurst, theta, quad.n_nodes);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
    auto ev = std::make_shared<VarianceEvaluator>(hurst, theta, quad);
    registry.emplace(key, ev);
    return ev;
}

double VarianceEvaluator::compute_variance(double t) const {
    const double h = hurst_, th = theta_;
    const double beta = 2.0 * h - 2.0;
    const int n = quad_.n_nodes;
    auto smooth = [&](double w) { return std::exp(-w / th) * std::expm1(-2.0 * (t - w) / th); };
    const double first = std::min(t, 2.0 * th);
    double sum = integrate_left_singular(smooth, 0.0, first, beta, n);
    // Beyond 50θ the factor e^{−w/θ} is below e^{−50}.
    const double stop = std::min(t, 50.0 * th);
    for (double a = first; a < stop; a += 2.0 * th) {
        const double b = std::min(a + 2.0 * th, stop);
        sum += integrate_gauss_legendre([&](double w) { return std::pow(w, beta) * smooth(w); }, a, b, n);
    }
    return -h * (2.0 * h - 1.0) * th * sum;
}

double VarianceEvaluator::compute_variance_prime(double t) const {
    // V'(t) = 2Hβ θ^β e^{−x} D(x) with x = t/θ, β = 2H−1 and
    // D(x) = ∫_0^x w^{β−1} e^{−(x−w)} dw.
    const double beta = 2.0 * hurst_ - 1.0;
    const double x = t / theta_;
    double d = 0.0;
    if (x <= 45.0) {
        // D(x) = e^{−x} x^β Σ x^k / (k! (β+k)); all terms positive.
        double term = 1.0, sum = 1.0 / beta;
        for (int k = 1; k < 400; ++k) {
            term *= x / k;
            const double add = term / (beta + k);
            sum += add;
            if (add < 1e-17 * sum) break;
        }
        d = std::exp(beta * std::log(x) - x) * sum;
    } else {
        // D(x) ~ x^{β−1} Σ_k Π_{j≤k} (j−β) x^{−k}, truncated at its smallest term.
        double term = 1.0, sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            const double next = term * (k - beta) / x;
            if (next > term || next < 1e-18 * sum) break;
            term = next;
            sum += term;
        }
        d = std::pow(x, beta - 1.0) * sum;
    }
    return 2.0 * hurst_ * beta * std::pow(theta_, beta) * std::exp(-x) * d;
}

double VarianceEvaluator::variance(double t) const {
    if (!(t >= 0.0)) throw DomainError("variance_v2: t must be non-negative");
    if (t == 0.0) return 0.0;
    // expm1(−2(t−w)/θ) = −1 in double precision for all w ≤ 50θ once t ≥ 70θ.
    t = std::min(t, 70.0 * theta_);
    {
        std::shared_lock lock(mutex_);
        auto it = v_cache_.find(t);
        if (it != v_cache_.end()) return it->second;
    }
    const double value = compute_variance(t);
    std::unique_lock lock(mutex_);
    if (v_cache_.size() >= kCacheLimit) v_cache_.clear();
    return v_cache_.emplace(t, value).first->second;
}

double VarianceEvaluator::variance_prime(double t) const {
    if (!(t > 0.0)) throw DomainError("variance_v2_prime: t must be positive");
    return compute_variance_prime(t);
}

double VarianceEvaluator::stationary_variance() const {
    return std::pow(theta_, 2.0 * hurst_) * hurst_ * std::tgamma(2.0 * hurst_);
}

double VarianceEvaluator::sup_variance_prime() const {
    // V' rises like 2H t^{2H−1} and decays like e^{−t/θ}; golden-section
    // search for the single interior maximum on (0, 20θ).
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 1e-6 * theta_, b = 20.0 * theta_;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = compute_variance_prime(c), fd = compute_variance_prime(d);
    for (int i = 0; i < 120 && b - a > 1e-10 * theta_; ++i) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = compute_variance_prime(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = compute_variance_prime(d);
        }
    }
    return std::max(fc, fd);
}

std::size_t VarianceEvaluator::cache_size() const {
    std::shared_lock lock(mutex_);
    return v_cache_.size();
}

double variance_v2(double hurst, double theta, double t) { return VarianceEvaluator::shared(hurst, theta)->variance(t); }

double variance_v2_prime(double hurst, double theta, double t) {
    return VarianceEvaluator::shared(hurst, theta)->variance_prime(t);
}

double variance_v2_prime_fd(double hurst, double theta, double t) {
    if (!(t > 0.0)) throw DomainError("variance_v2_prime_fd: t must be positive");
    const auto ev = VarianceEvaluator::shared(hurst, theta);
    const double h = std::max(1e-4, 1e-3 * t);
    if (t <= 2.0 * h) throw DomainError("variance_v2_prime_fd: t too small for the difference stencil");
    auto d4 = [&](double s) {
        return (-ev->variance(t + 2.0 * s) + 8.0 * ev->variance(t + s) - 8.0 * ev->variance(t - s) +
                ev->variance(t - 2.0 * s)) /
               (12.0 * s);
    };
    return (16.0 * d4(0.5 * h) - d4(h)) / 15.0;
}

double gaussian_density_pH(double hurst, double theta, double x, double t) {
    if (!(t > 0.0)) throw DomainError("gaussian_density_pH: t must be positive");
    const double var = variance_v2(hurst, theta, t);
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

namespace {

double double_factorial_odd(int n) {
    double r = 1.0;
    for (int k = 2 * n - 1; k > 1; k -= 2) r *= k;
    return r;
}

}  // namespace

double moments_subordinated(int n, double hurst, double theta, const BernsteinSpec& spec, double t,
                            const QuadratureConfig& quad) {
    if (n < 1) throw ContractError("moments_subordinated: n must be positive");
    if (!(t >= 0.0)) throw DomainError("moments_subordinated: t must be non-negative");
    if (t == 0.0) return 0.0;
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);
    const double factor = double_factorial_odd(n);
    auto moment = [&](double s) { return factor * std::pow(ev->variance(s), n); };
    const double level = factor * std::pow(ev->stationary_variance(), n);
    return subordinate_bounded(moment, level, spec, t, quad);
}

double moments_subordinated_limit(int n, double hurst, double theta) {
    const double base = 2.0 * std::pow(theta, 2.0 * hurst) * hurst * std::tgamma(2.0 * hurst);
    return std::pow(base, n) * std::tgamma(0.5 * (2.0 * n + 1.0)) / std::sqrt(std::numbers::pi);
}

std::vector<InverseMomentRow> inverse_moment_diagnostic(double alpha, double hurst, double t,
                                                        const std::vector<double>& cutoffs) {
    if (!(t > 0.0)) throw DomainError("inverse_moment_diagnostic: t must be positive");
    if (!(hurst >= 0.0)) throw DomainError("inverse_moment_diagnostic: H must be non-negative");
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        if (!(cutoffs[i] > 0.0)) throw ContractError("inverse_moment_diagnostic: cutoffs must be positive");
        if (i > 0 && !(cutoffs[i] < cutoffs[i - 1])) throw ContractError("inverse_moment_diagnostic: cutoffs must decrease");
    }
    // Upper end where P(E(t) > s) is negligible.
    double s_hi = std::pow(t, alpha);
    while (inverse_stable_tail(alpha, s_hi, t) > 1e-18) s_hi *= 2.0;
    std::vector<InverseMomentRow> rows;
    for (double eps : cutoffs) {
        auto integrate = [&](double power) {
            // In y = log s the integrand is s^{1−p} f(s,t).
            auto f = [&](double y) {
                const double s = std::exp(y);
                return std::pow(s, 1.0 - power) * inverse_stable_density_f(alpha, s, t);
            };
            const auto r = integrate_adaptive(f, std::log(eps), std::log(s_hi), 1e-13, 1e-11);
            if (!r.converged) throw NumericError("inverse_moment_diagnostic: quadrature did not converge", r.value, r.error);
            return r.value;
        };
        rows.push_back({eps, integrate(hurst), integrate(2.0 * hurst)});
    }
    return rows;
}

double fitted_divergence_exponent(const std::vector<InverseMomentRow>& rows) {
    if (rows.size() < 2) throw ContractError("fitted_divergence_exponent: need at least two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
        const double x = -std::log(r.cutoff);
        const double y = std::log(r.j_value);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tcfou
