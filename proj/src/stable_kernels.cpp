#include "tcfou/stable_kernels.hpp"

#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

#include "tcfou/errors.hpp"
#include "tcfou/simulate.hpp"
#include "tcfou/text.hpp"

namespace tcfou {

namespace {

void check_index(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("stable index must lie in (0,1), got " + format_double(alpha));
}

// Kanter's representation. With k = x^{−α/(1−α)} and
//   A(φ) = sin(αφ)^{α/(1−α)} sin((1−α)φ) / sin(φ)^{1/(1−α)},
// P(σ ≤ x) = (1/π) ∫_0^π e^{−kA} dφ and g(x) = α/((1−α)πx) ∫_0^π kA e^{−kA} dφ.
// A is increasing from (1−α)α^{α/(1−α)} at 0 to ∞ at π. The upper half of
// the range is integrated in ψ = π − φ so that sin ψ keeps full precision.
struct Kanter {
    double alpha;
    double log_k;

    Kanter(double a, double x) : alpha(a), log_k(-a / (1.0 - a) * std::log(x)) {}

    double log_a_phi(double phi) const {
        const double a = alpha;
        if (phi <= 0.0) return (a / (1.0 - a)) * std::log(a) + std::log1p(-a);
        return (a / (1.0 - a)) * std::log(std::sin(a * phi)) + std::log(std::sin((1.0 - a) * phi)) -
               std::log(std::sin(phi)) / (1.0 - a);
    }
    double log_a_psi(double psi) const {
        const double a = alpha;
        const double phi = std::numbers::pi - psi;
        return (a / (1.0 - a)) * std::log(std::sin(a * phi)) + std::log(std::sin((1.0 - a) * phi)) -
               std::log(std::sin(psi)) / (1.0 - a);
    }

    // Parameter where kA = 1, located by bisection on the monotone log A.
    // Returns {half, position}: half 0 → φ in [0, π/2], half 1 → ψ in (0, π/2].
    std::pair<int, double> crossover() const {
        const double target = -log_k;
        const double mid = log_a_phi(0.5 * std::numbers::pi);
        if (target <= log_a_phi(0.0)) return {0, 0.0};
        if (target <= mid) {
            double lo = 0.0, hi = 0.5 * std::numbers::pi;
            for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
                const double m = 0.5 * (lo + hi);
                (log_a_phi(m) < target ? lo : hi) = m;
            }
            return {0, 0.5 * (lo + hi)};
        }
        double lo = 0.0, hi = 0.5 * std::numbers::pi;  // in ψ; log A decreases in ψ
        for (int i = 0; i < 2000 && hi - lo > 1e-15 * hi; ++i) {
            const double m = 0.5 * (lo + hi);
            (log_a_psi(m) > target ? lo : hi) = m;
        }
        return {1, 0.5 * (lo + hi)};
    }
};

// Integrates h(kA) over φ ∈ (0, π) using the two half-range parameterizations.
template <class H>
double kanter_integral(const Kanter& kan, H&& h) {
    const auto [half, pos] = kan.crossover();
    auto in_phi = [&](double phi) { return h(std::exp(kan.log_k + kan.log_a_phi(phi))); };
    auto in_psi = [&](double psi) { return h(std::exp(kan.log_k + kan.log_a_psi(psi))); };
    const double quarter = 0.5 * std::numbers::pi;
    constexpr double rel = 1e-13;
    constexpr double abs = 1e-300;
    std::array<double, 3> bp_phi{}, bp_psi{};
    std::span<const double> sp_phi, sp_psi;
    if (half == 0 && pos > 0.0) {
        bp_phi = {0.5 * pos, pos, std::min(1.5 * pos, 0.5 * (pos + quarter))};
        sp_phi = bp_phi;
    } else if (half == 1) {
        bp_psi = {0.1 * pos, pos, std::min(10.0 * pos, 0.5 * (pos + quarter))};
        sp_psi = bp_psi;
    }
    const auto r1 = integrate_adaptive(in_phi, 0.0, quarter, abs, rel, 4000, sp_phi);
    const auto r2 = integrate_adaptive(in_psi, 0.0, quarter, abs, rel, 4000, sp_psi);
    return r1.value + r2.value;
}

}  // namespace

double stable_density_g(double alpha, double x) {
    check_index(alpha);
    if (!(x > 0.0)) throw DomainError("stable_density_g: x must be positive");
    if (!std::isfinite(x)) return 0.0;
    const Kanter kan(alpha, x);
    // Whole integrand below e^{−745}: g underflows.
    if (kan.log_k + kan.log_a_phi(0.0) > 745.0) return 0.0;
    const double integral = kanter_integral(kan, [](double ka) { return ka * std::exp(-ka); });
    return alpha / ((1.0 - alpha) * std::numbers::pi * x) * integral;
}

double stable_cdf(double alpha, double x) {
    check_index(alpha);
    if (x <= 0.0) return 0.0;
    if (!std::isfinite(x)) return 1.0;
    const Kanter kan(alpha, x);
    if (kan.log_k + kan.log_a_phi(0.0) > 745.0) return 0.0;
    return kanter_integral(kan, [](double ka) { return std::exp(-ka); }) / std::numbers::pi;
}

double stable_survival(double alpha, double x) {
    check_index(alpha);
    if (x <= 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    const Kanter kan(alpha, x);
    return kanter_integral(kan, [](double ka) { return -std::expm1(-ka); }) / std::numbers::pi;
}

double inverse_stable_density_f(double alpha, double s, double t) {
    check_index(alpha);
    if (!(t > 0.0)) throw DomainError("inverse_stable_density_f: t must be positive");
    if (!(s >= 0.0)) throw DomainError("inverse_stable_density_f: s must be non-negative");
    if (s == 0.0) return std::pow(t, -alpha) / std::tgamma(1.0 - alpha);
    const double x = t * std::pow(s, -1.0 / alpha);
    const double g = stable_density_g(alpha, x);
    if (g == 0.0) return 0.0;
    return t / alpha * std::pow(s, -1.0 - 1.0 / alpha) * g;
}

double inverse_stable_tail(double alpha, double s, double t) {
    check_index(alpha);
    if (!(t > 0.0)) throw DomainError("inverse_stable_tail: t must be positive");
    if (s <= 0.0) return 1.0;
    return stable_cdf(alpha, t * std::pow(s, -1.0 / alpha));
}

StableDensityTable::StableDensityTable(double alpha, double log_step) : alpha_(alpha), log_step_(log_step) {
    check_index(alpha);
    if (!(log_step > 0.0 && log_step <= 0.5)) throw ContractError("StableDensityTable: log_step must lie in (0, 0.5]");
    const double h = log_step;
    // Left end: w g(w) below 1e-25 (the left tail decays super-exponentially).
    double y_min = 0.0;
    while (stable_density_g(alpha, std::exp(y_min)) * std::exp(y_min) >= 1e-25) y_min -= h;
    // Right end: P(σ > W) ≈ W^{−α}/Γ(1−α); stop at W^{−α} = 1e-7.
    const double y_target = 7.0 * std::log(10.0) / alpha;
    const auto n = static_cast<std::size_t>(std::ceil((y_target - y_min) / h)) + 1;
    nodes_.resize(n);
    values_.resize(n);
    weights_.resize(n);
    inv_powers_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double w = std::exp(y_min + h * static_cast<double>(j));
        nodes_[j] = w;
        values_[j] = stable_density_g(alpha, w);
        inv_powers_[j] = std::pow(w, -alpha);
        weights_[j] = h * w * values_[j] * ((j == 0 || j + 1 == n) ? 0.5 : 1.0);
    }
    lower_mass_ = stable_cdf(alpha, nodes_.front());
    upper_mass_ = stable_survival(alpha, nodes_.back());
}

double StableDensityTable::trapezoid_mass() const {
    double m = 0.0;
    for (double w : weights_) m += w;
    return m;
}

std::shared_ptr<const StableDensityTable> StableDensityTable::get(double alpha, double log_step) {
    static std::mutex mutex;
    static std::map<std::pair<double, double>, std::shared_ptr<const StableDensityTable>> cache;
    {
        std::lock_guard lock(mutex);
        auto it = cache.find({alpha, log_step});
        if (it != cache.end()) return it->second;
    }
    // Built outside the lock; a concurrent duplicate build is discarded.
    auto table = std::make_shared<const StableDensityTable>(alpha, log_step);
    std::lock_guard lock(mutex);
    return cache.emplace(std::make_pair(alpha, log_step), std::move(table)).first->second;
}

double laplace_identity_residual(const BernsteinSpec& spec, double s, double lambda, const QuadratureConfig& quad) {
    quad.validate();
    if (!(lambda > 0.0)) throw DomainError("laplace_identity_residual: lambda must be positive");
    if (!(s >= 0.0)) throw DomainError("laplace_identity_residual: s must be non-negative");
    if (!spec.is_stable())
        throw ContractError("laplace_identity_residual: no density path for " + spec.token() +
                            "; use laplace_identity_empirical");
    const double a = spec.alpha();
    const double phi = phi_eval(spec, lambda);
    const double rhs = phi / lambda * std::exp(-s * phi);
    // ∫ e^{−λt} f(s,t) dt in y = log t. The integrand is t f(s,t) e^{−λt}:
    // for s = 0 it behaves like t^{1−α} at the left end, so the cut at
    // t_lo = tiny^{1/(1−α)} leaves less than 1e-12 behind; the right cut at
    // 42/λ leaves at most e^{−42} sup f.
    const double t_lo = std::pow(1e-13, 1.0 / (1.0 - a));
    const double y_lo = std::log(t_lo);
    const double y_hi = std::log(42.0 / lambda);
    auto integrand = [&](double y) {
        const double t = std::exp(y);
        return t * std::exp(-lambda * t) * inverse_stable_density_f(a, s, t);
    };
    std::array<double, 1> bp{s > 0.0 ? std::log(s) / a : 0.0};
    const auto res = integrate_adaptive(integrand, y_lo, y_hi, quad.abs_tol, quad.rel_tol, 4000, bp);
    if (!res.converged) throw NumericError("laplace_identity_residual: quadrature did not converge", res.value, res.error);
    return std::abs(res.value - rhs);
}

EmpiricalLaplaceCheck laplace_identity_empirical(const BernsteinSpec& spec, const PathEnsemble& inverse_paths,
                                                 double eta, double lambda) {
    if (inverse_paths.tag != ProcessTag::InverseSubordinator)
        throw ContractError("laplace_identity_empirical: ensemble must hold inverse-subordinator paths");
    if (!(lambda > 0.0) || !(eta > 0.0)) throw DomainError("laplace_identity_empirical: lambda and eta must be positive");
    const auto& grid = inverse_paths.time_grid;
    const std::size_t nt = grid.size();
    const std::size_t np = inverse_paths.n_paths;
    if (nt < 3 || np < 2) throw ContractError("laplace_identity_empirical: ensemble too small");

    // Per-path Laplace functional, so that its spread gives the standard error.
    std::vector<double> row(nt), coarse_row;
    double sum = 0.0, sum_sq = 0.0, mean_end = 0.0, coarse_sum = 0.0;
    std::vector<double> coarse_grid;
    for (std::size_t j = 0; j < nt; j += 2) coarse_grid.push_back(grid[j]);
    if ((nt - 1) % 2 != 0) coarse_grid.push_back(grid.back());
    coarse_row.resize(coarse_grid.size());
    for (std::size_t p = 0; p < np; ++p) {
        for (std::size_t j = 0; j < nt; ++j) row[j] = std::exp(-eta * inverse_paths.at(p, j));
        const double v = laplace_piecewise_linear(grid, row, lambda);
        sum += v;
        sum_sq += v * v;
        mean_end += row.back();
        std::size_t c = 0;
        for (std::size_t j = 0; j < nt; j += 2) coarse_row[c++] = row[j];
        if (c < coarse_row.size()) coarse_row[c] = row.back();
        coarse_sum += laplace_piecewise_linear(coarse_grid, coarse_row, lambda);
    }
    const double n = static_cast<double>(np);
    const double mean = sum / n;
    mean_end /= n;
    const double var = std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0));
    // Beyond the grid, E[e^{−ηE(t)}] lies in [0, its value at T].
    const double tail = mean_end * std::exp(-lambda * grid.back()) / lambda;
    EmpiricalLaplaceCheck out;
    const double phi = phi_eval(spec, lambda);
    out.rhs = phi / (lambda * (phi + eta));
    out.lhs = mean + 0.5 * tail;
    out.residual = std::abs(out.lhs - out.rhs);
    out.std_error = std::sqrt(var / n);
    const double lattice = -std::expm1(-eta * inverse_paths.y_step) / lambda;
    const double interpolation = std::abs(mean - coarse_sum / n);
    out.bias_bound = 0.5 * tail + lattice + interpolation;
    return out;
}

}  // namespace tcfou
