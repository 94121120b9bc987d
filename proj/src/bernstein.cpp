#include "tcfou/bernstein.hpp"

#include <cmath>
#include <string>

#include "tcfou/errors.hpp"
#include "tcfou/quadrature.hpp"
#include "tcfou/text.hpp"

namespace tcfou {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ContractError("stability index alpha must lie in (0,1), got " + format_double(alpha));
}

}  // namespace

BernsteinSpec BernsteinSpec::stable(double alpha) {
    check_alpha(alpha);
    return {BernsteinKind::Stable, alpha, 0.0};
}

BernsteinSpec BernsteinSpec::tempered(double alpha, double mu) {
    check_alpha(alpha);
    if (!(mu >= 0.0) || !std::isfinite(mu)) throw ContractError("tempering rate mu must be finite and >= 0");
    return {BernsteinKind::TemperedStable, alpha, mu};
}

BernsteinSpec BernsteinSpec::parse(std::string_view token) {
    const auto parts = split(token, ':');
    if (parts.size() == 2 && parts[0] == "stable") return stable(parse_double_strict(parts[1], "stable alpha"));
    if (parts.size() == 3 && parts[0] == "tempered")
        return tempered(parse_double_strict(parts[1], "tempered alpha"), parse_double_strict(parts[2], "tempered mu"));
    throw ContractError("malformed Bernstein spec token '" + std::string(token) +
                        "' (expected stable:<alpha> or tempered:<alpha>:<mu>)");
}

std::string BernsteinSpec::token() const {
    if (kind_ == BernsteinKind::Stable) return "stable:" + format_double(alpha_);
    return "tempered:" + format_double(alpha_) + ":" + format_double(mu_);
}

double phi_eval(const BernsteinSpec& spec, double lambda) {
    if (!(lambda > 0.0)) throw DomainError("phi_eval: lambda must be positive");
    const double a = spec.alpha();
    if (spec.is_stable() || spec.mu() == 0.0) return std::pow(lambda, a);
    const double mu = spec.mu();
    // (λ+μ)^α − μ^α without cancellation for λ ≪ μ.
    return std::pow(mu, a) * std::expm1(a * std::log1p(lambda / mu));
}

double levy_tail(const BernsteinSpec& spec, double t) {
    if (!(t > 0.0)) throw DomainError("levy_tail: t must be positive");
    const double a = spec.alpha();
    const double gamma_1ma = std::tgamma(1.0 - a);
    if (spec.is_stable() || spec.mu() == 0.0) return std::pow(t, -a) / gamma_1ma;
    const double mu = spec.mu();
    // ∫_t^{t+40/μ} α/Γ(1−α) e^{−μs} s^{−1−α} ds in the log variable s = t e^y;
    // the remainder beyond t + 40/μ is below e^{−40} ν̄_stable(t).
    const double y_max = std::log1p(40.0 / (mu * t));
    auto integrand = [&](double y) {
        const double s = t * std::exp(y);
        return std::exp(-mu * s) * std::pow(s, -a);
    };
    const auto res = integrate_adaptive(integrand, 0.0, y_max, 1e-13 * std::pow(t, -a), 1e-12);
    if (!res.converged) throw NumericError("levy_tail: quadrature did not converge", a / gamma_1ma * res.value, res.error);
    return a / gamma_1ma * res.value;
}

double phi_inverse_real(const BernsteinSpec& spec, double eta) {
    if (!(eta > 0.0)) throw DomainError("phi_inverse_real: eta must be positive");
    const double a = spec.alpha();
    if (spec.is_stable() || spec.mu() == 0.0) return std::pow(eta, 1.0 / a);
    // Bracket: Φ is increasing and concave with Φ(0)=0; expand until Φ(hi) ≥ η.
    double lo = 0.0;
    double hi = 1.0;
    while (phi_eval(spec, hi) < eta) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) throw NumericError("phi_inverse_real: bracketing failed", hi, hi);
    }
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (phi_eval(spec, mid) < eta)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-13 * hi) return 0.5 * (lo + hi);
    }
    throw NumericError("phi_inverse_real: bisection did not converge", 0.5 * (lo + hi), hi - lo);
}

}  // namespace tcfou
