#pragma once

#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "tcfou/bernstein.hpp"
#include "tcfou/quadrature.hpp"

namespace tcfou {

/// Variance V(t) of the fOU started at 0 (memoized) and its derivative.
///
///   V(t)  = H(2H−1) e^{−2t/θ} ∫∫_{[0,t]²} e^{(u+v)/θ} |u−v|^{2H−2} du dv
///         = −H(2H−1) θ ∫_0^t w^{2H−2} e^{−w/θ} expm1(−2(t−w)/θ) dw
///   V'(t) = 2H(2H−1) e^{−t/θ} ∫_0^t (t−r)^{2H−2} e^{−r/θ} dr
///
/// V uses a Gauss-Jacobi panel at the singular end and Gauss-Legendre panels
/// of width 2θ elsewhere. V' reduces to x^β e^{−2x} Σ x^k/(k!(β+k)) with
/// x = t/θ, β = 2H−1, switching to the asymptotic series for x > 45.
class VarianceEvaluator {
public:
    VarianceEvaluator(double hurst, double theta, QuadratureConfig quad = {});

    /// Shared evaluator for (H, θ, quad.n_nodes).
    static std::shared_ptr<VarianceEvaluator> shared(double hurst, double theta, const QuadratureConfig& quad = {});

    double hurst() const noexcept { return hurst_; }
    double theta() const noexcept { return theta_; }

    double variance(double t) const;
    double variance_prime(double t) const;
    /// θ^{2H} H Γ(2H), the limit of V at infinity.
    double stationary_variance() const;
    /// sup V' over (0, ∞), attained at an interior maximum.
    double sup_variance_prime() const;

    std::size_t cache_size() const;

private:
    double compute_variance(double t) const;
    double compute_variance_prime(double t) const;

    double hurst_;
    double theta_;
    QuadratureConfig quad_;
    mutable std::shared_mutex mutex_;
    mutable std::unordered_map<double, double> v_cache_;
};

double variance_v2(double hurst, double theta, double t);
/// Exact derivative formula (see VarianceEvaluator).
double variance_v2_prime(double hurst, double theta, double t);
/// Fourth-order central differences of V with h = max(1e-4, 1e-3 t) and one
/// Richardson step. Needs t > 2h.
double variance_v2_prime_fd(double hurst, double theta, double t);

/// Centered Gaussian density with variance V(t).
double gaussian_density_pH(double hurst, double theta, double x, double t);

/// E[U_{H,Φ}(t)^{2n}] = ∫ (2n−1)!! V(s)^n f_α(s,t) ds for a stable spec.
double moments_subordinated(int n, double hurst, double theta, const BernsteinSpec& spec, double t,
                            const QuadratureConfig& quad = {});

/// Large-t limit (2θ^{2H}HΓ(2H))^n Γ((2n+1)/2)/√π for the stable index 1/2.
double moments_subordinated_limit(int n, double hurst, double theta);

struct InverseMomentRow {
    double cutoff;
    double i_value;  ///< ∫_ε^∞ s^{−H} f_α(s,t) ds
    double j_value;  ///< ∫_ε^∞ s^{−2H} f_α(s,t) ds
};

std::vector<InverseMomentRow> inverse_moment_diagnostic(double alpha, double hurst, double t,
                                                        const std::vector<double>& cutoffs);

/// Least-squares slope of log J against −log ε over the given rows.
double fitted_divergence_exponent(const std::vector<InverseMomentRow>& rows);

}  // namespace tcfou
