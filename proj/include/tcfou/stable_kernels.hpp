#pragma once

#include <memory>
#include <vector>

#include "tcfou/bernstein.hpp"
#include "tcfou/quadrature.hpp"

namespace tcfou {

struct PathEnsemble;

/// Density g_α of σ_α(1), the one-sided stable law with E[e^{−λσ}] = e^{−λ^α}.
double stable_density_g(double alpha, double x);

/// P(σ_α(1) ≤ x) and its complement, both without cancellation.
double stable_cdf(double alpha, double x);
double stable_survival(double alpha, double x);

/// Density f_α(s,t) of the inverse stable subordinator E_α(t). At s = 0 the
/// continuous extension t^{−α}/Γ(1−α) is returned.
double inverse_stable_density_f(double alpha, double s, double t);

/// P(E_α(t) > s) = P(σ_α(1) < t s^{−1/α}).
double inverse_stable_tail(double alpha, double s, double t);

/// g_α sampled on a uniform grid in y = log w, used as a trapezoid rule for
/// ∫_0^∞ h(w) g_α(w) dw. Mass outside [w_min, w_max] is reported separately.
class StableDensityTable {
public:
    StableDensityTable(double alpha, double log_step);

    /// Shared, lazily built table for (α, log_step).
    static std::shared_ptr<const StableDensityTable> get(double alpha, double log_step);

    double alpha() const noexcept { return alpha_; }
    double log_step() const noexcept { return log_step_; }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& values() const noexcept { return values_; }
    /// Trapezoid weights: ∫ h(w) g(w) dw ≈ Σ weights[j] h(nodes[j]).
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// nodes[j]^{−α}, so that s_j = t^α nodes[j]^{−α} in the g-form.
    const std::vector<double>& node_inv_powers() const noexcept { return inv_powers_; }
    double w_min() const noexcept { return nodes_.front(); }
    double w_max() const noexcept { return nodes_.back(); }
    /// P(σ_α(1) < w_min) and P(σ_α(1) > w_max).
    double lower_mass() const noexcept { return lower_mass_; }
    double upper_mass() const noexcept { return upper_mass_; }
    double trapezoid_mass() const;

private:
    double alpha_;
    double log_step_;
    std::vector<double> nodes_;
    std::vector<double> values_;
    std::vector<double> weights_;
    std::vector<double> inv_powers_;
    double lower_mass_ = 0.0;
    double upper_mass_ = 0.0;
};

/// |∫_0^∞ e^{−λt} f_α(s,t) dt − (Φ(λ)/λ) e^{−sΦ(λ)}| for a stable spec.
/// Tempered specs have no density path; use the empirical variant.
double laplace_identity_residual(const BernsteinSpec& spec, double s, double lambda, const QuadratureConfig& quad);

struct EmpiricalLaplaceCheck {
    double lhs = 0.0;         ///< ∫ e^{−λt} E[e^{−ηE(t)}] dt from the ensemble
    double rhs = 0.0;         ///< Φ(λ) / (λ (Φ(λ) + η))
    double residual = 0.0;    ///< |lhs − rhs|
    double std_error = 0.0;   ///< Monte Carlo standard error of lhs
    double bias_bound = 0.0;  ///< lattice bias plus truncation beyond the grid
};

/// The Laplace identity integrated against e^{−ηs} ds, which only needs
/// E[e^{−ηE(t)}] and so can be checked on a simulated inverse-subordinator
/// ensemble for any spec.
EmpiricalLaplaceCheck laplace_identity_empirical(const BernsteinSpec& spec, const PathEnsemble& inverse_paths,
                                                 double eta, double lambda);

}  // namespace tcfou
