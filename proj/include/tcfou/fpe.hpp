#pragma once

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "tcfou/bernstein.hpp"
#include "tcfou/quadrature.hpp"

namespace tcfou {

enum class BoundaryKind { Dirichlet, Decay };

/// Lateral boundary data for the Fokker-Planck solver. Decay is zero
/// Dirichlet data on a domain padded by 6 stationary standard deviations.
struct BoundaryCondition {
    BoundaryKind kind = BoundaryKind::Decay;
    std::function<double(double)> left;
    std::function<double(double)> right;

    static BoundaryCondition decay() { return {}; }
    static BoundaryCondition dirichlet(std::function<double(double)> left, std::function<double(double)> right) {
        return {BoundaryKind::Dirichlet, std::move(left), std::move(right)};
    }
};

/// v(x, t) on a uniform x grid and a time grid starting at 0; values are
/// stored row-major with one row per time.
class SpaceTimeField {
public:
    SpaceTimeField(std::vector<double> x_grid, std::vector<double> t_grid, std::vector<double> values,
                   BoundaryKind boundary);

    std::size_t n_x() const noexcept { return x_.size(); }
    std::size_t n_t() const noexcept { return t_.size(); }
    double dx() const noexcept { return x_[1] - x_[0]; }
    double at(std::size_t it, std::size_t ix) const { return values_[it * x_.size() + ix]; }
    std::span<const double> row(std::size_t it) const { return {values_.data() + it * x_.size(), x_.size()}; }

    const std::vector<double>& x_grid() const noexcept { return x_; }
    const std::vector<double>& t_grid() const noexcept { return t_; }
    const std::vector<double>& values() const noexcept { return values_; }
    BoundaryKind boundary() const noexcept { return boundary_; }

    /// Trapezoid x-mass of time row it.
    double mass(std::size_t it) const;
    /// Piecewise-linear interpolation in both variables; (x, t) must lie in the grid.
    double interpolate(double x, double t) const;
    /// Throws ContractError unless all values are ≥ 0 and every row's mass
    /// lies in [1 − mass_budget, 1 + 1e-9].
    void check_density(double mass_budget) const;

private:
    std::vector<double> x_;
    std::vector<double> t_;
    std::vector<double> values_;
    BoundaryKind boundary_;
};

/// Crank-Nicolson for ∂_t v = ½ V'(t) ∂²_x v. Each step uses the exact
/// interval average of ½V', i.e. the increment of τ(t) = ½V(t). The x grid
/// must be uniform; with Decay boundaries the solver pads it internally and
/// returns the field on the given grid.
SpaceTimeField solve_fp(double hurst, double theta, const std::function<double(double)>& init,
                        const BoundaryCondition& boundary, const std::vector<double>& x_grid,
                        const std::vector<double>& t_grid);

/// τ-transform oracle for a centered Gaussian initial profile of variance v0:
/// the exact solution is Gaussian with variance v0 + V(t).
double gaussian_fp_oracle(double v0, double hurst, double theta, double x, double t);

/// A space-time function given in closed form, used by the residual checks.
struct SpaceTimeModel {
    std::function<double(double, double)> value;            ///< v(x, t)
    std::function<double(double, double)> time_derivative;  ///< ∂_t v(x, t); empty → centered differences
    std::function<double(double)> limit;                    ///< v(x, ∞)
    double x_lo = -std::numeric_limits<double>::infinity();
    double x_hi = std::numeric_limits<double>::infinity();
    bool exclude_origin = false;  ///< stencils must not reach x = 0
};

/// p_H with its analytic time derivative ½V'(t)∂²_x p_H.
SpaceTimeModel pH_model(double hurst, double theta);
/// Time-linear, x-linear interpolation of a solver field; the last row is
/// taken as the limit.
SpaceTimeModel model_from_field(const SpaceTimeField& field);

struct ProbePoint {
    double x;
    double t;
};

struct ProbeResidual {
    double x;
    double t;  ///< time, or λ for Laplace-domain checks
    double residual;
};

struct GenFpOptions {
    std::size_t n_time = 400;  ///< graded subordination grid on [0, max probe t]
    double grading = 2.0;
    double x_step = 0.04;      ///< fourth-order ∂²_x stencil step
    QuadratureConfig quad{};

    /// Level k halves x_step and doubles n_time k times.
    GenFpOptions refined(int level) const;
};

/// R(x, t) = ∂^Φ_t S_Φ v(x, ·)(t) − ½ ∂²_x S_{Φ,H} v(·)(x)(t) at each probe.
/// The time derivative of S_Φ v comes from α/t S_Φ(z ∂_z v) and feeds the
/// Caputo product rule. Stable specs only.
std::vector<ProbeResidual> generalized_fp_residual(const SpaceTimeModel& v, const BernsteinSpec& spec, double hurst,
                                                   double theta, std::span<const ProbePoint> probes,
                                                   const GenFpOptions& options = {});

/// |λ v̄(x,λ) − v(x,0) − ½ ∂²_x L_H v(x,λ)| at every (x, λ).
std::vector<ProbeResidual> mild_solution_residual(const SpaceTimeModel& v, double hurst, double theta,
                                                  std::span<const double> lambdas, std::span<const double> x_probes,
                                                  double x_step = 0.02, const QuadratureConfig& quad = {});

struct MaxPrincipleReport {
    double interior_max = 0.0;
    double boundary_max = 0.0;
    double interior_x = 0.0;  ///< location of the interior maximum
    double interior_t = 0.0;
    bool pass = false;
};

/// Compares the grid maximum over the interior of [a,b]×(0,T] with the maximum
/// over its parabolic boundary (bottom row and the two lateral columns).
MaxPrincipleReport max_principle_check(const SpaceTimeField& field, double a, double b, double T);

/// S_Φ p_H on the given grids (row t = 0 is p_H(x, 0) = 0 for x ≠ 0).
SpaceTimeField subordinated_pH_field(double hurst, double theta, const BernsteinSpec& spec,
                                     const std::vector<double>& x_grid, const std::vector<double>& t_grid,
                                     const QuadratureConfig& quad = {});

/// Adds amplitude · exp(−((x−x_mid)² + (t−t_mid)²)/(2 width²)) centred in the
/// cylinder [a,b]×[0,T].
SpaceTimeField with_interior_bump(const SpaceTimeField& field, double a, double b, double T, double amplitude,
                                  double width);

/// Dirichlet problem for the variance-driven equation.
struct FpProblem {
    std::function<double(double)> init;
    BoundaryCondition boundary;
    std::vector<double> x_grid;
    std::vector<double> t_grid;
};

/// p_H restricted to the strip [a, b] ⊂ (0, ∞): zero initial data and
/// lateral values p_H(a, t), p_H(b, t) + right_shift, on uniform grids.
FpProblem pH_strip_problem(double hurst, double theta, double a, double b, double t_end, std::size_t n_x,
                           std::size_t n_t, double right_shift = 0.0);

struct Cylinder {
    double a;
    double b;
    double T;
    std::size_t n_x = 37;
    std::size_t n_t = 20;
};

struct UniquenessReport {
    double max_gap = 0.0;
    double x = 0.0;  ///< where the gap is largest
    double t = 0.0;
};

/// max |S_Φ v − S_Φ w| over a probe grid of the cylinder, with v and w the
/// solver fields of the two problems. With require_matching_boundary the
/// initial and lateral data must agree (ContractError otherwise).
UniquenessReport uniqueness_probe(double hurst, double theta, const BernsteinSpec& spec, const FpProblem& first,
                        const FpProblem& second, const Cylinder& cylinder, bool require_matching_boundary = true,
                        const QuadratureConfig& quad = {});

/// The maximum-principle auxiliary function g(t) = (T−t)⁺/T: returns
/// ∂^Φ S_Φ g(t) + (1/T) ∫_0^T f_Φ(s,t) ds at each probe time.
std::vector<ProbeResidual> auxiliary_function_residual(const BernsteinSpec& spec, double T,
                                                       std::span<const double> t_probes, std::size_t n_time = 800,
                                                       const QuadratureConfig& quad = {});

}  // namespace tcfou
