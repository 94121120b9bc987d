#pragma once

#include <mutex>
#include <unordered_map>
#include <vector>

#include "tcfou/bernstein.hpp"
#include "tcfou/quadrature.hpp"
#include "tcfou/subordination.hpp"

namespace tcfou {

/// Kernel data for ∂^Φ on a fixed grid: ν̄_Φ at the grid offsets and, for
/// the tempered family, an interpolation table of log(r^α ν̄_Φ(r)) built once
/// from the tail quadrature (Chebyshev panels of unit width in log r).
class CaputoWorkspace {
public:
    /// r_extent: largest offset served by the table (default: twice the grid span).
    CaputoWorkspace(BernsteinSpec spec, std::vector<double> grid, double r_extent = 0.0);

    const BernsteinSpec& spec() const noexcept { return spec_; }
    const std::vector<double>& grid() const noexcept { return grid_; }
    /// kernel_nodes()[k−1] = ν̄_Φ(grid[k] − grid[0]), k ≥ 1.
    const std::vector<double>& kernel_nodes() const noexcept { return kernel_nodes_; }

    double levy_tail(double r) const;

private:
    BernsteinSpec spec_;
    std::vector<double> grid_;
    std::vector<double> kernel_nodes_;
    double y_lo_ = 0.0;
    std::size_t n_panels_ = 0;
    std::vector<double> table_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<double, double> memo_;
};

/// ∂^Φ u(t) = ∫_0^t ν̄_Φ(t−τ) u'(τ) dτ for u with derivative samples, u'
/// linear on each grid cell. Times beyond the grid need a constant tail.
double caputo_phi_derivative(const TimeGridFunction& u, const BernsteinSpec& spec, double t,
                             const QuadratureConfig& quad = {});
double caputo_phi_derivative(const TimeGridFunction& u, const CaputoWorkspace& ws, double t,
                             const QuadratureConfig& quad = {});

/// |L[∂^Φ u](λ) − Φ(λ) L[u](λ) + Φ(λ)/λ · u(0)|. u needs a constant tail.
double laplace_caputo_residual(const TimeGridFunction& u, const BernsteinSpec& spec, double lambda,
                               const QuadratureConfig& quad = {});

struct ExtremalCheck {
    double value = 0.0;   ///< ∂^Φ u(t0)
    bool passed = false;  ///< value ≥ −1e-6
};

/// ∂^Φ u at a maximum point t0 of u. Throws ContractError unless u(t0) is
/// within the grid tolerance of the largest sample.
ExtremalCheck extremal_point_check(const TimeGridFunction& u, const BernsteinSpec& spec, double t0,
                                   const QuadratureConfig& quad = {});

}  // namespace tcfou
