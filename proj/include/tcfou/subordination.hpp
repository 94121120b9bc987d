#pragma once

#include <functional>
#include <vector>

#include "tcfou/bernstein.hpp"
#include "tcfou/quadrature.hpp"

namespace tcfou {

struct PathEnsemble;

/// Behaviour of a sampled function beyond the last grid point.
struct Tail {
    enum class Kind { Constant, Power, Forbidden };

    Kind kind = Kind::Forbidden;
    double level = 0.0;      ///< Constant: value for t > t_end
    double tolerance = 0.0;  ///< Constant: admissible |v(t_end) − level|
    double exponent = 0.0;   ///< Power: v(t) = v(t_end) (t/t_end)^p for t > t_end

    static Tail constant(double level, double tolerance = 1e-8) { return {Kind::Constant, level, tolerance, 0.0}; }
    static Tail power(double exponent) { return {Kind::Power, 0.0, 0.0, exponent}; }
    static Tail forbidden() { return {}; }
};

/// A scalar function of time sampled on a strictly increasing grid starting
/// at 0, interpolated linearly, with a declared tail. Optional derivative
/// samples (also interpolated linearly) are needed by the derivative-based
/// operators; a non-finite sample at t = 0 is allowed.
class TimeGridFunction {
public:
    TimeGridFunction(std::vector<double> grid, std::vector<double> values, Tail tail,
                     std::vector<double> derivative = {});

    template <class F>
    static TimeGridFunction sample(F&& f, std::vector<double> grid, Tail tail) {
        std::vector<double> v(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
        return {std::move(grid), std::move(v), tail};
    }

    template <class F, class D>
    static TimeGridFunction sample(F&& f, D&& df, std::vector<double> grid, Tail tail) {
        std::vector<double> v(grid.size()), d(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            v[i] = f(grid[i]);
            d[i] = df(grid[i]);
        }
        return {std::move(grid), std::move(v), tail, std::move(d)};
    }

    double operator()(double t) const;
    double derivative(double t) const;
    bool has_derivative() const noexcept { return !derivative_.empty(); }

    /// ∫_a^b v(t) dt of the interpolant and its tail.
    double integral(double a, double b) const;
    /// sup |v| on [0, ∞); infinite for growing power tails.
    double sup_norm() const;

    /// z ↦ z v'(z), with the tail implied by v's tail.
    TimeGridFunction times_derivative() const;

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<double>& derivative_samples() const noexcept { return derivative_; }
    const Tail& tail() const noexcept { return tail_; }
    double t_end() const noexcept { return grid_.back(); }

private:
    std::size_t locate(double t) const;
    double tail_value(double t) const;

    std::vector<double> grid_;
    std::vector<double> values_;
    std::vector<double> derivative_;
    Tail tail_;
    double inv_step_ = 0.0;  // > 0 when the grid is uniform
};

/// S_Φ v(t) = ∫_0^∞ v(s) f_Φ(s,t) ds for a stable spec. Uses the g-form
/// ∫ v((t/w)^α) g_α(w) dw on the shared log-scale table when v has a
/// constant tail, otherwise the direct f-form.
double subordinate(const TimeGridFunction& v, const BernsteinSpec& spec, double t, const QuadratureConfig& quad = {});

/// The two stable-case forms, exposed for cross-checking.
double subordinate_g_form(const TimeGridFunction& v, const BernsteinSpec& spec, double t,
                          const QuadratureConfig& quad = {});
double subordinate_f_form(const TimeGridFunction& v, const BernsteinSpec& spec, double t,
                          const QuadratureConfig& quad = {});

/// g-form for a bounded callable with limit `level` at infinity.
double subordinate_bounded(const std::function<double(double)>& v, double level, const BernsteinSpec& spec, double t,
                           const QuadratureConfig& quad = {});

/// S_{Φ,H} v(t) = S_Φ(V'·v)(t).
double weighted_subordinate(const TimeGridFunction& v, const BernsteinSpec& spec, double hurst, double theta, double t,
                            const QuadratureConfig& quad = {});
double weighted_subordinate_bounded(const std::function<double(double)>& v, const BernsteinSpec& spec, double hurst,
                                    double theta, double t, const QuadratureConfig& quad = {});

/// d/dt S_α v(t) = α t^{−1} S_α(z v'(z))(t). Needs derivative samples.
double subordinate_derivative(const TimeGridFunction& v, double alpha, double t, const QuadratureConfig& quad = {});

/// L[v](η) of the interpolant plus its tail.
double laplace_transform(const TimeGridFunction& v, double eta, const QuadratureConfig& quad = {});

/// L_H v(λ) = ∫_0^∞ e^{−λt} V'(t) v(t) dt.
double weighted_laplace_LH(const TimeGridFunction& v, double hurst, double theta, double lambda,
                           const QuadratureConfig& quad = {});

/// |L[S_Φ v](λ) − Φ(λ)/λ · L[v](Φ(λ))|.
double laplace_subordination_residual(const TimeGridFunction& v, const BernsteinSpec& spec, double lambda,
                                      const QuadratureConfig& quad = {});

/// |L[S_{Φ,H} v](λ) − Φ(λ)/λ · L_H v(Φ(λ))|.
double weighted_laplace_residual(const TimeGridFunction& v, const BernsteinSpec& spec, double hurst, double theta,
                                 double lambda, const QuadratureConfig& quad = {});

struct EmpiricalEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Ensemble average of v(E(t_j)) over inverse-subordinator paths.
EmpiricalEstimate subordinate_empirical(const TimeGridFunction& v, const PathEnsemble& inverse_paths,
                                        std::size_t time_index);

}  // namespace tcfou
