#include "tcfou/fpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "tcfou/caputo.hpp"
#include "tcfou/errors.hpp"
#include "tcfou/fou_stats.hpp"
#include "tcfou/parallel.hpp"
#include "tcfou/stable_kernels.hpp"
#include "tcfou/subordination.hpp"

namespace tcfou {

namespace {

bool is_uniform(const std::vector<double>& x) {
    const double step = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::abs(x[i] - (x.front() + step * static_cast<double>(i))) > 1e-9 * (x.back() - x.front()))
            return false;
    return true;
}

void check_time_grid(const std::vector<double>& t, const char* who) {
    if (t.size() < 2 || t[0] != 0.0) throw ContractError(std::string(who) + ": time grid must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1])) throw ContractError(std::string(who) + ": time grid must be strictly increasing");
}

// Interval index i with g[i] <= v <= g[i+1].
std::size_t bracket(const std::vector<double>& g, double v) {
    auto it = std::upper_bound(g.begin(), g.end(), v);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - g.begin() - 1, 0));
    return std::min(i, g.size() - 2);
}

// Thomas algorithm for the constant-coefficient tridiagonal system with
// sub/super-diagonal `off` and diagonal `diag`.
void solve_tridiagonal(double off, double diag, std::vector<double>& rhs, std::vector<double>& scratch) {
    const std::size_t m = rhs.size();
    scratch.resize(m);
    double denom = diag;
    if (denom == 0.0) throw NumericError("solve_fp: singular tridiagonal system", 0.0, 0.0);
    scratch[0] = off / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < m; ++i) {
        denom = diag - off * scratch[i - 1];
        if (!(std::abs(denom) > 0.0)) throw NumericError("solve_fp: singular tridiagonal system", 0.0, 0.0);
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= scratch[i] * rhs[i + 1];
}

double second_difference(const std::function<double(double)>& w, double x, double h) {
    return (-w(x + 2.0 * h) + 16.0 * w(x + h) - 30.0 * w(x) + 16.0 * w(x - h) - w(x - 2.0 * h)) / (12.0 * h * h);
}

void check_stencil(const SpaceTimeModel& v, double x, double h, const char* who) {
    if (x - 2.0 * h < v.x_lo || x + 2.0 * h > v.x_hi)
        throw ContractError(std::string(who) + ": probe x too close to the edge of the spatial domain");
    if (v.exclude_origin && !(std::abs(x) > 2.0 * h))
        throw ContractError(std::string(who) + ": probe stencil reaches the excluded point x = 0");
}

double time_derivative(const SpaceTimeModel& v, double x, double t) {
    if (v.time_derivative) return v.time_derivative(x, t);
    const double d = 1e-5 * std::max(1.0, t);
    if (t < d) return (v.value(x, t + d) - v.value(x, t)) / d;
    return (v.value(x, t + d) - v.value(x, t - d)) / (2.0 * d);
}

}  // namespace

SpaceTimeField::SpaceTimeField(std::vector<double> x_grid, std::vector<double> t_grid, std::vector<double> values,
                               BoundaryKind boundary)
    : x_(std::move(x_grid)), t_(std::move(t_grid)), values_(std::move(values)), boundary_(boundary) {
    if (x_.size() < 2) throw ContractError("SpaceTimeField: x grid needs at least two points");
    if (!(x_.back() > x_.front()) || !is_uniform(x_)) throw ContractError("SpaceTimeField: x grid must be uniform");
    check_time_grid(t_, "SpaceTimeField");
    if (values_.size() != x_.size() * t_.size()) throw ContractError("SpaceTimeField: values do not match n_t × n_x");
    for (double v : values_)
        if (!std::isfinite(v)) throw ContractError("SpaceTimeField: values must be finite");
}

double SpaceTimeField::mass(std::size_t it) const {
    const auto r = row(it);
    double sum = 0.5 * (r.front() + r.back());
    for (std::size_t i = 1; i + 1 < r.size(); ++i) sum += r[i];
    return sum * dx();
}

double SpaceTimeField::interpolate(double x, double t) const {
    const double tol = 1e-12 * (x_.back() - x_.front());
    if (x < x_.front() - tol || x > x_.back() + tol || t < 0.0 || t > t_.back())
        throw DomainError("SpaceTimeField: interpolation point outside the grid");
    const double u = std::clamp((x - x_.front()) / dx(), 0.0, static_cast<double>(x_.size() - 1));
    const auto ix = std::min(static_cast<std::size_t>(u), x_.size() - 2);
    const double fx = u - static_cast<double>(ix);
    const std::size_t it = bracket(t_, t);
    const double ft = (t - t_[it]) / (t_[it + 1] - t_[it]);
    auto lerp_x = [&](std::size_t k) { return at(k, ix) + fx * (at(k, ix + 1) - at(k, ix)); };
    return lerp_x(it) + ft * (lerp_x(it + 1) - lerp_x(it));
}

void SpaceTimeField::check_density(double mass_budget) const {
    for (double v : values_)
        if (v < 0.0) throw ContractError("SpaceTimeField: density field has negative values");
    for (std::size_t it = 0; it < n_t(); ++it) {
        const double m = mass(it);
        if (m < 1.0 - mass_budget || m > 1.0 + 1e-9)
            throw ContractError("SpaceTimeField: x-mass outside the declared truncation budget");
    }
}

SpaceTimeField solve_fp(double hurst, double theta, const std::function<double(double)>& init,
                        const BoundaryCondition& boundary, const std::vector<double>& x_grid,
                        const std::vector<double>& t_grid) {
    if (x_grid.size() < 3 || !(x_grid.back() > x_grid.front()) || !is_uniform(x_grid))
        throw ContractError("solve_fp: x grid must be uniform with at least three points");
    check_time_grid(t_grid, "solve_fp");
    if (boundary.kind == BoundaryKind::Dirichlet && (!boundary.left || !boundary.right))
        throw ContractError("solve_fp: Dirichlet boundary needs left and right data");
    const auto ev = VarianceEvaluator::shared(hurst, theta);
    const double dx = (x_grid.back() - x_grid.front()) / static_cast<double>(x_grid.size() - 1);

    std::size_t pad = 0;
    if (boundary.kind == BoundaryKind::Decay)
        pad = static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(ev->stationary_variance()) / dx));
    const std::size_t n = x_grid.size() + 2 * pad;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = x_grid.front() + dx * (static_cast<double>(i) - static_cast<double>(pad));

    auto left = [&](double t) { return boundary.kind == BoundaryKind::Decay ? 0.0 : boundary.left(t); };
    auto right = [&](double t) { return boundary.kind == BoundaryKind::Decay ? 0.0 : boundary.right(t); };

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = init(x[i]);
    u.front() = left(0.0);
    u.back() = right(0.0);

    const std::size_t nx = x_grid.size();
    std::vector<double> out(nx * t_grid.size());
    auto store = [&](std::size_t k) { std::copy_n(u.begin() + static_cast<std::ptrdiff_t>(pad), nx, out.begin() + static_cast<std::ptrdiff_t>(k * nx)); };
    store(0);

    std::vector<double> rhs(n - 2), scratch;
    double v_prev = 0.0;
    for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
        const double v_next = ev->variance(t_grid[k + 1]);
        const double r = 0.5 * (v_next - v_prev) / (dx * dx);  // Δτ/dx²
        v_prev = v_next;
        const double gl = left(t_grid[k + 1]), gr = right(t_grid[k + 1]);
        for (std::size_t i = 1; i + 1 < n; ++i) rhs[i - 1] = u[i] + 0.5 * r * (u[i - 1] - 2.0 * u[i] + u[i + 1]);
        rhs.front() += 0.5 * r * gl;
        rhs.back() += 0.5 * r * gr;
        solve_tridiagonal(-0.5 * r, 1.0 + r, rhs, scratch);
        std::copy(rhs.begin(), rhs.end(), u.begin() + 1);
        u.front() = gl;
        u.back() = gr;
        for (double value : u)
            if (!std::isfinite(value)) throw NumericError("solve_fp: non-finite solution", value, 0.0);
        store(k + 1);
    }
    return {x_grid, t_grid, std::move(out), boundary.kind};
}

double gaussian_fp_oracle(double v0, double hurst, double theta, double x, double t) {
    if (!(v0 > 0.0)) throw DomainError("gaussian_fp_oracle: initial variance must be positive");
    const double var = v0 + variance_v2(hurst, theta, t);
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

SpaceTimeModel pH_model(double hurst, double theta) {
    const auto ev = VarianceEvaluator::shared(hurst, theta);
    SpaceTimeModel m;
    m.value = [ev](double x, double t) {
        if (!(t > 0.0)) return 0.0;
        const double var = ev->variance(t);
        return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
    };
    m.time_derivative = [ev](double x, double t) {
        if (!(t > 0.0)) return 0.0;
        const double var = ev->variance(t);
        const double p = std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
        return 0.5 * ev->variance_prime(t) * p * (x * x / (var * var) - 1.0 / var);
    };
    const double var_inf = ev->stationary_variance();
    m.limit = [var_inf](double x) {
        return std::exp(-0.5 * x * x / var_inf) / std::sqrt(2.0 * std::numbers::pi * var_inf);
    };
    m.exclude_origin = true;
    return m;
}

SpaceTimeModel model_from_field(const SpaceTimeField& field) {
    auto f = std::make_shared<SpaceTimeField>(field);
    SpaceTimeModel m;
    const double t_end = f->t_grid().back();
    m.value = [f, t_end](double x, double t) { return f->interpolate(x, std::min(t, t_end)); };
    m.limit = [f, t_end](double x) { return f->interpolate(x, t_end); };
    m.time_derivative = [f, t_end](double x, double t) {
        if (t >= t_end) return 0.0;
        const auto& g = f->t_grid();
        const std::size_t it = bracket(g, t);
        return (f->interpolate(x, g[it + 1]) - f->interpolate(x, g[it])) / (g[it + 1] - g[it]);
    };
    m.x_lo = f->x_grid().front();
    m.x_hi = f->x_grid().back();
    return m;
}

GenFpOptions GenFpOptions::refined(int level) const {
    GenFpOptions out = *this;
    for (int k = 0; k < level; ++k) {
        out.x_step *= 0.5;
        out.n_time *= 2;
    }
    return out;
}

std::vector<ProbeResidual> generalized_fp_residual(const SpaceTimeModel& v, const BernsteinSpec& spec, double hurst,
                                                   double theta, std::span<const ProbePoint> probes,
                                                   const GenFpOptions& options) {
    if (!spec.is_stable())
        throw ContractError("generalized_fp_residual: needs a stable spec (the derivative form of S_Φ is stable-only)");
    if (!v.value || !v.limit) throw ContractError("generalized_fp_residual: model needs value and limit");
    if (options.n_time < 8 || !(options.x_step > 0.0) || !(options.grading >= 1.0))
        throw ContractError("generalized_fp_residual: invalid options");
    options.quad.validate();
    const double h = options.x_step;
    const double alpha = spec.alpha();
    std::map<double, std::vector<std::size_t>> by_x;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        if (!(probes[i].t > 0.0)) throw DomainError("generalized_fp_residual: probe times must be positive");
        check_stencil(v, probes[i].x, h, "generalized_fp_residual");
        by_x[probes[i].x].push_back(i);
    }
    std::vector<std::pair<double, std::vector<std::size_t>>> groups(by_x.begin(), by_x.end());
    std::vector<ProbeResidual> out(probes.size());
    const auto& quad = options.quad;

    parallel_for(groups.size(), [&](std::size_t gi) {
        const double x = groups[gi].first;
        const auto& idx = groups[gi].second;
        double t_max = 0.0;
        for (std::size_t i : idx) t_max = std::max(t_max, probes[i].t);

        const std::size_t n = options.n_time;
        std::vector<double> grid(n + 1), u(n + 1), du(n + 1);
        const double level = v.limit(x);
        auto vx = [&](double s) { return v.value(x, s); };
        auto z_dv = [&](double s) { return s > 0.0 && std::isfinite(s) ? s * time_derivative(v, x, s) : 0.0; };
        for (std::size_t j = 0; j <= n; ++j) {
            grid[j] = t_max * std::pow(static_cast<double>(j) / static_cast<double>(n), options.grading);
            if (j == 0) {
                u[j] = v.value(x, 0.0);
                du[j] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            u[j] = subordinate_bounded(vx, level, spec, grid[j], quad);
            du[j] = alpha / grid[j] * subordinate_bounded(z_dv, 0.0, spec, grid[j], quad);
        }
        const TimeGridFunction slice(std::move(grid), std::move(u), Tail::forbidden(), std::move(du));
        for (std::size_t i : idx) {
            const double t = probes[i].t;
            const double lhs = caputo_phi_derivative(slice, spec, t, quad);
            auto w = [&](double y) {
                return weighted_subordinate_bounded([&](double s) { return v.value(y, s); }, spec, hurst, theta, t,
                                                    quad);
            };
            out[i] = {x, t, lhs - 0.5 * second_difference(w, x, h)};
        }
    });
    return out;
}

std::vector<ProbeResidual> mild_solution_residual(const SpaceTimeModel& v, double hurst, double theta,
                                                  std::span<const double> lambdas, std::span<const double> x_probes,
                                                  double x_step, const QuadratureConfig& quad) {
    if (!v.value || !v.limit) throw ContractError("mild_solution_residual: model needs value and limit");
    if (!(x_step > 0.0)) throw ContractError("mild_solution_residual: x_step must be positive");
    quad.validate();
    for (double lambda : lambdas)
        if (!(lambda > 0.0)) throw DomainError("mild_solution_residual: lambda must be positive");
    for (double x : x_probes) check_stencil(v, x, x_step, "mild_solution_residual");
    const auto ev = VarianceEvaluator::shared(hurst, theta, quad);

    // ∫_0^∞ e^{−λt} k(t) v(y,t) dt in y = log t over [1e-12, 50/λ]; the rest
    // uses the limit profile (k = 1) or is dropped (k = V', which decays).
    auto laplace = [&](double y, double lambda, bool weighted) {
        const double t_hi = 50.0 / lambda;
        auto integrand = [&](double z) {
            const double t = std::exp(z);
            const double k = weighted ? ev->variance_prime(t) : 1.0;
            return t * std::exp(-lambda * t) * k * v.value(y, t);
        };
        const std::vector<double> breaks{std::log(0.1 / lambda), std::log(1.0 / lambda), std::log(10.0 / lambda)};
        const auto res = integrate_adaptive(integrand, std::log(1e-12), std::log(t_hi), 1e-13, 1e-12, 2000, breaks);
        double value = res.value;
        if (!weighted) value += v.limit(y) * std::exp(-lambda * t_hi) / lambda;
        return value;
    };

    std::vector<ProbeResidual> out(lambdas.size() * x_probes.size());
    parallel_for(out.size(), [&](std::size_t k) {
        const double lambda = lambdas[k / x_probes.size()];
        const double x = x_probes[k % x_probes.size()];
        const double lhs = lambda * laplace(x, lambda, false) - v.value(x, 0.0);
        const double d2 = second_difference([&](double y) { return laplace(y, lambda, true); }, x, x_step);
        out[k] = {x, lambda, std::abs(lhs - 0.5 * d2)};
    });
    return out;
}

MaxPrincipleReport max_principle_check(const SpaceTimeField& field, double a, double b, double T) {
    const auto& x = field.x_grid();
    const auto& t = field.t_grid();
    const double tol_x = 1e-12 * std::max(1.0, x.back() - x.front());
    const double tol_t = 1e-12 * std::max(1.0, t.back());
    std::size_t ia = x.size(), ib = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= a - tol_x && x[i] <= b + tol_x) {
            ia = std::min(ia, i);
            ib = std::max(ib, i);
        }
    }
    if (ia >= ib) throw ContractError("max_principle_check: fewer than two grid columns inside [a, b]");
    const auto lowest = -std::numeric_limits<double>::infinity();
    MaxPrincipleReport rep{lowest, lowest, false};
    double scale = 0.0;
    for (std::size_t it = 0; it < t.size() && t[it] <= T + tol_t; ++it) {
        for (std::size_t i = ia; i <= ib; ++i) {
            const double value = field.at(it, i);
            scale = std::max(scale, std::abs(value));
            if (it == 0 || i == ia || i == ib) {
                rep.boundary_max = std::max(rep.boundary_max, value);
            } else if (value > rep.interior_max) {
                rep.interior_max = value;
                rep.interior_x = x[i];
                rep.interior_t = t[it];
            }
        }
    }
    rep.pass = rep.interior_max <= rep.boundary_max + 1e-9 * std::max(1.0, scale);
    return rep;
}

SpaceTimeField subordinated_pH_field(double hurst, double theta, const BernsteinSpec& spec,
                                     const std::vector<double>& x_grid, const std::vector<double>& t_grid,
                                     const QuadratureConfig& quad) {
    check_time_grid(t_grid, "subordinated_pH_field");
    const auto model = pH_model(hurst, theta);
    const std::size_t nx = x_grid.size();
    std::vector<double> values(nx * t_grid.size());
    parallel_for(values.size(), [&](std::size_t k) {
        const double x = x_grid[k % nx];
        const double t = t_grid[k / nx];
        if (t == 0.0) {
            values[k] = model.value(x, 0.0);
            return;
        }
        values[k] = subordinate_bounded([&](double s) { return model.value(x, s); }, model.limit(x), spec, t, quad);
    });
    return {x_grid, t_grid, std::move(values), BoundaryKind::Dirichlet};
}

SpaceTimeField with_interior_bump(const SpaceTimeField& field, double a, double b, double T, double amplitude,
                                  double width) {
    const double xm = 0.5 * (a + b), tm = 0.5 * T;
    std::vector<double> values = field.values();
    for (std::size_t it = 0; it < field.n_t(); ++it) {
        for (std::size_t i = 0; i < field.n_x(); ++i) {
            const double dx = field.x_grid()[i] - xm, dt = field.t_grid()[it] - tm;
            values[it * field.n_x() + i] += amplitude * std::exp(-(dx * dx + dt * dt) / (2.0 * width * width));
        }
    }
    return {field.x_grid(), field.t_grid(), std::move(values), field.boundary()};
}

FpProblem pH_strip_problem(double hurst, double theta, double a, double b, double t_end, std::size_t n_x,
                           std::size_t n_t, double right_shift) {
    if (!(a > 0.0) || !(b > a)) throw ContractError("pH_strip_problem: need 0 < a < b");
    if (n_x < 3 || n_t < 1 || !(t_end > 0.0)) throw ContractError("pH_strip_problem: degenerate grid");
    const auto model = pH_model(hurst, theta);
    FpProblem p;
    p.init = [](double) { return 0.0; };
    auto lateral = [value = model.value](double x, double shift) {
        return [value, x, shift](double t) { return value(x, t) + shift; };
    };
    p.boundary = BoundaryCondition::dirichlet(lateral(a, 0.0), lateral(b, right_shift));
    p.x_grid.resize(n_x);
    for (std::size_t i = 0; i < n_x; ++i) p.x_grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n_x - 1);
    p.t_grid.resize(n_t + 1);
    for (std::size_t k = 0; k <= n_t; ++k) p.t_grid[k] = t_end * static_cast<double>(k) / static_cast<double>(n_t);
    return p;
}

namespace {

void require_same_data(const FpProblem& p, const FpProblem& q) {
    auto mismatch = [](double u, double w) { return std::abs(u - w) > 1e-12 * std::max(1.0, std::abs(u)); };
    if (p.boundary.kind != q.boundary.kind) throw ContractError("uniqueness_probe: boundary kinds differ");
    if (p.x_grid.front() != q.x_grid.front() || p.x_grid.back() != q.x_grid.back())
        throw ContractError("uniqueness_probe: spatial domains differ");
    for (const auto* grid : {&p.x_grid, &q.x_grid})
        for (double x : *grid)
            if (mismatch(p.init(x), q.init(x)))
                throw ContractError("uniqueness_probe: initial data differ between the two problems");
    if (p.boundary.kind == BoundaryKind::Dirichlet) {
        for (const auto* grid : {&p.t_grid, &q.t_grid})
            for (double t : *grid)
                if (mismatch(p.boundary.left(t), q.boundary.left(t)) || mismatch(p.boundary.right(t), q.boundary.right(t)))
                    throw ContractError("uniqueness_probe: lateral boundary data differ between the two problems");
    }
}

}  // namespace

UniquenessReport uniqueness_probe(double hurst, double theta, const BernsteinSpec& spec, const FpProblem& first,
                        const FpProblem& second, const Cylinder& cylinder, bool require_matching_boundary,
                        const QuadratureConfig& quad) {
    if (cylinder.n_x < 2 || cylinder.n_t < 1 || !(cylinder.b > cylinder.a) || !(cylinder.T > 0.0))
        throw ContractError("uniqueness_probe: degenerate cylinder");
    if (require_matching_boundary) require_same_data(first, second);
    const auto fv = solve_fp(hurst, theta, first.init, first.boundary, first.x_grid, first.t_grid);
    const auto fw = solve_fp(hurst, theta, second.init, second.boundary, second.x_grid, second.t_grid);

    const std::size_t nx = cylinder.n_x, nt = cylinder.n_t;
    std::vector<double> gaps(nx * nt);
    parallel_for(nx, [&](std::size_t i) {
        const double x = cylinder.a + (cylinder.b - cylinder.a) * static_cast<double>(i) / static_cast<double>(nx - 1);
        auto column = [&](const SpaceTimeField& f) {
            std::vector<double> vals(f.n_t());
            for (std::size_t k = 0; k < f.n_t(); ++k) vals[k] = f.interpolate(x, f.t_grid()[k]);
            const double last = vals.back();
            return TimeGridFunction(f.t_grid(), std::move(vals), Tail::constant(last));
        };
        const auto cv = column(fv);
        const auto cw = column(fw);
        for (std::size_t k = 0; k < nt; ++k) {
            const double t = cylinder.T * static_cast<double>(k + 1) / static_cast<double>(nt);
            gaps[i * nt + k] = std::abs(subordinate(cv, spec, t, quad) - subordinate(cw, spec, t, quad));
        }
    });
    const auto k = static_cast<std::size_t>(std::max_element(gaps.begin(), gaps.end()) - gaps.begin());
    const double x = cylinder.a + (cylinder.b - cylinder.a) * static_cast<double>(k / nt) / static_cast<double>(nx - 1);
    const double t = cylinder.T * static_cast<double>(k % nt + 1) / static_cast<double>(nt);
    return {gaps[k], x, t};
}

std::vector<ProbeResidual> auxiliary_function_residual(const BernsteinSpec& spec, double T,
                                                       std::span<const double> t_probes, std::size_t n_time,
                                                       const QuadratureConfig& quad) {
    if (!spec.is_stable()) throw ContractError("auxiliary_function_residual: needs a stable spec");
    if (!(T > 0.0)) throw DomainError("auxiliary_function_residual: T must be positive");
    if (n_time < 8) throw ContractError("auxiliary_function_residual: n_time too small");
    const double alpha = spec.alpha();
    double t_max = 0.0;
    for (double t : t_probes) {
        if (!(t > 0.0)) throw DomainError("auxiliary_function_residual: probe times must be positive");
        t_max = std::max(t_max, t);
    }
    // S g(t) = (1/T) ∫_0^T P(E(t) ≤ r) dr and d/dt S g(t) = −(1/T) ∫_0^T p_{σ(r)}(t) dr,
    // with P(E(t) ≥ r) = P(σ(r) ≤ t) and p_{σ(r)}(t) = r^{−1/α} g_α(t r^{−1/α}).
    // Both integrands live on the scale r ~ t^α, which seeds the partition.
    auto breaks = [&](double t) {
        std::vector<double> b;
        for (double f : {1e-2, 1e-1, 1.0, 10.0}) b.push_back(f * std::pow(t, alpha));
        return b;
    };
    auto value = [&](double t) {
        const auto res = integrate_adaptive([&](double r) { return 1.0 - inverse_stable_tail(alpha, r, t); }, 0.0, T,
                                            1e-13, 1e-12, 4000, breaks(t));
        return res.value / T;
    };
    auto slope = [&](double t) {
        const auto res = integrate_adaptive(
            [&](double r) {
                if (r <= 0.0) return 0.0;
                const double c = std::pow(r, -1.0 / alpha);
                return c * stable_density_g(alpha, t * c);
            },
            0.0, T, 1e-13, 1e-12, 4000, breaks(t));
        return -res.value / T;
    };
    // d/dt S g behaves like t^{α−1} at 0; grading exponent 4 keeps the
    // product rule second order despite the singular slope.
    std::vector<double> grid(n_time + 1), u(n_time + 1), du(n_time + 1);
    parallel_for(n_time + 1, [&](std::size_t j) {
        grid[j] = t_max * std::pow(static_cast<double>(j) / static_cast<double>(n_time), 4.0);
        if (j == 0) {
            u[j] = 1.0;
            du[j] = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        u[j] = value(grid[j]);
        du[j] = slope(grid[j]);
    });
    const TimeGridFunction g(std::move(grid), std::move(u), Tail::forbidden(), std::move(du));
    std::vector<ProbeResidual> out;
    for (double t : t_probes) {
        const double expected = -(1.0 - inverse_stable_tail(alpha, T, t)) / T;
        out.push_back({0.0, t, caputo_phi_derivative(g, spec, t, quad) - expected});
    }
    return out;
}

}  // namespace tcfou
