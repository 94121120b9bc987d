#include "tcfou/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "tcfou/errors.hpp"

namespace tcfou {

void QuadratureConfig::validate() const {
    if (!(s_max > 0.0)) throw ContractError("QuadratureConfig: s_max must be positive");
    if (n_nodes < 16) throw ContractError("QuadratureConfig: n_nodes must be at least 16");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(tail_bound_budget > 0.0))
        throw ContractError("QuadratureConfig: tolerances must be positive");
    if (!(log_step > 0.0) || log_step > 0.5) throw ContractError("QuadratureConfig: log_step must lie in (0, 0.5]");
}

namespace {

// Golub-Welsch: eigen-decomposition of the symmetric tridiagonal Jacobi matrix.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag, double mu0) {
    const auto n = diag.size();
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        jacobi(i, i) = diag(i);
        if (i + 1 < n) {
            jacobi(i, i + 1) = offdiag(i);
            jacobi(i + 1, i) = offdiag(i);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success) throw NumericError("Golub-Welsch eigen-solve failed", 0.0, 0.0);
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v0 = solver.eigenvectors()(0, i);
        rule.nodes[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

QuadratureRule build_jacobi(int n, double a, double b) {
    Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
    const double ab = a + b;
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + ab;
        diag(k) = (k == 0) ? (b - a) / (ab + 2.0) : (b * b - a * a) / (s * (s + 2.0));
    }
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + ab;
        const double num = 4.0 * k * (k + a) * (k + b) * (k + ab);
        const double den = s * s * (s + 1.0) * (s - 1.0);
        off(k - 1) = std::sqrt(num / den);
    }
    const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                                std::lgamma(ab + 2.0));
    auto rule = golub_welsch(diag, off, mu0);
    if (a == b) {
        // Enforce exact symmetry of symmetric rules.
        const std::size_t m = rule.size();
        for (std::size_t i = 0; i < m / 2; ++i) {
            const double x = 0.5 * (rule.nodes[m - 1 - i] - rule.nodes[i]);
            const double w = 0.5 * (rule.weights[i] + rule.weights[m - 1 - i]);
            rule.nodes[i] = -x;
            rule.nodes[m - 1 - i] = x;
            rule.weights[i] = rule.weights[m - 1 - i] = w;
        }
        if (m % 2 == 1) rule.nodes[m / 2] = 0.0;
    }
    return rule;
}

QuadratureRule build_laguerre(int n, double a) {
    Eigen::VectorXd diag(n), off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + a + 1.0;
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k * (k + a));
    return golub_welsch(diag, off, std::tgamma(a + 1.0));
}

using RuleKey = std::tuple<int, double, double, int>;

const QuadratureRule& cached_rule(const RuleKey& key) {
    static std::mutex mutex;
    static std::map<RuleKey, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    const auto [n, a, b, family] = key;
    auto rule = std::make_unique<QuadratureRule>(family == 0 ? build_jacobi(n, a, b) : build_laguerre(n, a));
    return *cache.emplace(key, std::move(rule)).first->second;
}

}  // namespace

const QuadratureRule& gauss_jacobi(int n, double a, double b) {
    if (n < 1) throw ContractError("gauss_jacobi: n must be positive");
    if (!(a > -1.0) || !(b > -1.0)) throw ContractError("gauss_jacobi: exponents must exceed -1");
    return cached_rule({n, a, b, 0});
}

const QuadratureRule& gauss_laguerre(int n, double a) {
    if (n < 1) throw ContractError("gauss_laguerre: n must be positive");
    if (!(a > -1.0)) throw ContractError("gauss_laguerre: exponent must exceed -1");
    return cached_rule({n, a, 0.0, 1});
}

double laplace_linear_segment(double a, double b, double ya, double yb, double lambda) {
    const double h = b - a;
    const double x = lambda * h;
    const double ea = std::exp(-lambda * a);
    // m0 = ∫_a^b e^{-λt} dt, m1 = ∫_a^b e^{-λt} (t - a)/h dt
    double m0, m1;
    if (x < 1e-2) {
        // Series in x avoids the cancellation of 1 - e^{-x} and 1 - e^{-x} - x e^{-x}.
        const double x2 = x * x, x3 = x2 * x, x4 = x3 * x, x5 = x4 * x;
        m0 = h * (1.0 - x / 2.0 + x2 / 6.0 - x3 / 24.0 + x4 / 120.0 - x5 / 720.0);
        m1 = h * (0.5 - x / 3.0 + x2 / 8.0 - x3 / 30.0 + x4 / 144.0 - x5 / 840.0);
    } else {
        const double one_minus = -std::expm1(-x);
        m0 = one_minus / lambda;
        m1 = (one_minus - x * std::exp(-x)) / (lambda * x);
    }
    return ea * (ya * m0 + (yb - ya) * m1);
}

double laplace_piecewise_linear(std::span<const double> grid, std::span<const double> values, double lambda) {
    if (grid.size() != values.size()) throw ContractError("laplace_piecewise_linear: size mismatch");
    if (!(lambda > 0.0)) throw DomainError("laplace_piecewise_linear: lambda must be positive");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        sum += laplace_linear_segment(grid[i], grid[i + 1], values[i], values[i + 1], lambda);
    return sum;
}

}  // namespace tcfou
