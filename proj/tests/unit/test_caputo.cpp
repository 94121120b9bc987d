#include <doctest.h>

#include <cmath>
#include <random>

#include "tcfou/caputo.hpp"
#include "tcfou/errors.hpp"
#include "tcfou/simulate.hpp"

using namespace tcfou;

namespace {

// Nodes clustered at 0, where t^p has a singular derivative for p < 1.
std::vector<double> graded_grid(double t_end, std::size_t n) {
    std::vector<double> g(n + 1);
    for (std::size_t i = 0; i <= n; ++i) g[i] = t_end * std::pow(static_cast<double>(i) / static_cast<double>(n), 2.0);
    return g;
}

}  // namespace

TEST_CASE("power law") {
    for (double a : {0.3, 0.5, 0.8}) {
        const auto spec = BernsteinSpec::stable(a);
        for (double p : {0.75, 1.0, 1.5, 2.0}) {
            const auto u = TimeGridFunction::sample([&](double s) { return std::pow(s, p); },
                                                    [&](double s) { return p * std::pow(s, p - 1); },
                                                    graded_grid(2.0, 4000), Tail::forbidden());
            for (double t : {0.5, 1.0, 2.0}) {
                const double exact = std::tgamma(p + 1) / std::tgamma(p + 1 - a) * std::pow(t, p - a);
                CHECK(caputo_phi_derivative(u, spec, t) == doctest::Approx(exact).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("Laplace rule") {
    const auto u = TimeGridFunction::sample([](double s) { return 1.0 - std::exp(-s); },
                                            [](double s) { return std::exp(-s); }, uniform_grid(40.0, 8000),
                                            Tail::constant(1.0, 1e-15));
    for (const auto& spec : {BernsteinSpec::stable(0.5), BernsteinSpec::tempered(0.6, 1.0)})
        for (double lam : {0.5, 1.0, 2.0}) CHECK(laplace_caputo_residual(u, spec, lam) < 1e-4);
}

TEST_CASE("tempered kernel tail table") {
    const auto spec = BernsteinSpec::tempered(0.5, 2.0);
    const CaputoWorkspace ws(spec, uniform_grid(4.0, 40));
    for (double r : {0.01, 0.3, 1.0, 5.0}) CHECK(ws.levy_tail(r) == doctest::Approx(levy_tail(spec, r)).epsilon(1e-9));
    CHECK(ws.kernel_nodes().size() == 40);
}

TEST_CASE("constant has zero derivative") {
    const TimeGridFunction c({0.0, 1.0, 2.0}, {3.0, 3.0, 3.0}, Tail::constant(3.0), {0.0, 0.0, 0.0});
    CHECK(caputo_phi_derivative(c, BernsteinSpec::stable(0.4), 1.5) == 0.0);
    CHECK(caputo_phi_derivative(c, BernsteinSpec::stable(0.4), 7.0) == 0.0);
}

TEST_CASE("derivative is non-negative at a maximum") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const auto grid = uniform_grid(3.0, 600);
    int passed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        // Random smooth bump sums with a global maximum at a grid point t0.
        const double t0 = grid[100 + static_cast<std::size_t>(uni(gen) * 450)];
        const double w = 0.2 + uni(gen);
        const double c1 = uni(gen), c2 = uni(gen);
        auto f = [&](double s) { return std::exp(-(s - t0) * (s - t0) / w) * (1 + c1 * std::sin(c2 * (s - t0)) * (s - t0)); };
        auto df = [&](double s) {
            const double d = s - t0;
            const double e = std::exp(-d * d / w);
            const double q = 1 + c1 * std::sin(c2 * d) * d;
            const double dq = c1 * (c2 * std::cos(c2 * d) * d + std::sin(c2 * d));
            return e * (dq - 2 * d / w * q);
        };
        const auto u = TimeGridFunction::sample(f, df, grid, Tail::forbidden());
        double best = -INFINITY;
        double at = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (u.values()[i] > best) best = u.values()[i], at = grid[i];
        const auto spec = trial % 2 ? BernsteinSpec::stable(0.3 + 0.5 * uni(gen)) : BernsteinSpec::tempered(0.5, 1.0);
        const auto r = extremal_point_check(u, spec, at);
        passed += r.passed;
    }
    CHECK(passed == 100);
}

TEST_CASE("extremal check rejects a non-maximum") {
    const auto u = TimeGridFunction::sample([](double s) { return s; }, [](double) { return 1.0; }, uniform_grid(1.0, 10),
                                            Tail::forbidden());
    CHECK_THROWS_AS(extremal_point_check(u, BernsteinSpec::stable(0.5), 0.5), ContractError);
}

TEST_CASE("missing derivative samples") {
    const TimeGridFunction u({0.0, 1.0}, {0.0, 1.0}, Tail::forbidden());
    CHECK_THROWS_AS(caputo_phi_derivative(u, BernsteinSpec::stable(0.5), 0.5), ContractError);
}
